"""Seeded call-graph transforms modelling common app obfuscation techniques.

All transforms act on raw-mode graphs (before abstraction) and are
deterministic given their seed.  Each is a graph-level model of the
technique's effect:

* whitespace: source formatting only, the call graph is unchanged;
* call indirection: a selected call u->v becomes u->m->v through a fresh relay method;
* string encoding: a selected call from app code goes through a fresh decode
  helper, which also calls a java decoding API;
* packing: a loader chain (stub -> unpacker -> dalvik class loader) is put in
  front of the original entry points;
* identifier renaming: app classes get short (<= 3 character) package, class
  and method names; framework classes are never renamed.
"""

from __future__ import annotations

import itertools
import string
import zlib
from collections.abc import Iterator, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .callgraph import AbstractionMode, CallGraph, ClassInfo, Whitelist, default_whitelist, parse_api_name
from .interchange import AppRecord

TECHNIQUES = ("ws", "ci", "see", "pack", "ir", "all")
#: order used for the combined technique
COMBINED = ("ci", "see", "pack", "ir")

RELAY_CLASS = "relay.Trampoline"
DECODER_CLASS = "strenc.StringDecoder"
DECODE_API = "java.util.Base64$Decoder:decode"
CLASS_LOADERS = (
    "dalvik.system.DexClassLoader:loadClass",
    "dalvik.system.PathClassLoader:loadClass",
    "dalvik.system.InMemoryDexClassLoader:loadClass",
    "dalvik.system.BaseDexClassLoader:findClass",
    "dalvik.system.DexFile:loadClass",
    "dalvik.system.DexFile:loadDex",
    "dalvik.system.BaseDexClassLoader:findLibrary",
    "dalvik.system.DexClassLoader:getResource",
)


def _check_raw(g: CallGraph) -> None:
    if g.mode is not AbstractionMode.RAW:
        raise ValueError("obfuscation transforms apply to raw-mode graphs")


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")


def _class_of(node: str) -> str:
    return node.partition(":")[0]


def _fresh_methods(g: CallGraph, cls: str, stem: str) -> Iterator[str]:
    """Unused ``cls:stemNNNN`` node names (method names are >= 4 characters)."""
    for k in itertools.count(1):
        node = f"{cls}:{stem}{k:04d}"
        if node not in g:
            yield node


def _with_methods(classes: dict, cls: str, methods: Sequence[str]) -> None:
    old = classes.get(cls, ClassInfo())
    merged = tuple(dict.fromkeys(old.methods + tuple(methods)))
    classes[cls] = ClassInfo(merged, old.resolvable)


def transform_whitespace(g: CallGraph) -> CallGraph:
    _check_raw(g)
    return g


def transform_call_indirection(g: CallGraph, p: float, seed: int = 0) -> CallGraph:
    """Replace each edge, with probability p, by a two-hop path through a fresh relay."""
    _check_raw(g)
    _check_p(p)
    rng = np.random.default_rng(seed)
    fresh = _fresh_methods(g, RELAY_CLASS, "relay")
    edges, relays = [], []
    for u, v, w in g.edges:
        if rng.random() < p:
            m = next(fresh)
            relays.append(m.partition(":")[2])
            edges += [(u, m, w), (m, v, w)]
        else:
            edges.append((u, v, w))
    if not relays:
        return g
    classes = dict(g.classes)
    _with_methods(classes, RELAY_CLASS, relays)
    return CallGraph(edges, nodes=g.nodes, classes=classes)


def _is_framework(node: str, whitelist: Whitelist) -> bool:
    return whitelist.is_framework(parse_api_name(node))


def transform_string_encoding(g: CallGraph, p: float, seed: int = 0,
                              whitelist: Whitelist | None = None) -> CallGraph:
    """Route a p-fraction of app-originated calls through fresh decode helpers.

    Each selected edge (u, v, w) becomes (u, h, w), (h, v, w) plus the
    bookkeeping edge (h, DECODE_API, 1).
    """
    _check_raw(g)
    _check_p(p)
    whitelist = whitelist or default_whitelist()
    rng = np.random.default_rng(seed)
    eligible = [i for i, (u, _, _) in enumerate(g.edges) if not _is_framework(u, whitelist)]
    k = int(round(p * len(eligible)))
    if k == 0:
        return g
    chosen = set(rng.choice(eligible, size=k, replace=False).tolist())
    fresh = _fresh_methods(g, DECODER_CLASS, "decode")
    edges, helpers = [], []
    for i, (u, v, w) in enumerate(g.edges):
        if i in chosen:
            h = next(fresh)
            helpers.append(h.partition(":")[2])
            edges += [(u, h, w), (h, v, w), (h, DECODE_API, 1)]
        else:
            edges.append((u, v, w))
    classes = dict(g.classes)
    _with_methods(classes, DECODER_CLASS, helpers)
    return CallGraph(edges, nodes=g.nodes, classes=classes)


def transform_packing(g: CallGraph, seed: int = 0) -> CallGraph:
    """Prepend stub -> unpacker -> class loader, the loader calling every root.

    Roots are nodes with no incoming edge; a rootless graph is entered at
    its smallest node id.  ``seed`` is accepted for interface symmetry; the
    transform is fully determined by the graph.
    """
    _check_raw(g)
    for k in itertools.count(1):
        stub = f"packer{k}.StubApplication:attachBaseContext"
        unpacker = f"packer{k}.PayloadUnpacker:decryptPayload"
        if stub not in g and unpacker not in g:
            break
    loader = next((c for c in CLASS_LOADERS if c not in g), CLASS_LOADERS[-1])
    has_in = {v for (_, v) in g.edge_weights}
    roots = [n for n in g.nodes if n not in has_in] or ([min(g.nodes)] if g.nodes else [])
    edges = g.edges + [(stub, unpacker, 1), (unpacker, loader, 1)] + [(loader, r, 1) for r in roots]
    classes = dict(g.classes)
    _with_methods(classes, _class_of(stub), ["attachBaseContext"])
    _with_methods(classes, _class_of(unpacker), ["decryptPayload"])
    return CallGraph(edges, nodes=g.nodes, classes=classes)


def _short_names(min_len: int) -> Iterator[str]:
    for length in range(min_len, 4):
        for chars in itertools.product(string.ascii_lowercase, repeat=length):
            yield "".join(chars)


class _Renamer:
    """Consistent short names for packages, classes and methods."""

    def __init__(self, taken_classes: set[str]):
        self.packages: dict[tuple[str, ...], tuple[str, ...]] = {(): ()}
        self.children: dict[tuple[str, ...], Iterator[str]] = {}
        self.used_segments: dict[tuple[str, ...], set[str]] = {}
        self.taken = taken_classes

    def _child(self, parent: tuple[str, ...], depth: int) -> str:
        gen = self.children.setdefault(parent, _short_names(min(depth + 1, 3)))
        used = self.used_segments.setdefault(parent, set())
        for name in gen:
            if name not in used:
                used.add(name)
                return name
        raise RuntimeError("ran out of short identifiers")

    def package(self, path: tuple[str, ...]) -> tuple[str, ...]:
        if path not in self.packages:
            parent = self.package(path[:-1])
            self.packages[path] = parent + (self._child(parent, len(path) - 1),)
        return self.packages[path]

    def qualified_class(self, package_path: tuple[str, ...]) -> str:
        new_pkg = self.package(package_path)
        while True:
            name = self._child(new_pkg + ("#class",), len(new_pkg))
            qualified = ".".join(new_pkg + (name,))
            if qualified not in self.taken:
                self.taken.add(qualified)
                return qualified


def transform_identifier_renaming(g: CallGraph, p: float, seed: int = 0,
                                  whitelist: Whitelist | None = None) -> CallGraph:
    """Rename a p-fraction of the app's (non-whitelisted) classes to short identifiers."""
    _check_raw(g)
    _check_p(p)
    whitelist = whitelist or default_whitelist()
    methods: dict[str, list[str]] = {}
    for cls, info in g.classes.items():
        methods.setdefault(cls, []).extend(info.methods)
    for node in g.nodes:
        cls, _, m = node.partition(":")
        methods.setdefault(cls, []).append(m)
    candidates = sorted(c for c in methods
                        if not whitelist.is_framework(parse_api_name(c + ":")))
    k = int(round(p * len(candidates)))
    if k == 0:
        return g
    rng = np.random.default_rng(seed)
    chosen = sorted(rng.choice(len(candidates), size=k, replace=False).tolist())
    chosen_classes = [candidates[i] for i in chosen]

    renamer = _Renamer(taken_classes=set(methods) - set(chosen_classes))
    class_map: dict[str, str] = {}
    method_map: dict[str, dict[str, str]] = {}
    for cls in chosen_classes:
        api = parse_api_name(cls + ":")
        class_map[cls] = renamer.qualified_class(api.package_path)
        names = _short_names(1)
        method_map[cls] = {m: ("" if m == "" else next(names))
                           for m in dict.fromkeys(sorted(set(methods[cls])))}

    def rename(node: str) -> str:
        cls, sep, m = node.partition(":")
        if cls not in class_map:
            return node
        return class_map[cls] + sep + method_map[cls][m]

    classes = {}
    for cls, info in g.classes.items():
        if cls in class_map:
            classes[class_map[cls]] = ClassInfo(tuple(method_map[cls][m] for m in info.methods),
                                                info.resolvable)
        else:
            classes[cls] = info
    for cls in chosen_classes:
        if cls not in g.classes:
            classes[class_map[cls]] = ClassInfo(
                tuple(v for v in method_map[cls].values() if v), True)
    edges = [(rename(u), rename(v), w) for u, v, w in g.edges]
    return CallGraph(edges, nodes=[rename(n) for n in g.nodes], classes=classes)


def apply_technique(g: CallGraph, technique: str, p: float = 1.0, seed: int = 0,
                    whitelist: Whitelist | None = None) -> CallGraph:
    """Apply one technique by its short name; ``all`` chains CI, SEE, packing and IR."""
    if technique == "ws":
        return transform_whitespace(g)
    if technique == "ci":
        return transform_call_indirection(g, p, seed)
    if technique == "see":
        return transform_string_encoding(g, p, seed, whitelist)
    if technique == "pack":
        return transform_packing(g, seed)
    if technique == "ir":
        return transform_identifier_renaming(g, p, seed, whitelist)
    if technique == "all":
        return apply_sequence(g, COMBINED, p, seed, whitelist)
    raise ValueError(f"unknown technique {technique!r}; expected one of {TECHNIQUES}")


def apply_sequence(g: CallGraph, techniques: Sequence[str], p: float = 1.0, seed: int = 0,
                   whitelist: Whitelist | None = None) -> CallGraph:
    for step, tech in enumerate(techniques):
        sub_seed = int(np.random.default_rng([seed, step]).integers(2 ** 31 - 1))
        g = apply_technique(g, tech, p, sub_seed, whitelist)
    return g


def app_seed(seed: int, app_id: str) -> int:
    """Per-app seed, stable under corpus reordering."""
    return int(np.random.default_rng([seed, zlib.crc32(app_id.encode("utf-8"))]).integers(2 ** 31 - 1))


def obfuscate_record(rec: AppRecord, technique: str | Sequence[str], p: float = 1.0,
                     seed: int = 0, whitelist: Whitelist | None = None) -> AppRecord:
    techniques = [technique] if isinstance(technique, str) else list(technique)
    return rec.with_graph(apply_sequence(rec.graph, techniques, p, app_seed(seed, rec.app_id), whitelist))


class Obfuscator(TransformerMixin, BaseEstimator):
    """Transformer applying one technique (or a sequence) to raw graphs.

    The i-th graph uses a seed derived from ``(seed, i)``.
    """

    def __init__(self, technique="ir", p: float = 1.0, seed: int = 0):
        self.technique = technique
        self.p = p
        self.seed = seed

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> list[CallGraph]:
        techniques = [self.technique] if isinstance(self.technique, str) else list(self.technique)
        out = []
        for i, g in enumerate(X):
            s = int(np.random.default_rng([self.seed, i]).integers(2 ** 31 - 1))
            out.append(apply_sequence(g, techniques, self.p, s))
        return out
