"""Call-graph data model, API-name parsing and family abstraction.

A raw call graph has one node per invoked method, written ``pkg.Class:method``.
Abstraction collapses nodes to their API package (``api`` mode) or to one of
twelve coarse families (``family`` mode); parallel calls between the same
pair of nodes are kept as a single weighted edge.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from types import MappingProxyType

from .exceptions import ApiParseError


class FamilyLabel(str, enum.Enum):
    ANDROID = "android"
    DALVIK = "dalvik"
    JAVA = "java"
    JAVAX = "javax"
    JUNIT = "junit"
    APACHE = "apache"
    JSON = "json"
    COM = "com"
    XML = "xml"
    GOOGLE = "google"
    SELF_DEFINED = "self-defined"
    OBFUSCATED = "obfuscated"

    def __str__(self) -> str:
        return self.value


#: Canonical family order; fixes row/column order of transition matrices.
FAMILIES: tuple[str, ...] = tuple(f.value for f in FamilyLabel)
FRAMEWORK_FAMILIES: frozenset[str] = frozenset(FAMILIES[:10])


class AbstractionMode(str, enum.Enum):
    RAW = "raw"
    API = "api"
    FAMILY = "family"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# API names

@dataclass(frozen=True)
class ApiName:
    raw: str
    package_path: tuple[str, ...]
    class_name: str
    method_name: str

    @property
    def package(self) -> str:
        return ".".join(self.package_path)

    @property
    def qualified_class(self) -> str:
        return ".".join(self.package_path + (self.class_name,))

    def __str__(self) -> str:
        return self.raw


def parse_api_name(raw: str) -> ApiName:
    """Parse ``<dotted-package>.<Class>[:<method>]``.

    >>> parse_api_name("android.util.Log:d").package_path
    ('android', 'util')
    """
    if not isinstance(raw, str):
        raise ApiParseError(f"API name must be a string, got {type(raw).__name__}")
    head, _, method = raw.partition(":")
    if ":" in method:
        raise ApiParseError(f"{raw!r}: more than one ':' (offending token {method!r})")
    segments = head.split(".")
    if len(segments) < 2:
        raise ApiParseError(f"{raw!r}: expected at least two dot-separated segments, got {head!r}")
    for seg in segments:
        if not seg or seg != seg.strip():
            raise ApiParseError(f"{raw!r}: empty or padded segment {seg!r}")
    return ApiName(raw=raw, package_path=tuple(segments[:-1]),
                   class_name=segments[-1], method_name=method)


# ---------------------------------------------------------------------------
# Obfuscation heuristic and whitelist

SHORT_NAME_MAX = 3
SHORT_NAME_FRACTION = 0.5


def classify_obfuscated_class(class_name: str, method_names: Iterable[str],
                              resolvable: bool) -> bool:
    """True when the class cannot be resolved or at least half its methods
    have names of three characters or fewer."""
    if not resolvable:
        return True
    names = list(method_names)
    if not names:
        return False
    short = sum(1 for m in names if len(m) <= SHORT_NAME_MAX)
    return short / len(names) >= SHORT_NAME_FRACTION


@dataclass(frozen=True)
class ClassInfo:
    """Per-class facts an extractor records: declared methods and whether
    the class hierarchy could be resolved."""
    methods: tuple[str, ...] = ()
    resolvable: bool = True


class Whitelist:
    """Framework package prefixes tagged with their family.

    Lookup is longest-prefix match over dot-separated segments, so
    ``androidx.foo`` never matches ``android``. Entries flagged ``exact``
    only match their own package, not sub-packages.
    """

    def __init__(self, entries: Mapping[str, str], api_level: int = 26,
                 exact: Iterable[str] = ()):
        table: dict[tuple[str, ...], str] = {}
        for prefix, family in entries.items():
            family = FamilyLabel(family).value
            if family not in FRAMEWORK_FAMILIES:
                raise ValueError(f"whitelist family must be a framework family, got {family!r}")
            key = tuple(prefix.split("."))
            if key in table:
                raise ValueError(f"duplicate whitelist prefix {prefix!r}")
            table[key] = family
        self._table = MappingProxyType(table)
        self._exact = frozenset(tuple(p.split(".")) for p in exact)
        self.api_level = api_level

    @classmethod
    def load(cls, path: str | Path | None = None) -> "Whitelist":
        if path is None:
            text = resources.files("famgraph").joinpath("data/whitelist_api26.txt").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        return cls.parse(text)

    @classmethod
    def parse(cls, text: str) -> "Whitelist":
        entries: dict[str, str] = {}
        exact = []
        api_level = 26
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "api_level":
                api_level = int(parts[1])
                continue
            if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] != "exact"):
                raise ValueError(f"whitelist line {lineno}: cannot parse {line!r}")
            if parts[0] in entries:
                raise ValueError(f"whitelist line {lineno}: duplicate prefix {parts[0]!r}")
            entries[parts[0]] = parts[1]
            if len(parts) == 3:
                exact.append(parts[0])
        return cls(entries, api_level=api_level, exact=exact)

    def packages(self, family: str) -> frozenset[str]:
        return frozenset(".".join(k) for k, f in self._table.items() if f == family)

    @property
    def android_packages(self) -> frozenset[str]:
        return self.packages("android")

    @property
    def google_packages(self) -> frozenset[str]:
        return self.packages("google")

    def __len__(self) -> int:
        return len(self._table)

    def lookup(self, package_path: tuple[str, ...]) -> tuple[str, str] | None:
        """Return ``(matched_prefix, family)`` or None."""
        for k in range(len(package_path), 0, -1):
            key = package_path[:k]
            family = self._table.get(key)
            if family is None:
                continue
            if k < len(package_path) and key in self._exact:
                continue
            return ".".join(key), family
        return None

    def is_framework(self, api: ApiName) -> bool:
        return self.lookup(api.package_path) is not None


_DEFAULT_WHITELIST: Whitelist | None = None


def default_whitelist() -> Whitelist:
    global _DEFAULT_WHITELIST
    if _DEFAULT_WHITELIST is None:
        _DEFAULT_WHITELIST = Whitelist.load()
    return _DEFAULT_WHITELIST


def abstract_to_family(api: ApiName, whitelist: Whitelist,
                       class_methods: Mapping[str, ClassInfo] | None = None) -> FamilyLabel:
    info = (class_methods or {}).get(api.qualified_class)
    if info is not None and classify_obfuscated_class(api.class_name, info.methods, info.resolvable):
        return FamilyLabel.OBFUSCATED
    hit = whitelist.lookup(api.package_path)
    if hit is not None:
        return FamilyLabel(hit[1])
    return FamilyLabel.SELF_DEFINED


def abstract_to_api(api: ApiName, whitelist: Whitelist,
                    class_methods: Mapping[str, ClassInfo] | None = None) -> str:
    """API-mode node id: the matched framework package, else the family label."""
    family = abstract_to_family(api, whitelist, class_methods)
    if family.value in FRAMEWORK_FAMILIES:
        return whitelist.lookup(api.package_path)[0]
    return family.value


# ---------------------------------------------------------------------------
# Graphs

class CallGraph:
    """Weighted directed graph; one edge record per ordered node pair.

    Parallel edges passed to the constructor are merged by summing weights.
    Instances are treated as immutable values.
    """

    __slots__ = ("_nodes", "_edges", "_mode", "_classes", "_succ")

    def __init__(self, edges: Iterable[tuple[str, str, int]] = (),
                 nodes: Iterable[str] = (),
                 mode: AbstractionMode | str = AbstractionMode.RAW,
                 classes: Mapping[str, ClassInfo] | None = None):
        node_order: dict[str, None] = {}
        edge_map: dict[tuple[str, str], int] = {}
        for n in nodes:
            node_order.setdefault(n, None)
        for src, dst, w in edges:
            if isinstance(w, bool) or int(w) != w or w < 1:
                raise ValueError(f"edge {src}->{dst}: weight must be a positive integer, got {w!r}")
            node_order.setdefault(src, None)
            node_order.setdefault(dst, None)
            edge_map[(src, dst)] = edge_map.get((src, dst), 0) + int(w)
        self._nodes = tuple(node_order)
        self._edges = MappingProxyType(edge_map)
        self._mode = AbstractionMode(mode)
        self._classes = MappingProxyType(dict(classes or {}))
        succ: dict[str, dict[str, int]] = {n: {} for n in self._nodes}
        for (u, v), w in edge_map.items():
            succ[u][v] = w
        self._succ = succ

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def edges(self) -> list[tuple[str, str, int]]:
        return [(u, v, w) for (u, v), w in self._edges.items()]

    @property
    def edge_weights(self) -> Mapping[tuple[str, str], int]:
        return self._edges

    @property
    def mode(self) -> AbstractionMode:
        return self._mode

    @property
    def classes(self) -> Mapping[str, ClassInfo]:
        return self._classes

    @property
    def n_nodes(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    @property
    def total_weight(self) -> int:
        return sum(self._edges.values())

    def weight(self, u: str, v: str) -> int:
        return self._edges.get((u, v), 0)

    def successors(self, u: str) -> Mapping[str, int]:
        return self._succ[u]

    def in_degree(self, v: str) -> int:
        return sum(1 for (_, d) in self._edges if d == v)

    def __contains__(self, node: object) -> bool:
        return node in self._succ

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CallGraph):
            return NotImplemented
        return (self._mode == other._mode
                and set(self._nodes) == set(other._nodes)
                and dict(self._edges) == dict(other._edges)
                and dict(self._classes) == dict(other._classes))

    def __hash__(self):
        return hash((self._mode, frozenset(self._nodes), frozenset(self._edges.items())))

    def __reduce__(self):
        return (CallGraph, (self.edges, self._nodes, self._mode, dict(self._classes)))

    def __repr__(self) -> str:
        return f"CallGraph(mode={self._mode.value}, nodes={self.n_nodes}, edges={self.n_edges})"


class UndirectedView:
    """Simple undirected graph derived from a CallGraph.

    Edge weight is the sum of both directed weights; self-loops are dropped.
    Metrics that ignore weights use :attr:`adj`.
    """

    __slots__ = ("nodes", "adj", "weights")

    def __init__(self, nodes: Iterable[str], weights: Mapping[tuple[str, str], int]):
        self.nodes: tuple[str, ...] = tuple(sorted(set(nodes)))
        self.weights: dict[tuple[str, str], int] = dict(weights)
        self.adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for u, v in self.weights:
            self.adj[u].add(v)
            self.adj[v].add(u)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], nodes: Iterable[str] = ()) -> "UndirectedView":
        """Build an unweighted view (weight 1) from unordered pairs."""
        nodes = list(nodes)
        weights: dict[tuple[str, str], int] = {}
        for u, v in edges:
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            weights[key] = 1
            nodes.extend(key)
        return cls(nodes, weights)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    def degree(self, v: str) -> int:
        return len(self.adj[v])

    def __repr__(self) -> str:
        return f"UndirectedView(nodes={self.n_nodes}, edges={self.n_edges})"


def to_undirected(g: CallGraph) -> UndirectedView:
    weights: dict[tuple[str, str], int] = {}
    for (u, v), w in g.edge_weights.items():
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        weights[key] = weights.get(key, 0) + w
    return UndirectedView(g.nodes, weights)


def abstract_graph(g: CallGraph, mode: AbstractionMode | str,
                   whitelist: Whitelist | None = None) -> CallGraph:
    """Merge nodes under the API or family abstraction, summing edge weights.

    Abstracting a graph already in the target mode returns an equal graph;
    ``api`` graphs may be further collapsed to ``family``.
    """
    try:
        mode = AbstractionMode(mode)
    except ValueError:
        raise ValueError(f"unknown abstraction mode {mode!r}") from None
    if mode is AbstractionMode.RAW:
        if g.mode is not AbstractionMode.RAW:
            raise ValueError(f"cannot de-abstract a {g.mode.value} graph to raw")
        return g
    whitelist = whitelist or default_whitelist()
    if g.mode is mode:
        return CallGraph(g.edges, nodes=g.nodes, mode=mode)
    if g.mode is AbstractionMode.FAMILY:
        raise ValueError("cannot refine a family graph into api mode")

    mapping: dict[str, str] = {}
    if g.mode is AbstractionMode.RAW:
        for node in g.nodes:
            api = parse_api_name(node)
            if mode is AbstractionMode.FAMILY:
                mapping[node] = abstract_to_family(api, whitelist, g.classes).value
            else:
                mapping[node] = abstract_to_api(api, whitelist, g.classes)
    else:  # api -> family
        for node in g.nodes:
            if node in FAMILIES and node not in FRAMEWORK_FAMILIES:
                mapping[node] = node
            else:
                hit = whitelist.lookup(tuple(node.split(".")))
                mapping[node] = hit[1] if hit else FamilyLabel.SELF_DEFINED.value

    merged = [(mapping[u], mapping[v], w) for u, v, w in g.edges]
    nodes = sorted({mapping[n] for n in g.nodes})
    return CallGraph(merged, nodes=nodes, mode=mode)
