"""Corpora: scanner-report labelling, stratified splits and a synthetic generator."""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .callgraph import FAMILIES, FRAMEWORK_FAMILIES, CallGraph, ClassInfo, Whitelist, default_whitelist
from .exceptions import InterchangeError
from .interchange import AppRecord
from .learners.evaluation import stratified_indices

DEFAULT_THRESHOLD = 5


# ---------------------------------------------------------------------------
# scanner reports

@dataclass(frozen=True)
class ScannerReport:
    app_id: str
    positives: int
    total: int

    def __post_init__(self):
        if self.total < 1:
            raise ValueError(f"{self.app_id}: total engines must be positive")
        if not 0 <= self.positives <= self.total:
            raise ValueError(f"{self.app_id}: positives must lie in [0, {self.total}]")


def load_scanner_reports(path: str | Path) -> list[ScannerReport]:
    """Read JSON Lines ``{"app_id", "positives", "total"}``."""
    reports = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                reports.append(ScannerReport(str(obj["app_id"]), int(obj["positives"]), int(obj["total"])))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InterchangeError(f"scanner report line {lineno}: {exc}") from None
    return reports


@dataclass(frozen=True)
class Discrepancy:
    app_id: str
    existing: str
    derived: str
    positives: int


@dataclass(frozen=True)
class Annotation:
    records: list[AppRecord]
    discrepancies: list[Discrepancy]


def annotate(corpus: Iterable[AppRecord], reports: Sequence[ScannerReport],
             threshold: int = DEFAULT_THRESHOLD) -> Annotation:
    """Label each app malware iff its report has ``positives >= threshold``.

    Apps without a report keep their label.  When a report overrides a
    different existing label the change is listed as a discrepancy.
    """
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    by_id: dict[str, ScannerReport] = {}
    for r in reports:
        if r.app_id in by_id:
            raise ValueError(f"duplicate scanner report for app_id {r.app_id!r}")
        by_id[r.app_id] = r
    out, issues = [], []
    for rec in corpus:
        report = by_id.get(rec.app_id)
        if report is None:
            out.append(rec)
            continue
        derived = "malware" if report.positives >= threshold else "benign"
        if rec.label is not None and rec.label != derived:
            issues.append(Discrepancy(rec.app_id, rec.label, derived, report.positives))
        out.append(rec.with_label(derived))
    return Annotation(out, issues)


# ---------------------------------------------------------------------------
# splitting

def labels_of(corpus: Sequence[AppRecord]) -> list[str]:
    missing = [r.app_id for r in corpus if r.label is None]
    if missing:
        raise ValueError(f"{len(missing)} unlabelled apps, e.g. {missing[0]!r}")
    return [r.label for r in corpus]


def stratified_split(corpus: Sequence[AppRecord], ratio: float = 0.8,
                     seed: int = 0) -> tuple[list[AppRecord], list[AppRecord]]:
    """Per-class seeded split; ``floor(ratio * n_c)`` apps of each class go to train."""
    train_idx, test_idx = stratified_indices(labels_of(corpus), ratio, seed)
    return [corpus[i] for i in train_idx], [corpus[i] for i in test_idx]


# ---------------------------------------------------------------------------
# synthetic corpora

@dataclass(frozen=True)
class GeneratorParams:
    """Per-class generator knobs (means of the per-app draws)."""

    framework_families: float   # distinct framework families an app calls into
    app_classes: float          # app-defined classes
    methods_per_class: float
    obfuscated_fraction: float  # share of app classes with short names
    attach_edges: float         # preferential-attachment edges per new app method
    reciprocity: float          # chance an intra-app call is answered by a back call
    framework_calls: float      # framework calls per app method
    callback_rate: float        # chance a framework API calls back into app code

    def interpolate(self, other: "GeneratorParams", t: float) -> "GeneratorParams":
        # exact at both endpoints
        return GeneratorParams(**{f.name: (1 - t) * getattr(self, f.name) + t * getattr(other, f.name)
                                  for f in fields(self)})


BENIGN_PARAMS = GeneratorParams(framework_families=8.0, app_classes=6.0, methods_per_class=4.0,
                                obfuscated_fraction=0.0, attach_edges=1.0, reciprocity=0.05,
                                framework_calls=2.0, callback_rate=0.3)
MALWARE_PARAMS = GeneratorParams(framework_families=3.0, app_classes=8.0, methods_per_class=4.0,
                                 obfuscated_fraction=0.5, attach_edges=3.0, reciprocity=0.5,
                                 framework_calls=1.0, callback_rate=0.05)
MIDPOINT_PARAMS = BENIGN_PARAMS.interpolate(MALWARE_PARAMS, 0.5)

_VENDORS = ("acme", "nimbus", "orbit", "pixel", "quartz", "sprout", "tundra", "vortex")
_MODULES = ("core", "ui", "net", "data", "util", "service", "model", "view")
_CLASS_WORDS = ("Manager", "Helper", "Factory", "Builder", "Service", "Controller",
                "Handler", "Adapter", "Loader", "Parser", "Provider", "Worker")
_METHOD_WORDS = ("onCreate", "update", "handle", "process", "render", "loadData",
                 "parse", "build", "execute", "notify", "refresh", "resolve")
_API_CLASSES = ("Manager", "Util", "Factory", "Builder", "Context", "Reader", "Writer", "Client")
_API_METHODS = ("getInstance", "create", "build", "execute", "valueOf", "write", "close", "open")
_SHORT = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class SynthSpec:
    n_benign: int
    n_malware: int
    separation: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_benign < 0 or self.n_malware < 0:
            raise ValueError("app counts must be non-negative")
        if not 0.0 <= self.separation <= 1.0:
            raise ValueError("separation must lie in [0, 1]")

    def params(self, label: str) -> GeneratorParams:
        extreme = BENIGN_PARAMS if label == "benign" else MALWARE_PARAMS
        return MIDPOINT_PARAMS.interpolate(extreme, self.separation)


def _count(rng: np.random.Generator, mean: float, lo: int, hi: int) -> int:
    return int(min(max(round(rng.normal(mean, 1.0)), lo), hi))


def _weight(rng: np.random.Generator) -> int:
    return int(rng.geometric(0.5))


def synth_graph(params: GeneratorParams, rng: np.random.Generator,
                whitelist: Whitelist | None = None) -> CallGraph:
    """One raw call graph drawn from ``params``."""
    whitelist = whitelist or default_whitelist()
    vendor = _VENDORS[rng.integers(len(_VENDORS))]

    # app classes and their methods
    n_classes = _count(rng, params.app_classes, 1, 20)
    n_obf = int(round(params.obfuscated_fraction * n_classes))
    classes: dict[str, ClassInfo] = {}
    methods: list[str] = []
    for c in range(n_classes):
        n_methods = _count(rng, params.methods_per_class, 1, 10)
        if c < n_obf:
            cls = f"{_SHORT[c % 26]}.{_SHORT[(c // 26) % 26]}{_SHORT[rng.integers(26)]}"
            names = [_SHORT[i] for i in range(n_methods)]
        else:
            module = _MODULES[rng.integers(len(_MODULES))]
            cls = f"{vendor}.{module}.{_CLASS_WORDS[rng.integers(len(_CLASS_WORDS))]}{c}"
            names = [f"{_METHOD_WORDS[i % len(_METHOD_WORDS)]}{i // len(_METHOD_WORDS) or ''}"
                     for i in rng.permutation(n_methods)]
        classes[cls] = ClassInfo(tuple(names), True)
        methods += [f"{cls}:{m}" for m in names]

    edges: list[tuple[str, str, int]] = []
    order = [methods[i] for i in rng.permutation(len(methods))]
    degree = np.ones(len(order))
    for i in range(1, len(order)):
        k = min(i, max(1, int(rng.poisson(params.attach_edges))))
        p = degree[:i] / degree[:i].sum()
        for j in rng.choice(i, size=k, replace=False, p=p):
            edges.append((order[j], order[i], _weight(rng)))
            degree[i] += 1
            degree[j] += 1
            if rng.random() < params.reciprocity:
                edges.append((order[i], order[j], _weight(rng)))

    # framework APIs
    n_fam = _count(rng, params.framework_families, 1, len(FRAMEWORK_FAMILIES))
    others = [f for f in FAMILIES if f in FRAMEWORK_FAMILIES and f != "android"]
    families = ["android"] + [others[i] for i in rng.choice(len(others), n_fam - 1, replace=False)]
    apis, firsts = [], []
    for fam in families:
        pkgs = sorted(whitelist.packages(fam))
        pkg = pkgs[rng.integers(len(pkgs))]
        for k in range(1 + int(rng.integers(2))):
            api = (f"{pkg}.{_API_CLASSES[rng.integers(len(_API_CLASSES))]}"
                   f":{_API_METHODS[rng.integers(len(_API_METHODS))]}")
            if k == 0:
                firsts.append(api)
            apis.append(api)
    apis = list(dict.fromkeys(apis))
    # one call per family so the app touches exactly the drawn families
    for api in firsts:
        edges.append((order[rng.integers(len(order))], api, _weight(rng)))
    for m in order:
        for _ in range(int(rng.poisson(params.framework_calls))):
            edges.append((m, apis[rng.integers(len(apis))], _weight(rng)))
    for api in apis:
        if rng.random() < params.callback_rate:
            edges.append((api, order[rng.integers(len(order))], _weight(rng)))
    return CallGraph(edges, nodes=order, classes=classes)


def _synth_one(args) -> AppRecord:
    spec, label, index = args
    rng = np.random.default_rng([spec.seed, 0 if label == "benign" else 1, index])
    return AppRecord(f"{label}-{index:05d}", label, synth_graph(spec.params(label), rng))


def generate_synthetic(spec: SynthSpec, n_jobs: int = 1) -> list[AppRecord]:
    """Labelled corpus, benign apps first.  App i of each class uses the seed
    ``(spec.seed, class, i)``, so output does not depend on ``n_jobs``."""
    jobs = [(spec, "benign", i) for i in range(spec.n_benign)]
    jobs += [(spec, "malware", i) for i in range(spec.n_malware)]
    if n_jobs > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(_synth_one, jobs, chunksize=max(1, math.ceil(len(jobs) / (4 * n_jobs)))))
    return [_synth_one(j) for j in jobs]
