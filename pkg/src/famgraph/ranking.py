"""Feature ranking by information gain ratio against the class label."""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

DEFAULT_BINS = 10


def entropy(counts) -> float:
    """Shannon entropy in bits of a histogram; empty bins contribute 0."""
    counts = [c for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError("histogram counts must be non-negative")
    total = sum(counts)
    if total <= 0:
        raise ValueError("entropy of an empty histogram")
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * math.log2(p)
    return max(h, 0.0)


@dataclass(frozen=True)
class Discretization:
    """Cut points splitting the real line into ``len(bin_edges) + 1`` bins.

    A value ``v`` falls in bin ``i`` where ``i`` counts edges ``<= v``.
    """

    feature_name: str
    bin_edges: tuple[float, ...] = ()

    def __post_init__(self):
        edges = self.bin_edges
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError("bin edges must be strictly increasing")

    @property
    def n_bins(self) -> int:
        return len(self.bin_edges) + 1

    def apply(self, values) -> np.ndarray:
        return np.searchsorted(np.asarray(self.bin_edges, dtype=float),
                               np.asarray(values, dtype=float), side="left")

    @classmethod
    def identity(cls, values, feature_name: str = "") -> "Discretization":
        """One bin per distinct value (cuts at midpoints)."""
        u = np.unique(np.asarray(values, dtype=float))
        return cls(feature_name, tuple(float(x) for x in (u[:-1] + u[1:]) / 2))

    @classmethod
    def equal_frequency(cls, values, n_bins: int = DEFAULT_BINS,
                        feature_name: str = "") -> "Discretization":
        """Cuts at the interior empirical-CDF quantiles; duplicate cuts collapse.

        Uses the inverted-CDF quantile so duplicating every sample yields
        the same cuts.
        """
        if n_bins < 1:
            raise ValueError("n_bins must be >= 1")
        v = np.asarray(values, dtype=float)
        qs = (np.quantile(v, np.arange(1, n_bins) / n_bins, method="inverted_cdf")
              if n_bins > 1 else [])
        cuts = sorted({float(q) for q in qs})
        # bins are right-closed, so a cut at the maximum leaves the last bin empty
        cuts = [c for c in cuts if c < v.max()]
        return cls(feature_name, tuple(cuts))


def _check_labels(values, labels) -> tuple[np.ndarray, np.ndarray]:
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels)
    if values.shape[0] != labels.shape[0]:
        raise ValueError(f"length mismatch: {values.shape[0]} values, {labels.shape[0]} labels")
    if values.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if len(np.unique(labels)) < 2:
        raise ValueError("both classes must be present")
    return values, labels


def gain_ratio_detail(values, labels, disc: Discretization) -> tuple[float, bool]:
    """Return ``(ratio, zero_entropy)``; ratio is 0 when the binned feature is constant."""
    values, labels = _check_labels(values, labels)
    bins = disc.apply(values)
    n = len(labels)
    h_c = entropy(Counter(labels.tolist()).values())
    h_x = entropy(Counter(bins.tolist()).values())
    if h_x == 0.0:
        return 0.0, True
    h_c_given_x = 0.0
    for b, count in Counter(bins.tolist()).items():
        h_c_given_x += count / n * entropy(Counter(labels[bins == b].tolist()).values())
    ratio = (h_c - h_c_given_x) / h_x
    return min(max(ratio, 0.0), 1.0), False


def gain_ratio(values, labels, disc: Discretization) -> float:
    return gain_ratio_detail(values, labels, disc)[0]


@dataclass(frozen=True)
class RankedFeature:
    name: str
    gain_ratio: float
    zero_entropy: bool = False


@dataclass(frozen=True)
class GainReport:
    features: tuple[RankedFeature, ...] = field(default_factory=tuple)

    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def __getitem__(self, name: str) -> RankedFeature:
        for f in self.features:
            if f.name == name:
                return f
        raise KeyError(name)

    def to_csv(self) -> str:
        lines = ["feature,gain_ratio,flag"]
        for f in self.features:
            lines.append(f"{f.name},{f.gain_ratio:.12g},{'zero_entropy' if f.zero_entropy else ''}")
        return "\n".join(lines) + "\n"

    def to_plot_data(self) -> str:
        """Two-column whitespace-separated data for a bar chart."""
        return "".join(f"{i}\t{f.gain_ratio:.12g}\t# {f.name}\n" for i, f in enumerate(self.features))


def rank_features(X, y, feature_names: Sequence[str], n_bins: int = DEFAULT_BINS) -> GainReport:
    """Rank matrix columns by gain ratio, descending; ties by feature name."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(feature_names):
        raise ValueError("X must be 2-D with one column per feature name")
    ranked = []
    for j, name in enumerate(feature_names):
        disc = Discretization.equal_frequency(X[:, j], n_bins, name)
        ratio, flat = gain_ratio_detail(X[:, j], y, disc)
        ranked.append(RankedFeature(name, ratio, flat))
    ranked.sort(key=lambda f: (-f.gain_ratio, f.name))
    return GainReport(tuple(ranked))
