"""Shortest-path metrics on the undirected view (unweighted hops).

Everything here is computed in exact integer/rational arithmetic so results
do not depend on node order; conversion to float happens at the very end.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from ..callgraph import UndirectedView
from ..exceptions import UndefinedMetricError
from .structure import connected_components


def bfs_distances(adj, source: str, removed: str | None = None) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w != removed and w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def distance_sum(adj, nodes, removed: str | None = None) -> int:
    """Sum of distances over connected ordered pairs, optionally without one node."""
    return sum(sum(bfs_distances(adj, s, removed).values()) for s in nodes if s != removed)


def _aggregate(values: list[Fraction]) -> tuple[float, float, float]:
    return float(min(values)), float(sum(values) / len(values)), float(max(values))


def betweenness(view: UndirectedView) -> dict[str, Fraction]:
    """Per-node betweenness with normalisation 2/(n(n-1)) over unordered pairs.

    Brandes accumulation; pairs joined by several shortest paths share
    credit fractionally.
    """
    n = view.n_nodes
    if n < 2:
        raise UndefinedMetricError("betweenness needs at least 2 nodes")
    adj = view.adj
    raw = {v: Fraction(0) for v in view.nodes}
    for s in view.nodes:
        order = []
        preds: dict[str, list[str]] = {v: [] for v in view.nodes}
        sigma = dict.fromkeys(view.nodes, 0)
        dist = {s: 0}
        sigma[s] = 1
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = dict.fromkeys(view.nodes, Fraction(0))
        for w in reversed(order):
            coeff = (1 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                raw[w] += delta[w]
    # every unordered pair was counted from both ends
    scale = Fraction(1, n * (n - 1))
    return {v: c * scale for v, c in raw.items()}


def betweenness_stats(view: UndirectedView) -> tuple[float, float, float]:
    return _aggregate(list(betweenness(view).values()))


def closeness_vitality(view: UndirectedView) -> dict[str, int]:
    """W(G) - W(G - v), W summing distances over connected ordered pairs."""
    if view.n_nodes < 2:
        raise UndefinedMetricError("vitality needs at least 2 nodes")
    whole = distance_sum(view.adj, view.nodes)
    return {v: whole - distance_sum(view.adj, view.nodes, removed=v) for v in view.nodes}


def vitality_stats(view: UndirectedView) -> tuple[float, float, float]:
    return _aggregate([Fraction(x) for x in closeness_vitality(view).values()])


def degree_centrality(view: UndirectedView) -> dict[str, Fraction]:
    n = view.n_nodes
    if n == 1:
        return {view.nodes[0]: Fraction(0)}
    return {v: Fraction(view.degree(v), n - 1) for v in view.nodes}


@dataclass(frozen=True)
class Eccentricity:
    diameter: int
    radius: int
    center_number: int
    periphery_number: int
    avg_shortest_path: float


def _eccentricities(adj, comp: list[str]) -> tuple[dict[str, int], int]:
    ecc = {}
    total = 0
    for s in comp:
        d = bfs_distances(adj, s)
        ecc[s] = max(d.values())
        total += sum(d.values())
    return ecc, total


def _summarise(ecc: dict[str, int], total: int, size: int) -> Eccentricity:
    diameter = max(ecc.values())
    radius = min(ecc.values())
    avg = total / (size * (size - 1)) if size > 1 else 0.0
    return Eccentricity(diameter, radius,
                        sum(1 for e in ecc.values() if e == radius),
                        sum(1 for e in ecc.values() if e == diameter),
                        avg)


def largest_component(view: UndirectedView) -> list[str]:
    """Largest connected component of the view.

    Ties on size go to the component with more edges, then to the larger
    eccentricity summary, so the choice never depends on node names unless
    the candidates are indistinguishable by every metric computed on them;
    the smallest node id settles that last case.
    """
    comps = connected_components(view)
    if len(comps) == 1:
        return comps[0]

    def key(comp):
        members = set(comp)
        m = sum(1 for (u, v) in view.weights if u in members)
        return (len(comp), m)

    top = max(key(c) for c in comps)
    tied = [c for c in comps if key(c) == top]
    if len(tied) == 1:
        return tied[0]

    def summary(comp):
        e = _summarise(*_eccentricities(view.adj, comp), len(comp))
        return (e.diameter, e.radius, e.center_number, e.periphery_number, e.avg_shortest_path)

    best = max(summary(c) for c in tied)
    return min((c for c in tied if summary(c) == best), key=lambda c: c[0])


def eccentricity_family(view: UndirectedView) -> Eccentricity:
    if view.n_nodes == 0:
        raise UndefinedMetricError("eccentricity of an empty graph")
    comp = largest_component(view)
    ecc, total = _eccentricities(view.adj, comp)
    return _summarise(ecc, total, len(comp))
