"""Component, connectivity and clique metrics."""

from __future__ import annotations

from collections import deque
from fractions import Fraction

from ..callgraph import CallGraph, UndirectedView
from ..exceptions import UndefinedMetricError

#: Largest graph for which the clique search runs; it never approximates.
CLIQUE_EXACT_MAX_NODES = 500


def connected_components(view: UndirectedView) -> list[list[str]]:
    """Components of the view, each sorted, in order of their smallest node."""
    seen: set[str] = set()
    comps = []
    for start in view.nodes:
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in view.adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


def strongly_connected_components(g: CallGraph) -> list[list[str]]:
    """Tarjan's algorithm, iterative."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comps: list[list[str]] = []
    counter = 0
    for root in sorted(g.nodes):
        if root in index:
            continue
        work = [(root, iter(sorted(g.successors(root))))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(g.successors(w)))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def attracting_components(g: CallGraph, sccs: list[list[str]] | None = None) -> list[list[str]]:
    """Sink components of the SCC condensation."""
    sccs = sccs if sccs is not None else strongly_connected_components(g)
    owner = {n: i for i, comp in enumerate(sccs) for n in comp}
    leaks = {owner[u] for (u, v) in g.edge_weights if owner[u] != owner[v]}
    return [comp for i, comp in enumerate(sccs) if i not in leaks]


def biconnected_component_count(view: UndirectedView) -> int:
    """Number of blocks (Hopcroft-Tarjan). Bridges count as blocks;
    isolated nodes do not."""
    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    count = 0
    t = 0
    for root in view.nodes:
        if root in disc or not view.adj[root]:
            continue
        disc[root] = low[root] = t
        t += 1
        work = [(root, None, iter(sorted(view.adj[root])))]
        while work:
            v, parent, it = work[-1]
            advanced = False
            for w in it:
                if w == parent:
                    continue
                if w not in disc:
                    disc[w] = low[w] = t
                    t += 1
                    work.append((w, v, iter(sorted(view.adj[w]))))
                    advanced = True
                    break
                low[v] = min(low[v], disc[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
                if low[v] >= disc[u]:
                    count += 1
    return count


def circuit_rank(view: UndirectedView, n_components: int | None = None) -> int:
    if n_components is None:
        n_components = len(connected_components(view))
    return view.n_edges - view.n_nodes + n_components


# ---------------------------------------------------------------------------
# node connectivity

def _local_node_connectivity(view: UndirectedView, s: str, t: str, cutoff: int) -> int:
    """Vertex-disjoint s-t paths via unit-capacity max-flow on the split graph.

    Each node v becomes v_in -> v_out with capacity 1 (infinite for s and t);
    each undirected edge {u, v} becomes u_out -> v_in and v_out -> u_in.
    """
    cap: dict[tuple, dict[tuple, int]] = {}

    def add(a, b, c):
        cap.setdefault(a, {})
        cap.setdefault(b, {})
        cap[a][b] = cap[a].get(b, 0) + c
        cap[b].setdefault(a, 0)

    big = len(view.nodes) + 1
    for v in view.nodes:
        add((v, 0), (v, 1), big if v in (s, t) else 1)
    for (u, v) in view.weights:
        add((u, 1), (v, 0), big)
        add((v, 1), (u, 0), big)

    source, sink = (s, 1), (t, 0)
    flow = 0
    while flow < cutoff:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            a = queue.popleft()
            for b, c in cap[a].items():
                if c > 0 and b not in parent:
                    parent[b] = a
                    queue.append(b)
        if sink not in parent:
            break
        b = sink
        while parent[b] is not None:
            a = parent[b]
            cap[a][b] -= 1
            cap[b][a] += 1
            b = a
        flow += 1
    return flow


def node_connectivity(view: UndirectedView) -> int:
    """Minimum number of nodes whose removal disconnects the view.

    0 for disconnected or single-node views, n-1 for complete graphs.
    Uses the Esfahanian-Hakimi reduction: only pairs involving a
    minimum-degree node v (v with each non-neighbour, and non-adjacent
    pairs of v's neighbours) need a max-flow.
    """
    n = view.n_nodes
    if n <= 1 or len(connected_components(view)) > 1:
        return 0
    if view.n_edges == n * (n - 1) // 2:
        return n - 1
    v = min(view.nodes, key=lambda x: (view.degree(x), x))
    best = view.degree(v)
    for w in view.nodes:
        if w != v and w not in view.adj[v]:
            best = min(best, _local_node_connectivity(view, v, w, best))
    nbrs = sorted(view.adj[v])
    for i, x in enumerate(nbrs):
        for y in nbrs[i + 1:]:
            if y not in view.adj[x]:
                best = min(best, _local_node_connectivity(view, x, y, best))
    return best


# ---------------------------------------------------------------------------
# cliques

def clique_number(view: UndirectedView) -> int:
    """Exact maximum clique size (Bron-Kerbosch with pivoting, plus a size bound)."""
    n = view.n_nodes
    if n == 0:
        raise UndefinedMetricError("clique number of an empty graph")
    if n > CLIQUE_EXACT_MAX_NODES:
        raise UndefinedMetricError(
            f"clique search is exact only up to {CLIQUE_EXACT_MAX_NODES} nodes, got {n}")
    adj = view.adj
    best = 1

    def expand(size: int, cand: set[str], excl: set[str]) -> None:
        nonlocal best
        if not cand and not excl:
            best = max(best, size)
            return
        if size + len(cand) <= best:
            return
        pivot = max(cand | excl, key=lambda u: len(adj[u] & cand))
        for u in sorted(cand - adj[pivot]):
            expand(size + 1, cand & adj[u], excl & adj[u])
            cand = cand - {u}
            excl = excl | {u}
            if size + len(cand) <= best:
                return

    expand(0, set(view.nodes), set())
    return best


def clustering_coefficient(view: UndirectedView) -> Fraction:
    """Mean local clustering; nodes of degree < 2 contribute 0."""
    if view.n_nodes == 0:
        raise UndefinedMetricError("clustering of an empty graph")
    total = Fraction(0)
    for v in view.nodes:
        nbrs = sorted(view.adj[v])
        k = len(nbrs)
        if k < 2:
            continue
        links = sum(1 for i, a in enumerate(nbrs) for b in nbrs[i + 1:] if b in view.adj[a])
        total += Fraction(2 * links, k * (k - 1))
    return total / view.n_nodes


def assortativity(view: UndirectedView) -> Fraction:
    """Degree Pearson correlation over both orientations of every edge.

    Returns 0 when the degree variance over edge endpoints is zero.
    """
    if view.n_edges == 0:
        raise UndefinedMetricError("assortativity is undefined on an edgeless graph")
    m = 2 * view.n_edges
    sx = sxx = sxy = 0
    for (u, v) in view.weights:
        du, dv = view.degree(u), view.degree(v)
        sx += du + dv
        sxx += du * du + dv * dv
        sxy += 2 * du * dv
    var = m * sxx - sx * sx
    if var == 0:
        return Fraction(0)
    return Fraction(m * sxy - sx * sx, var)
