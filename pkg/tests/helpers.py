"""Small graph builders shared by the tests."""

from famgraph import CallGraph, to_undirected


def graph(edges, nodes=()):
    """Raw-mode CallGraph from (u, v) or (u, v, w) tuples."""
    return CallGraph([(e[0], e[1], e[2] if len(e) > 2 else 1) for e in edges], nodes=nodes)


def view(edges, nodes=()):
    return to_undirected(graph(edges, nodes))


def path(n):
    return [(str(i), str(i + 1)) for i in range(n - 1)]


def cycle(n):
    return [(str(i), str((i + 1) % n)) for i in range(n)]


def complete(n):
    return [(str(i), str(j)) for i in range(n) for j in range(i + 1, n)]


def star(leaves):
    return [("c", f"l{i}") for i in range(leaves)]
