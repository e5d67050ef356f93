import random

import pytest

from vdsd.graph import MultiGraph


def random_simple_graph(n: int, p: float, seed: int) -> MultiGraph:
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return MultiGraph(n, edges)


def random_bipartite_regular(side: int, r: int, seed: int) -> MultiGraph:
    """Union of r random perfect matchings between {0..side-1} and {side..2side-1}."""
    rng = random.Random(seed)
    edges = []
    for _ in range(r):
        perm = list(range(side))
        rng.shuffle(perm)
        edges += [(i, side + perm[i]) for i in range(side)]
    return MultiGraph(2 * side, edges)


@pytest.fixture
def rng():
    return random.Random(12345)


def random_precoloring(graph: MultiGraph, c: int, m: int, k: int, seed: int, density: float = 0.5):
    """Random edge set Q with Delta(Q) <= c and a proper coloring of Q from [1, k]
    using each color at most m times. Returns (q_edges, precolor)."""
    rng = random.Random(seed)
    qdeg = [0] * graph.n
    used_at: list[set[int]] = [set() for _ in range(graph.n)]
    mult: dict[int, int] = {}
    precolor = {}
    order = list(range(graph.m))
    rng.shuffle(order)
    for e in order:
        if rng.random() > density:
            continue
        u, v = graph.edges[e]
        if qdeg[u] >= c or qdeg[v] >= c:
            continue
        options = [x for x in range(1, k + 1) if mult.get(x, 0) < m and x not in used_at[u] | used_at[v]]
        if not options:
            continue
        col = rng.choice(options)
        precolor[e] = col
        mult[col] = mult.get(col, 0) + 1
        qdeg[u] += 1
        qdeg[v] += 1
        used_at[u].add(col)
        used_at[v].add(col)
    return set(precolor), precolor
