"""Loopless multigraphs with stable integer vertex and edge identities."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class GraphError(ValueError):
    pass


@dataclass
class MultiGraph:
    """Vertices are ``0..n-1``; edge ``i`` is ``edges[i]``.

    Parallel edges are allowed and keep distinct ids. Loops are rejected.
    Treat instances as immutable once built.
    """

    n: int
    edges: list[tuple[int, int]] = field(default_factory=list)
    incidence: list[list[tuple[int, int]]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise GraphError("negative vertex count")
        self.incidence = [[] for _ in range(self.n)]
        edges = self.edges
        self.edges = []
        for u, v in edges:
            self._add(u, v)

    def _add(self, u: int, v: int) -> int:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise GraphError(f"edge ({u}, {v}) references a vertex outside [0, {self.n})")
        if u == v:
            raise GraphError(f"loop at vertex {u}")
        eid = len(self.edges)
        self.edges.append((u, v))
        self.incidence[u].append((eid, v))
        self.incidence[v].append((eid, u))
        return eid

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    def degrees(self) -> list[int]:
        return [len(inc) for inc in self.incidence]

    def max_degree(self) -> int:
        return max((len(inc) for inc in self.incidence), default=0)

    def min_degree(self) -> int:
        return min((len(inc) for inc in self.incidence), default=0)

    def is_regular(self, d: int | None = None) -> bool:
        degs = set(self.degrees())
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return d is None or degs == {d}

    def is_simple(self) -> bool:
        seen = set()
        for u, v in self.edges:
            key = (min(u, v), max(u, v))
            if key in seen:
                return False
            seen.add(key)
        return True

    def other(self, eid: int, v: int) -> int:
        a, b = self.edges[eid]
        return b if a == v else a

    def neighbors(self, v: int) -> set[int]:
        return {w for _, w in self.incidence[v]}

    def edges_between(self, u: int, v: int) -> list[int]:
        return [e for e, w in self.incidence[u] if w == v]

    def edge_index(self) -> dict[tuple[int, int], list[int]]:
        """Map each unordered vertex pair ``(min, max)`` to its edge ids."""
        index: dict[tuple[int, int], list[int]] = {}
        for eid, (u, v) in enumerate(self.edges):
            index.setdefault((min(u, v), max(u, v)), []).append(eid)
        return index

    def edge_subgraph(self, eids: Iterable[int]) -> tuple["MultiGraph", list[int]]:
        """Copy of the spanning subgraph on ``eids``; returns it plus the map to parent ids."""
        parent = sorted(set(eids))
        return MultiGraph(self.n, [self.edges[e] for e in parent]), parent

    def adjacency_sets(self) -> list[set[int]]:
        return [self.neighbors(v) for v in range(self.n)]


def complete_graph(n: int) -> MultiGraph:
    if n < 1:
        raise GraphError("complete_graph needs n >= 1")
    return MultiGraph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def cycle_graph(n: int) -> MultiGraph:
    if n < 3:
        raise GraphError("cycle_graph needs n >= 3")
    return MultiGraph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_minus_perfect_matching(n: int) -> MultiGraph:
    if n < 2 or n % 2:
        raise GraphError("need an even n >= 2")
    return MultiGraph(n, [(u, v) for u in range(n) for v in range(u + 1, n) if not (u % 2 == 0 and v == u + 1)])


def complete_bipartite(a: int, b: int) -> MultiGraph:
    return MultiGraph(a + b, [(u, a + v) for u in range(a) for v in range(b)])


def cycle_cover(n: int) -> list[tuple[int, int]]:
    """Edges of a Hamiltonian cycle on ``0..n-1``: a 2-regular graph spanning all vertices."""
    if n < 3:
        raise GraphError("cycle_cover needs n >= 3")
    return [(i, (i + 1) % n) for i in range(n)]


def random_regular(n: int, d: int, seed: int, max_retries: int = 1000) -> MultiGraph:
    """Simple d-regular graph from the pairing model, rejecting loops and parallel pairs.

    Dense targets (d > n/2) are drawn as the complement of a sparse regular graph,
    since the pairing model's acceptance rate collapses for large d.
    """
    if n < 1 or d < 0 or d >= n:
        raise GraphError(f"need 0 <= d < n, got n={n}, d={d}")
    if (n * d) % 2:
        raise GraphError(f"n*d must be even, got n={n}, d={d}")
    if d > (n - 1) // 2:
        sparse = random_regular(n, n - 1 - d, seed, max_retries)
        adj = sparse.adjacency_sets()
        return MultiGraph(n, [(u, v) for u in range(n) for v in range(u + 1, n) if v not in adj[u]])
    rng = random.Random(seed)
    for _ in range(max_retries):
        edges = _pairing_attempt(n, d, rng)
        if edges is not None:
            return MultiGraph(n, sorted(edges))
    raise GraphError(f"pairing model failed {max_retries} times for n={n}, d={d}")


def _pairing_attempt(n: int, d: int, rng: random.Random) -> list[tuple[int, int]] | None:
    # Steger-Wormald style: pair random stubs, restart only when stuck.
    stubs = [v for v in range(n) for _ in range(d)]
    edges: set[tuple[int, int]] = set()
    while stubs:
        rng.shuffle(stubs)
        leftover = []
        for i in range(0, len(stubs), 2):
            u, v = stubs[i], stubs[i + 1]
            key = (min(u, v), max(u, v))
            if u == v or key in edges:
                leftover.extend((u, v))
            else:
                edges.add(key)
        if len(leftover) == len(stubs):
            if not _can_finish(leftover, edges):
                return None
        stubs = leftover
    return list(edges)


def _can_finish(stubs: Sequence[int], edges: set[tuple[int, int]]) -> bool:
    pts = sorted(set(stubs))
    for i, u in enumerate(pts):
        for v in pts[i + 1:]:
            if (u, v) not in edges:
                return True
    return False


def union_with(base: MultiGraph, extra_edges: Iterable[tuple[int, int]]) -> MultiGraph:
    """Base graph plus ``extra_edges`` appended with fresh ids; parallels kept."""
    return MultiGraph(base.n, list(base.edges) + [tuple(e) for e in extra_edges])


def canonical_order(g: MultiGraph) -> list[int]:
    return sorted(range(g.m), key=lambda e: (min(g.edges[e]), max(g.edges[e]), e))


def write_graph(g: MultiGraph) -> str:
    lines = [f"{g.n} {g.m}"]
    for e in canonical_order(g):
        u, v = g.edges[e]
        lines.append(f"{min(u, v)} {max(u, v)}")
    return "\n".join(lines) + "\n"


def read_graph(text: str) -> MultiGraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise GraphError("empty graph text")
    try:
        n, m = (int(x) for x in rows[0])
    except ValueError as exc:
        raise GraphError(f"malformed header {' '.join(rows[0])!r}") from exc
    if len(rows) - 1 != m:
        raise GraphError(f"header says {m} edges, found {len(rows) - 1}")
    edges = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise GraphError(f"line {lineno}: expected 'u v'")
        try:
            u, v = int(row[0]), int(row[1])
        except ValueError as exc:
            raise GraphError(f"line {lineno}: non-integer vertex") from exc
        edges.append((u, v))
    return MultiGraph(n, edges)
