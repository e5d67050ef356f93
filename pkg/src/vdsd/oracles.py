"""Exact chromatic indices (proper, vd, sd) for tiny graphs by backtracking."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

from .coloring import from_colors, verify_proper, verify_sd, verify_vd
from .graph import MultiGraph

MODES = ("proper", "vd", "sd")


class OracleError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class OracleResult:
    mode: str
    value: int | None
    witness: list[int] | None = None
    nodes_explored: int = 0
    lower: int = 0
    upper: int | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "nodes_explored": self.nodes_explored,
            "witness": self.witness,
            "notes": self.notes,
        }


def pi_lower_bound(graph: MultiGraph) -> int:
    """min k with C(k, d) >= n_d for every degree d present."""
    degs = graph.degrees()
    if not degs or min(degs) < 1:
        raise OracleError("pi_lower_bound needs every vertex to have degree >= 1")
    counts: dict[int, int] = {}
    for d in degs:
        counts[d] = counts.get(d, 0) + 1
    k = max(counts)
    while any(comb(k, d) < nd for d, nd in counts.items()):
        k += 1
    return k


def _edge_order(graph: MultiGraph) -> tuple[list[int], int]:
    """Edges grouped so that vertices saturate one after another; first group is a max-degree vertex."""
    n = graph.n
    start = max(range(n), key=lambda v: (graph.degree(v), -v))
    order = [start]
    placed = {start}
    while len(order) < n:
        nxt = max(
            (v for v in range(n) if v not in placed),
            key=lambda v: (sum(1 for _, w in graph.incidence[v] if w in placed), graph.degree(v), -v),
        )
        order.append(nxt)
        placed.add(nxt)
    pos = {v: i for i, v in enumerate(order)}
    eids = sorted(range(graph.m), key=lambda e: (min(pos[x] for x in graph.edges[e]),
                                                   max(pos[x] for x in graph.edges[e]), e))
    return eids, start


class _Search:
    def __init__(self, graph: MultiGraph, k: int, mode: str, budget: int, nodes: int, symmetry: bool):
        self.g = graph
        self.k = k
        self.mode = mode
        self.budget = budget
        self.nodes = nodes
        self.order, self.root = _edge_order(graph)
        self.colors = [0] * graph.m
        self.present = [0] * graph.n
        self.sums = [0] * graph.n
        self.left = graph.degrees()
        self.final: dict[int, int] = {}
        self.forced: dict[int, int] = {}
        if symmetry:
            root_edges = [e for e in self.order if self.root in graph.edges[e]]
            self.forced = {e: i + 1 for i, e in enumerate(root_edges)}

    def key(self, v: int) -> int:
        return self.present[v] if self.mode == "vd" else self.sums[v]

    def run(self) -> list[int] | None:
        return list(self.colors) if self._rec(0) else None

    def _rec(self, i: int) -> bool:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded
        if i == len(self.order):
            return True
        e = self.order[i]
        u, v = self.g.edges[e]
        free = ~(self.present[u] | self.present[v])
        cands = [self.forced[e]] if e in self.forced else range(1, self.k + 1)
        for c in cands:
            if not free >> c & 1:
                continue
            self._set(e, u, v, c)
            ok = True
            saturated = []
            if self.mode != "proper":
                for x in (u, v):
                    if self.left[x] == 0:
                        kx = self.key(x)
                        if kx in self.final:
                            ok = False
                            break
                        self.final[kx] = x
                        saturated.append(kx)
            if ok and self._rec(i + 1):
                return True
            for kx in saturated:
                del self.final[kx]
            self._unset(e, u, v, c)
        return False

    def _set(self, e, u, v, c):
        self.colors[e] = c
        bit = 1 << c
        for x in (u, v):
            self.present[x] |= bit
            self.sums[x] += c
            self.left[x] -= 1

    def _unset(self, e, u, v, c):
        self.colors[e] = 0
        bit = 1 << c
        for x in (u, v):
            self.present[x] &= ~bit
            self.sums[x] -= c
            self.left[x] += 1


def colorable(graph: MultiGraph, k: int, mode: str, budget: int = 10**9) -> tuple[list[int] | None, int]:
    """A proper k-edge-coloring with the mode's property, or None; plus nodes explored."""
    if mode not in MODES:
        raise OracleError(f"unknown mode {mode!r}")
    # color permutations preserve properness and vertex sets, not sums
    s = _Search(graph, k, mode, budget, 0, symmetry=mode in ("proper", "vd"))
    return s.run(), s.nodes


def exact_index(graph: MultiGraph, mode: str = "vd", budget: int = 10**9) -> OracleResult:
    """Minimum k by iterative deepening; on budget exhaustion ``value`` is None and ``lower`` is certified."""
    if mode not in MODES:
        raise OracleError(f"unknown mode {mode!r}")
    if graph.m == 0:
        return OracleResult(mode, 0, [], 0, 0, 0)
    if mode == "proper":
        lower = graph.max_degree()
    else:
        lower = pi_lower_bound(graph)
    res = OracleResult(mode, None, lower=lower)
    if mode == "sd":
        # every sd coloring is vd, so the vd index is a certified lower bound
        vd = exact_index(graph, "vd", budget)
        res.nodes_explored += vd.nodes_explored
        if vd.value is None:
            res.lower = max(lower, vd.lower)
            res.notes.append("vd search exhausted the budget")
            return res
        if vd.value > lower:
            res.notes.append(f"lower bound raised from pi={lower} to the vd index {vd.value}")
        res.lower = lower = max(lower, vd.value)
    k = lower
    while True:
        try:
            wit, nodes = colorable(graph, k, mode, budget - res.nodes_explored)
        except BudgetExceeded:
            res.nodes_explored = budget
            res.lower = k
            return res
        res.nodes_explored += nodes
        if wit is not None:
            res.value = res.upper = k
            res.witness = wit
            res.lower = k
            _check_witness(graph, wit, k, mode)
            return res
        k += 1
        if k > graph.m + 1:
            raise OracleError("internal: no coloring even with one color per edge")


def _check_witness(graph: MultiGraph, colors: list[int], k: int, mode: str) -> None:
    pc = from_colors(graph, colors, k=k)
    ok = verify_proper(pc) and (mode == "proper" or (verify_vd(pc) if mode == "vd" else verify_sd(pc)))
    if not ok:
        raise OracleError("internal: witness failed verification")


def brute_force_colorable(graph: MultiGraph, k: int, mode: str) -> list[int] | None:
    """Plain enumeration of every k-coloring of the edges (no pruning); for cross-checks only."""
    for colors in itertools.product(range(1, k + 1), repeat=graph.m):
        seen = set()
        bad = False
        for (u, v), c in zip(graph.edges, colors):
            if (u, c) in seen or (v, c) in seen:
                bad = True
                break
            seen.add((u, c))
            seen.add((v, c))
        if bad:
            continue
        sets = [set() for _ in range(graph.n)]
        for (u, v), c in zip(graph.edges, colors):
            sets[u].add(c)
            sets[v].add(c)
        if mode == "vd":
            keys = [frozenset(s) for s in sets]
        elif mode == "sd":
            keys = [sum(s) for s in sets]
        else:
            return list(colors)
        if len(set(keys)) == len(keys):
            return list(colors)
    return None
