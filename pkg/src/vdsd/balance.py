"""Equitable edge colorings and missing-count balancing with frozen edges."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .coloring import (
    ColoringError,
    PartialColoring,
    class_sizes,
    kempe_chain,
    missing_spread,
    switch,
    verify_proper,
)
from .completion import CompletionError, greedy_fill, kempe_complete, misra_gries
from .graph import MultiGraph


class BalanceError(ColoringError):
    pass


@dataclass
class BalanceReport:
    spread: int
    switches: int = 0
    g_history: list[tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"spread": self.spread, "switches": self.switches, "g_history": [list(x) for x in self.g_history]}


def _proper_coloring(graph: MultiGraph, k: int, seed: int = 0) -> PartialColoring:
    delta = graph.max_degree()
    if graph.is_simple() and k >= delta + 1:
        pc = misra_gries(graph)
        pc.grow_palette(k)
        return pc
    pc = PartialColoring(graph, k)
    greedy_fill(pc)
    try:
        kempe_complete(pc, rng=random.Random(seed), max_steps=50 * graph.m + 10_000)
    except CompletionError as exc:
        raise BalanceError(f"no proper {k}-edge-coloring found (k may be below the chromatic index)") from exc
    return pc


def equalize_classes(pc: PartialColoring) -> int:
    """Kempe changes between the largest and smallest class until sizes differ by <= 1.

    Each change flips a path component with one more edge of the larger color,
    which always exists while the gap is >= 2. Frozen edges are not allowed here.
    """
    switches = 0
    while True:
        sizes = class_sizes(pc)
        big = max(sizes, key=lambda c: (sizes[c], -c))
        small = min(sizes, key=lambda c: (sizes[c], c))
        if sizes[big] - sizes[small] <= 1:
            return switches
        for e in pc.color_class(big):
            u, _ = pc.graph.edges[e]
            ch = kempe_chain(pc, u, big, small)
            if ch.kind != "path":
                continue
            nbig = sum(1 for f in ch.edges if pc.colors[f] == big)
            if nbig == len(ch.edges) - nbig + 1:
                switch(pc, ch)
                switches += 1
                break
        else:
            raise BalanceError("no unbalanced path component between largest and smallest class")


def equitable_edge_coloring(graph: MultiGraph, k: int, seed: int = 0) -> PartialColoring:
    """Total proper k-coloring whose class sizes are floor(|E|/k) or ceil(|E|/k)."""
    if k < 1 and graph.m:
        raise BalanceError("k must be >= 1 for a graph with edges")
    pc = _proper_coloring(graph, k, seed)
    equalize_classes(pc)
    return pc


def _potential(counts: dict[int, int], threshold: int) -> tuple[int, int]:
    vals = sorted(counts.values())
    g = vals[-1] - vals[0] if vals else 0
    if g < threshold:
        return g, 0
    # number of unordered pairs at the maximum gap
    hi = sum(1 for x in vals if x == vals[-1])
    lo = sum(1 for x in vals if x == vals[0])
    return g, hi * lo


def balance_missing(
    graph: MultiGraph,
    initial: PartialColoring,
    frozen: set[int],
    m: int,
    check_every: int = 64,
    colors=None,
) -> tuple[PartialColoring, BalanceReport]:
    """Kempe-switch a total coloring until every pair of colors has missing counts within 4m+1.

    For m=0 the bound 1 is met only when k divides |E| (all counts have the
    parity of n); otherwise the result has spread 2, which is optimal.

    Frozen edges keep their colors. While some pair (alpha, beta) has gap >= 4m+2,
    a path chain joining two alpha-missing vertices and avoiding frozen edges is
    switched; the (max gap, #pairs at max gap) potential drops each time.
    ``colors`` limits the balanced palette (default: all of ``1..k``).
    """
    if not initial.is_total():
        raise BalanceError("balance_missing needs a total coloring")
    palette = list(range(1, initial.k + 1)) if colors is None else sorted(colors)
    mult: dict[int, int] = {}
    for e in frozen:
        c = initial.colors[e]
        mult[c] = mult.get(c, 0) + 1
    if mult and max(mult.values()) > m:
        raise BalanceError(f"a color appears on {max(mult.values())} frozen edges, more than m={m}")
    pc = initial.copy()
    pc.frozen = set(frozen)
    report = BalanceReport(spread=0)
    if not frozen and colors is None:
        # all counts share the parity of n, so equal class sizes is the best possible
        report.switches = equalize_classes(pc)
        report.spread = missing_spread(pc)
        return pc, report
    # a swap at gap exactly 2 only exchanges the two counts, so never stop the loop above 2
    threshold = max(4 * m + 2, 3)
    counts = {c: pc.missing_count(c) for c in palette}
    pot = _potential(counts, threshold)
    report.g_history.append(pot)
    while len(palette) >= 2 and pot[0] >= threshold:
        top = max(counts.values())
        bot = min(counts.values())
        alpha = min(c for c in counts if counts[c] == top)
        beta = min(c for c in counts if counts[c] == bot)
        chain = _find_pair_chain(pc, alpha, beta)
        if chain is None:
            raise BalanceError(f"no frozen-free ({alpha},{beta})-path between two {alpha}-missing vertices")
        switch(pc, chain)
        report.switches += 1
        counts[alpha] -= 2
        counts[beta] += 2
        new = _potential(counts, threshold)
        if not new < pot:
            raise BalanceError(f"potential did not decrease: {pot} -> {new}")
        pot = new
        report.g_history.append(pot)
        if report.switches % check_every == 0 and not verify_proper(pc):
            raise BalanceError("coloring became improper")
    if not verify_proper(pc):
        raise BalanceError("coloring became improper")
    report.spread = max(counts.values()) - min(counts.values()) if counts else 0
    return pc, report


def _find_pair_chain(pc: PartialColoring, alpha: int, beta: int):
    abit, bbit = 1 << alpha, 1 << beta
    for x in range(pc.graph.n):
        p = pc.present[x]
        if p & abit or not p & bbit:
            continue
        ch = kempe_chain(pc, x, alpha, beta)
        y = ch.endpoints[-1] if ch.endpoints[0] == x else ch.endpoints[0]
        if y <= x or pc.present[y] & abit:
            continue
        if any(e in pc.frozen for e in ch.edges):
            continue
        return ch
    return None
