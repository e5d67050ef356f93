"""Multifans and extension of a bounded precoloring to a whole graph.

The extension routine colors greedily, and for each stuck edge ``uv`` works on
the part of the maximal multifan at ``u`` reachable through linear sequences
that avoid precolored edges:

* if some fan vertex shares a missing color with ``u``, shift along its linear
  sequence and color the freed fan edge (progress);
* otherwise pick a color gamma missing at >= 4m fan vertices, and switch one
  (alpha, gamma)-chain from ``u`` or one of those vertices that avoids
  precolored edges; the next pass then makes progress.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .coloring import ColoringError, FrozenEdgeError, PartialColoring, bits, kempe_chain, switch
from .completion import lowest
from .graph import MultiGraph

log = logging.getLogger(__name__)


class ExtensionError(ColoringError):
    pass


@dataclass
class Multifan:
    """``edges[i] = center--vertices[i]``; ``links[i]`` is an earlier index j with
    color(edges[i]) missing at vertices[j] (``links[0] == -1``)."""

    center: int
    edges: list[int]
    vertices: list[int]
    links: list[int]

    def __len__(self) -> int:
        return len(self.edges)

    def prefix(self, p: int) -> "Multifan":
        return Multifan(self.center, self.edges[: p + 1], self.vertices[: p + 1], self.links[: p + 1])

    def linear_sequence_to(self, i: int) -> list[int]:
        seq = [i]
        while seq[-1] != 0:
            seq.append(self.links[seq[-1]])
        return seq[::-1]


def build_maximal_multifan(pc: PartialColoring, e0: int, center: int | None = None) -> Multifan:
    """Breadth-first maximal multifan at ``center`` rooted at uncolored edge ``e0``.

    Vertices are scanned in fan order and, within a vertex, missing colors in
    ascending order, so the result is deterministic.
    """
    if pc.colors[e0]:
        raise ExtensionError(f"edge {e0} is already colored")
    u, v = pc.graph.edges[e0]
    r = u if center is None else center
    if r not in (u, v):
        raise ExtensionError("center must be an endpoint of e0")
    s0 = v if r == u else u
    fan = Multifan(r, [e0], [s0], [-1])
    in_fan = {e0}
    j = 0
    while j < len(fan.vertices):
        for c in bits(pc.missing(fan.vertices[j])):
            e = pc.at[r][c]
            if e >= 0 and e not in in_fan:
                in_fan.add(e)
                fan.edges.append(e)
                fan.vertices.append(pc.graph.other(e, r))
                fan.links.append(j)
        j += 1
    return fan


def is_multifan(pc: PartialColoring, fan: Multifan) -> bool:
    """Independent check of the multifan definition (used to re-validate prefixes)."""
    if not fan.edges or pc.colors[fan.edges[0]]:
        return False
    if len(set(fan.edges)) != len(fan.edges):
        return False
    r = fan.center
    for i, (e, s) in enumerate(zip(fan.edges, fan.vertices)):
        if set(pc.graph.edges[e]) != {r, s}:
            return False
        if i == 0:
            continue
        c = pc.colors[e]
        if not c or not any(pc.missing(fan.vertices[j]) >> c & 1 for j in range(i)):
            return False
    return True


def is_linear_sequence(pc: PartialColoring, fan: Multifan, seq: list[int]) -> bool:
    if not seq or seq[0] != 0:
        return False
    for a, b in zip(seq, seq[1:]):
        c = pc.colors[fan.edges[b]]
        if not c or not pc.missing(fan.vertices[a]) >> c & 1:
            return False
    return len(set(seq)) == len(seq)


def shift(pc: PartialColoring, fan: Multifan, seq: list[int], h: int) -> None:
    """Shift from ``vertices[seq[h]]`` to ``vertices[0]``: e_{l(i-1)} takes the color of e_{l(i)}."""
    if not 1 <= h < len(seq) or not is_linear_sequence(pc, fan, seq[: h + 1]):
        raise ExtensionError("invalid linear sequence for shift")
    new = {fan.edges[seq[i - 1]]: pc.colors[fan.edges[seq[i]]] for i in range(1, h + 1)}
    new[fan.edges[seq[h]]] = 0
    pc.reassign_many(new)


def unshift(pc: PartialColoring, fan: Multifan, seq: list[int], h: int) -> None:
    """Inverse of :func:`shift` with the same arguments."""
    new = {fan.edges[seq[i]]: pc.colors[fan.edges[seq[i - 1]]] for i in range(1, h + 1)}
    new[fan.edges[seq[0]]] = 0
    pc.reassign_many(new)


def restricted_fan(pc: PartialColoring, fan: Multifan, blocked: set[int]) -> Multifan:
    """Sub-multifan of vertices reachable from s0 by linear sequences avoiding ``blocked`` edges.

    Reachability ignores the original fan order; the result is re-ordered by
    discovery so every prefix is again a multifan.
    """
    sub = Multifan(fan.center, [fan.edges[0]], [fan.vertices[0]], [-1])
    taken = {0}
    j = 0
    while j < len(sub.vertices):
        miss = pc.missing(sub.vertices[j])
        for i in range(1, len(fan.edges)):
            if i in taken or fan.edges[i] in blocked:
                continue
            if miss >> pc.colors[fan.edges[i]] & 1:
                taken.add(i)
                sub.edges.append(fan.edges[i])
                sub.vertices.append(fan.vertices[i])
                sub.links.append(j)
        j += 1
    return sub


@dataclass
class ExtensionStats:
    palette: int
    greedy: int = 0
    shift_moves: int = 0
    chain_switches: int = 0
    stuck_edges: int = 0
    max_rounds: int = 0
    switch_counts: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "palette": self.palette,
            "greedy": self.greedy,
            "shift_moves": self.shift_moves,
            "chain_switches": self.chain_switches,
            "stuck_edges": self.stuck_edges,
        }


def extension_palette(graph: MultiGraph, k: int, c: int, m: int) -> int:
    return max(k, graph.max_degree() + 4 * c * m - 1)


def extend_precoloring(
    graph: MultiGraph,
    q_edges,
    precolor: dict[int, int],
    c: int,
    m: int,
    k: int,
    palette: int | None = None,
    allowed: int | None = None,
) -> tuple[PartialColoring, ExtensionStats]:
    """Extend ``precolor`` (on ``q_edges``) to a total proper coloring of ``graph``.

    The palette defaults to ``max(k, Delta + 4cm - 1)``, where progress is
    guaranteed. A smaller ``palette`` may be requested; the routine then raises
    ``ExtensionError`` if it gets stuck. ``allowed`` restricts non-precolored
    edges to a bitset of colors.
    """
    q_edges = set(q_edges)
    if c < 1 or m < 1:
        raise ExtensionError("c and m must be >= 1")
    if set(precolor) != q_edges:
        raise ExtensionError("precolor must cover exactly q_edges")
    qdeg = [0] * graph.n
    mult: dict[int, int] = {}
    for e in q_edges:
        for x in graph.edges[e]:
            qdeg[x] += 1
        mult[precolor[e]] = mult.get(precolor[e], 0) + 1
    if max(qdeg, default=0) > c:
        raise ExtensionError(f"Delta(Q) = {max(qdeg)} exceeds c = {c}")
    if mult and max(mult.values()) > m:
        raise ExtensionError(f"a precolor is used {max(mult.values())} times, more than m = {m}")
    bound = extension_palette(graph, max(k, max(precolor.values(), default=0)), c, m)
    ell = bound if palette is None else palette
    pc = PartialColoring(graph, ell)
    for e in sorted(q_edges):
        try:
            pc.assign(e, precolor[e])
        except ColoringError as exc:
            raise ExtensionError(f"precoloring is not proper at edge {e}") from exc
    pc.frozen = set(q_edges)
    allowed = pc.full if allowed is None else allowed & pc.full
    stats = ExtensionStats(palette=ell)
    for e in range(graph.m):
        if pc.colors[e]:
            continue
        u, v = graph.edges[e]
        common = pc.missing(u) & pc.missing(v) & allowed
        if common:
            pc.assign(e, lowest(common))
            stats.greedy += 1
    for e in range(graph.m):
        if not pc.colors[e]:
            stats.stuck_edges += 1
            _color_stuck_edge(pc, e, m, allowed, stats, round_cap=graph.m + 1)
    return pc, stats


def _color_stuck_edge(pc: PartialColoring, e0: int, m: int, allowed: int, stats: ExtensionStats, round_cap: int) -> None:
    q = pc.frozen
    u, v = pc.graph.edges[e0]
    switches = 0
    tried: set[tuple[int, int, int]] = set()
    for _ in range(round_cap):
        common = pc.missing(u) & pc.missing(v) & allowed
        if common:
            pc.assign(e0, lowest(common))
            stats.switch_counts.append(switches)
            return
        fan = build_maximal_multifan(pc, e0, center=u)
        f1 = restricted_fan(pc, fan, q)
        mu = pc.missing(u) & allowed
        # Shift case: a fan vertex sharing a missing color with u gives immediate progress.
        for i in range(len(f1.edges)):
            shared = mu & pc.missing(f1.vertices[i])
            if shared:
                seq = f1.linear_sequence_to(i)
                if i:
                    shift(pc, f1, seq, len(seq) - 1)
                pc.assign(f1.edges[i], lowest(shared))
                stats.shift_moves += 1
                stats.switch_counts.append(switches)
                return
        # Chain case: some color is missing at >= 4m fan vertices; switch a Q-free chain.
        counts: dict[int, list[int]] = {}
        for w in f1.vertices:
            for g in bits(pc.missing(w) & allowed):
                counts.setdefault(g, []).append(w)
        gammas = [g for g in sorted(counts) if len(counts[g]) >= 4 * m]
        if not gammas or not mu:
            raise ExtensionError(
                f"edge {e0}: no shared missing color and no color missing at {4 * m} fan vertices"
            )
        alpha = lowest(mu)
        progressed = False
        for gamma in gammas:
            ys = counts[gamma][: 4 * m]
            for start in sorted(set([u] + ys)):
                key = (start, alpha, gamma)
                if key in tried:
                    continue
                ch = kempe_chain(pc, start, alpha, gamma)
                if not ch.edges or any(f in q for f in ch.edges):
                    continue
                tried.add(key)
                try:
                    switch(pc, ch)
                except FrozenEdgeError:
                    continue
                switches += 1
                stats.chain_switches += 1
                progressed = True
                break
            if progressed:
                break
        if not progressed:
            raise ExtensionError(f"edge {e0}: every candidate chain touches a precolored edge")
    raise ExtensionError(f"edge {e0}: no progress after {round_cap} rounds")
