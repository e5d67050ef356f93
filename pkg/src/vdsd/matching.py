"""Bipartite matching and König edge coloring.

Maximum matchings come from networkx's Hopcroft-Karp; the Hall violator is
read off the alternating-reachability set of an unmatched vertex.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import networkx as nx
from networkx.algorithms import bipartite

from .coloring import ColoringError, PartialColoring, bits, kempe_chain, switch
from .graph import MultiGraph


class MatchingError(ValueError):
    pass


@dataclass
class HallResult:
    """Either ``matching`` (left -> right) is perfect, or ``violator`` is a left
    subset with ``len(neighborhood) < len(violator)``."""

    matching: dict[int, int] | None
    violator: list[int] = field(default_factory=list)
    neighborhood: list[int] = field(default_factory=list)

    @property
    def perfect(self) -> bool:
        return self.matching is not None


def hall_matching(left, right, edges) -> HallResult:
    """Perfect matching between ``left`` and ``right`` using ``edges`` (pairs (l, r)).

    Raises ``MatchingError`` on unbalanced sides or edges leaving the sides.
    """
    left = sorted(set(left))
    right = sorted(set(right))
    if len(left) != len(right):
        raise MatchingError(f"unbalanced sides: {len(left)} vs {len(right)}")
    lset, rset = set(left), set(right)
    if lset & rset:
        raise MatchingError("sides overlap")
    adj: dict[int, set[int]] = {x: set() for x in left}
    for a, b in edges:
        if a in lset and b in rset:
            adj[a].add(b)
        elif b in lset and a in rset:
            adj[b].add(a)
        else:
            raise MatchingError(f"edge ({a},{b}) is not between the sides")
    if not left:
        return HallResult({})
    g = nx.Graph()
    g.add_nodes_from(("L", x) for x in left)
    g.add_nodes_from(("R", y) for y in right)
    g.add_edges_from((("L", x), ("R", y)) for x in left for y in sorted(adj[x]))
    raw = bipartite.hopcroft_karp_matching(g, top_nodes=[("L", x) for x in left])
    match = {x: raw[("L", x)][1] for x in left if ("L", x) in raw}
    if len(match) == len(left):
        return HallResult(match)
    # alternating BFS from one free left vertex
    back = {y: x for x, y in match.items()}
    root = next(x for x in left if x not in match)
    seen_l, seen_r = {root}, set()
    todo = deque([root])
    while todo:
        x = todo.popleft()
        for y in adj[x]:
            if y in seen_r:
                continue
            seen_r.add(y)
            z = back.get(y)
            if z is None:
                raise MatchingError("internal: augmenting path left by a maximum matching")
            if z not in seen_l:
                seen_l.add(z)
                todo.append(z)
    return HallResult(None, sorted(seen_l), sorted(seen_r))


def check_hall_certificate(res: HallResult, left, right, edges) -> bool:
    """Independent check of either outcome of :func:`hall_matching`."""
    lset, rset = set(left), set(right)
    pairs = {(a, b) for a, b in edges} | {(b, a) for a, b in edges}
    if res.perfect:
        m = res.matching
        return (
            set(m) == lset
            and set(m.values()) == rset
            and all((x, y) in pairs for x, y in m.items())
        )
    s = set(res.violator)
    if not s or not s <= lset:
        return False
    nbrs = {b for a, b in pairs if a in s and b in rset}
    return nbrs == set(res.neighborhood) and len(nbrs) < len(s)


def two_color(graph: MultiGraph) -> list[int]:
    """Side (0/1) of each vertex; raises ``MatchingError`` on an odd cycle."""
    side = [-1] * graph.n
    for s in range(graph.n):
        if side[s] >= 0:
            continue
        side[s] = 0
        todo = deque([s])
        while todo:
            x = todo.popleft()
            for _, y in graph.incidence[x]:
                if side[y] < 0:
                    side[y] = 1 - side[x]
                    todo.append(y)
                elif side[y] == side[x]:
                    raise MatchingError("graph is not bipartite (odd cycle)")
    return side


def konig_color(graph: MultiGraph, colors: list[int] | None = None, side: list[int] | None = None) -> PartialColoring:
    """Proper edge coloring of a bipartite multigraph with exactly Delta colors.

    ``colors`` (default ``1..Delta``) names the colors to use. Regular inputs are
    peeled one perfect matching at a time; others go through the alternating
    path method, which never needs more than Delta colors on a bipartite graph.
    """
    side = two_color(graph) if side is None else side
    delta = graph.max_degree()
    colors = list(range(1, delta + 1)) if colors is None else list(colors)
    if len(colors) < delta:
        raise MatchingError(f"need {delta} colors, got {len(colors)}")
    colors = colors[:delta]
    k = max(colors, default=0)
    pc = PartialColoring(graph, k)
    if graph.m == 0:
        return pc
    if graph.is_regular(delta):
        _peel_matchings(graph, pc, colors, side)
    else:
        _alternating_paths(graph, pc, colors)
    return pc


def _peel_matchings(graph: MultiGraph, pc: PartialColoring, colors: list[int], side: list[int]) -> None:
    left = [v for v in range(graph.n) if side[v] == 0]
    right = [v for v in range(graph.n) if side[v] == 1]
    for c in colors:
        live = [e for e in range(graph.m) if not pc.colors[e]]
        pairs = {}
        for e in live:
            u, v = graph.edges[e]
            a, b = (u, v) if side[u] == 0 else (v, u)
            pairs.setdefault((a, b), e)
        res = hall_matching(left, right, list(pairs))
        if not res.perfect:
            raise MatchingError("regular bipartite remainder without a perfect matching")
        for a, b in res.matching.items():
            pc.assign(pairs[(a, b)], c)


def _alternating_paths(graph: MultiGraph, pc: PartialColoring, colors: list[int]) -> None:
    allowed = 0
    for c in colors:
        allowed |= 1 << c
    for e in range(graph.m):
        u, v = graph.edges[e]
        mu = pc.missing(u) & allowed
        mv = pc.missing(v) & allowed
        common = mu & mv
        if common:
            pc.assign(e, bits(common)[0])
            continue
        a, b = bits(mu)[0], bits(mv)[0]
        # the (a,b)-chain from v cannot reach u in a bipartite graph
        ch = kempe_chain(pc, v, a, b)
        if u in ch.vertices:
            raise ColoringError("odd cycle met while coloring a bipartite graph")
        switch(pc, ch)
        pc.assign(e, a)
