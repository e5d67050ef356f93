"""Precolored subgraph Q for both constructions.

vd: Q is a 2-regular graph of triangles (plus one 4- or 5-cycle) added on top of
G; triangle i is colored with block i of the (9,12,4,3,1) design family, so
every vertex of Q sees a different pair of colors.

sd: Q is a spanning star forest inside G (K_{1,2}'s plus one K_{1,3} or
subdivided K_{1,3}), found through an equitable coloring of the complement.
Its fixed colors, and the final recoloring with the two reserved colors C0,
make every vertex sum different.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .graph import GraphError, MultiGraph


class DesignError(ValueError):
    pass


# -- block design ----------------------------------------------------

_BLOCK_OFFSETS = [
    (8, 7, 6), (5, 4, 3), (2, 1, 0), (8, 5, 2),
    (7, 4, 1), (6, 3, 0), (8, 4, 0), (7, 3, 2),
    (6, 5, 1), (8, 3, 1), (7, 5, 0), (6, 4, 2),
]


def bibd_blocks(j: int) -> list[tuple[int, int, int]]:
    """The twelve blocks on points 9j-8..9j; block b is ``{9j - o for o in offsets[b]}``."""
    if j < 1:
        raise DesignError("j must be >= 1")
    return [tuple(9 * j - o for o in offs) for offs in _BLOCK_OFFSETS]


def vd_block_budget(n: int) -> tuple[int, int]:
    """(c, t): smallest c >= 10 with floor(n/4) + c divisible by 3, and t = (floor(n/4) + c) / 3."""
    base = n // 4
    c = 10
    while (base + c) % 3:
        c += 1
    return c, (base + c) // 3


def block_sequence(count: int) -> list[tuple[int, int, int]]:
    out: list[tuple[int, int, int]] = []
    j = 1
    while len(out) < count:
        out.extend(bibd_blocks(j))
        j += 1
    return out[:count]


# -- plan ------------------------------------------------------------

@dataclass
class QStructure:
    n: int
    cycles: list[list[int]]

    @property
    def edges(self) -> list[tuple[int, int]]:
        out = []
        for cyc in self.cycles:
            for i, a in enumerate(cyc):
                out.append((a, cyc[(i + 1) % len(cyc)]))
        return out

    @property
    def q(self) -> int:
        return self.n // 3

    @property
    def r(self) -> int:
        return self.n % 3


@dataclass
class PrecolorPlan:
    mode: str
    n: int
    d: int
    q: int
    r: int
    q_pairs: list[tuple[int, int]]
    q_colors: list[int]
    q_eids: list[int] = field(default_factory=list)
    q_roles: list[tuple[str, int]] = field(default_factory=list)
    labels: dict[str, list[int]] = field(default_factory=dict)
    C0: list[int] = field(default_factory=list)
    C1: list[int] = field(default_factory=list)
    reused_block_colors: bool = False

    @property
    def phi0(self) -> dict[int, int]:
        if len(self.q_eids) != len(self.q_pairs):
            raise DesignError("plan is not attached to graph edge ids")
        return dict(zip(self.q_eids, self.q_colors))

    def attach(self, eids: list[int]) -> None:
        if len(eids) != len(self.q_pairs):
            raise DesignError("edge id count mismatch")
        self.q_eids = list(eids)

    def vertex_label(self) -> dict[int, tuple[str, int]]:
        out = {}
        for name, verts in self.labels.items():
            for i, v in enumerate(verts, start=1):
                if v >= 0:
                    out[v] = (name, i)
        return out

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n": self.n,
            "d": self.d,
            "q": self.q,
            "r": self.r,
            "q_edges": [
                {"eid": e, "u": a, "v": b, "color": c, "role": list(role) if role else None}
                for e, (a, b), c, role in zip(
                    self.q_eids or [None] * len(self.q_pairs),
                    self.q_pairs,
                    self.q_colors,
                    self.q_roles or [None] * len(self.q_pairs),
                )
            ],
            "labels": self.labels,
            "C0": self.C0,
            "C1": self.C1,
        }


# -- vd --------------------------------------------------------------

def build_Q_vd(n: int) -> QStructure:
    if n < 6 or n % 2:
        raise DesignError(f"build_Q_vd needs an even n >= 6, got {n}")
    q, r = divmod(n, 3)
    tri = q if r == 0 else q - 1
    cycles = [[3 * i, 3 * i + 1, 3 * i + 2] for i in range(tri)]
    if r:
        cycles.append(list(range(3 * tri, n)))
    return QStructure(n, cycles)


def precolor_vd(structure: QStructure, d: int) -> PrecolorPlan:
    n = structure.n
    triangles = [c for c in structure.cycles if len(c) == 3]
    rest = [c for c in structure.cycles if len(c) != 3]
    _, t = vd_block_budget(n)
    available = 12 * (t // 3)
    if available < len(triangles):
        raise DesignError(f"only {available} blocks for {len(triangles)} triangles")
    blocks = block_sequence(len(triangles))
    pairs: list[tuple[int, int]] = []
    colors: list[int] = []
    for cyc, (p1, p2, p3) in zip(triangles, blocks):
        a, b, c = cyc
        pairs += [(a, b), (b, c), (c, a)]
        colors += [p1, p2, p3]
    used = {x for blk in blocks for x in blk}
    top = d + 2
    if used and max(used) > top:
        raise DesignError(f"block colors reach {max(used)} > d+2 = {top}")
    reused = False
    for cyc in rest:
        fresh = [x for x in range(1, top + 1) if x not in used][: len(cyc)]
        if len(fresh) < len(cyc):
            fresh = _remainder_colors(len(cyc), top, pairs, colors)
            reused = True
        used.update(fresh)
        for i, a in enumerate(cyc):
            pairs.append((a, cyc[(i + 1) % len(cyc)]))
            colors.append(fresh[i])
    plan = PrecolorPlan("vd", n, d, n // 3, n % 3, pairs, colors)
    plan.reused_block_colors = reused
    plan.C1 = sorted(set(colors))
    plan.labels = {"cycle_start": [c[0] for c in structure.cycles]}
    return plan


def _remainder_colors(length: int, top: int, pairs, colors, max_mult: int = 4) -> list[int]:
    """Proper coloring of a remainder cycle from [1, top] that keeps every Q vertex pair distinct.

    Used only when there are not enough unused colors; unused colors are tried first.
    """
    seen: dict[int, set[int]] = {}
    mult: dict[int, int] = {}
    for (a, b), c in zip(pairs, colors):
        seen.setdefault(a, set()).add(c)
        seen.setdefault(b, set()).add(c)
        mult[c] = mult.get(c, 0) + 1
    taken = {frozenset(s) for s in seen.values()}
    order = sorted(range(1, top + 1), key=lambda c: (mult.get(c, 0), c))
    out: list[int] = []

    def ok_pair(x: int, y: int, extra: set) -> bool:
        p = frozenset((x, y))
        return x != y and p not in taken and p not in extra

    def rec(extra: set) -> bool:
        i = len(out)
        if i == length:
            return ok_pair(out[-1], out[0], extra)
        for c in order:
            if mult.get(c, 0) >= max_mult:
                continue
            if i and not ok_pair(out[-1], c, extra):
                continue
            out.append(c)
            mult[c] = mult.get(c, 0) + 1
            added = {frozenset((out[-2], c))} if i else set()
            if rec(extra | added):
                return True
            mult[c] -= 1
            out.pop()
        return False

    if not rec(set()):
        raise DesignError("palette [1, d+2] exhausted for the remainder cycle")
    return out


def q_vertex_sets(plan: PrecolorPlan) -> dict[int, frozenset[int]]:
    seen: dict[int, set[int]] = {}
    for (a, b), c in zip(plan.q_pairs, plan.q_colors):
        seen.setdefault(a, set()).add(c)
        seen.setdefault(b, set()).add(c)
    return {v: frozenset(s) for v, s in seen.items()}


# -- sd: closed-form tables -----------------------------------------

def sd_C0(q: int, r: int) -> list[int]:
    if q % 2:
        return [2, 2 * q + 2]
    if r in (0, 1):
        return [2, 2 * q]
    return [2, 2 * q + 4]


def sd_C1(q: int, r: int) -> list[int]:
    base = [2 * i + 1 for i in range(q + 1)]
    if r == 2:
        base.append(2 * q - 2 if q % 2 else 2 * q)
    return sorted(set(base))


def _check_qr(q: int, r: int) -> None:
    if r not in (0, 1, 2):
        raise DesignError("r must be 0, 1 or 2")
    if q < 2:
        raise DesignError("need q >= 2")


def sd_phi0_roles(q: int, r: int) -> dict[tuple[str, int], int]:
    """Initial colors of Q's edges keyed by role ('vu', i), ('vx', i), ('vy', q), ('yz', q)."""
    _check_qr(q, r)
    out = {}
    for i in range(1, q + 1):
        out[("vu", i)] = 2 * i - 1
        out[("vx", i)] = 2 * i + 1
    if r == 1:
        out[("vy", q)] = 1
    elif r == 2:
        out[("vy", q)] = 2 * q - 2 if q % 2 else 2 * q
        out[("yz", q)] = 2 * q + 1
    return out


def sd_phi0_prime_roles(q: int, r: int) -> dict[tuple[str, int], int]:
    """Final colors of Q's edges after the last recoloring step."""
    _check_qr(q, r)
    out = {}
    if r in (0, 1):
        top = 2 * q + 2 if q % 2 else 2 * q
        for i in range(1, q + 1):
            out[("vu", i)] = top
            out[("vx", i)] = 2
        if r == 1:
            out[("vy", q)] = 1
        return out
    top = 2 * q + 2 if q % 2 else 2 * q + 4
    for i in range(1, q):
        out[("vu", i)] = top
        out[("vx", i)] = 2
    out[("vu", q)] = 2 * q - 1
    out[("vx", q)] = 2
    out[("vy", q)] = 2 * q + 1
    out[("yz", q)] = top
    return out


def expected_sums(q: int, r: int, d: int | None = None, s: int | None = None) -> dict[tuple[str, int], int]:
    """Closed-form vertex sums after the final recoloring, keyed by label (name, index)."""
    _check_qr(q, r)
    if s is None:
        if d is None:
            raise DesignError("need s or d")
        c0 = set(sd_C0(q, r))
        s = sum(i for i in range(1, d + 3) if i not in c0)
    out: dict[tuple[str, int], int] = {}
    odd = q % 2 == 1
    if r in (0, 1):
        off_v, off_u = (4, 3) if odd else (2, 1)
        for i in range(1, q + 1):
            out[("v", i)] = s + 2 * q + off_v - 4 * i
            out[("u", i)] = s + 2 * q + off_u - 2 * i
            out[("x", i)] = s + 1 - 2 * i
        if r == 1:
            out[("y", q)] = s
        return out
    off_v, off_u = (4, 3) if odd else (6, 5)
    for i in range(1, q):
        out[("v", i)] = s + 2 * q + off_v - 4 * i
        out[("u", i)] = s + 2 * q + off_u - 2 * i
        out[("x", i)] = s + 1 - 2 * i
    out[("v", q)] = s + (4 if odd else 2) - 2 * q
    out[("u", q)] = s
    out[("x", q)] = s + 1 - 2 * q
    out[("y", q)] = s + 4
    out[("z", q)] = s + 1 if odd else s + 3
    return out


# -- sd: finding Q inside G ----------------------------------------

def equitable_vertex_coloring(
    adj: list[set[int]], sizes: list[int], seed: int = 0, max_steps: int = 200_000
) -> list[list[int]]:
    """Partition vertices into independent sets of exactly the given sizes.

    Greedy fill of the emptiest conflict-free class, then swap repair on
    conflicting vertices. The result is certified before return.
    """
    n = len(adj)
    if sum(sizes) != n:
        raise DesignError("class sizes must sum to n")
    rng = random.Random(seed)
    k = len(sizes)
    cls = [-1] * n
    members: list[list[int]] = [[] for _ in range(k)]
    for v in sorted(range(n), key=lambda x: (-len(adj[x]), x)):
        open_ = [i for i in range(k) if len(members[i]) < sizes[i]]
        clean = [i for i in open_ if not any(cls[w] == i for w in adj[v])]
        pool = clean or open_
        i = min(pool, key=lambda c: (len(members[c]) - sizes[c], c))
        cls[v] = i
        members[i].append(v)

    def conflicts(v: int, c: int) -> int:
        return sum(1 for w in adj[v] if cls[w] == c and w != v)

    bad = {v for v in range(n) if conflicts(v, cls[v])}
    steps = 0
    while bad:
        steps += 1
        if steps > max_steps:
            raise DesignError("equitable coloring repair did not converge")
        x = rng.choice(sorted(bad))
        cx = cls[x]
        best = None
        for y in range(n):
            cy = cls[y]
            if cy == cx:
                continue
            delta = (
                conflicts(x, cy) - (1 if y in adj[x] else 0) + conflicts(y, cx) - (1 if x in adj[y] else 0)
                - conflicts(x, cx) - conflicts(y, cy)
            )
            if best is None or delta < best[0]:
                best = (delta, y)
        delta, y = best
        if delta >= 0 and rng.random() < 0.7:
            y = rng.choice([w for w in range(n) if cls[w] != cx])
        cy = cls[y]
        cls[x], cls[y] = cy, cx
        bad = {v for v in range(n) if conflicts(v, cls[v])}
    out: list[list[int]] = [[] for _ in range(k)]
    for v, c in enumerate(cls):
        out[c].append(v)
    for grp, want in zip(out, sizes):
        if len(grp) != want or any(w in adj[v] for v in grp for w in grp):
            raise DesignError("internal: equitable coloring failed certification")
    return [sorted(g) for g in out]


def build_Q_sd(graph: MultiGraph, d: int, seed: int = 0) -> PrecolorPlan:
    """Spanning star forest of G with the labelled shape required for the sd construction."""
    n = graph.n
    if not graph.is_regular(d):
        raise DesignError("graph must be d-regular")
    if 3 * d < 2 * n:
        raise DesignError(f"need d >= 2n/3, got d={d}, n={n}")
    q, r = divmod(n, 3)
    _check_qr(q, r)
    adj = graph.adjacency_sets()
    comp = [set(range(n)) - adj[v] - {v} for v in range(n)]
    if r in (0, 1):
        sizes = [3] * (q - r) + [4] * r
    else:
        sizes = [3] * q + [2]
    classes = equitable_vertex_coloring(comp, sizes, seed=seed)
    triples = sorted((c for c in classes if len(c) == 3), key=lambda c: c[0])
    labels = {"v": [], "u": [], "x": [], "y": [-1] * q, "z": [-1] * q}
    stars: list[tuple[int, list[int]]] = []
    if r == 0:
        for a, b, c in triples:
            stars.append((c, [a, b]))
    elif r == 1:
        for a, b, c in triples:
            stars.append((c, [a, b]))
        big = next(c for c in classes if len(c) == 4)
        stars.append((big[3], big[:3]))
    else:
        u, v = next(c for c in classes if len(c) == 2)
        hit = None
        for end, other in ((u, v), (v, u)):
            for t in triples:
                w = next((w for w in t if w in adj[end]), None)
                if w is not None:
                    hit = (end, other, t, w)
                    break
            if hit:
                break
        if hit is None:
            raise DesignError("no triangle vertex adjacent to the K2 component")
        end, other, tri, w = hit
        triples = [t for t in triples if t != tri]
        for a, b, c in triples:
            stars.append((c, [a, b]))
        leaves = sorted(x for x in tri if x != w)
        stars.append((w, leaves + [end]))
        labels["z"][q - 1] = other
    pairs: list[tuple[int, int]] = []
    roles: list[tuple[str, int]] = []
    for i, (center, leaves) in enumerate(stars, start=1):
        labels["v"].append(center)
        labels["u"].append(leaves[0])
        labels["x"].append(leaves[1])
        pairs += [(center, leaves[0]), (center, leaves[1])]
        roles += [("vu", i), ("vx", i)]
        if len(leaves) == 3:
            labels["y"][q - 1] = leaves[2]
            pairs.append((center, leaves[2]))
            roles.append(("vy", i))
    if r == 2:
        pairs.append((labels["y"][q - 1], labels["z"][q - 1]))
        roles.append(("yz", q))
    index = graph.edge_index()
    try:
        eids = [index[(min(a, b), max(a, b))][0] for a, b in pairs]
    except KeyError as exc:
        raise DesignError("Q edge missing from G") from exc
    if r != 2:
        labels.pop("z")
    if r == 0:
        labels.pop("y")
    plan = PrecolorPlan("sd", n, d, q, r, pairs, [0] * len(pairs), eids, roles, labels)
    return plan


def precolor_sd(plan: PrecolorPlan) -> PrecolorPlan:
    if plan.mode != "sd" or not plan.q_roles:
        raise DesignError("precolor_sd needs a labelled sd plan")
    table = sd_phi0_roles(plan.q, plan.r)
    plan.q_colors = [table[role] for role in plan.q_roles]
    plan.C0 = sd_C0(plan.q, plan.r)
    plan.C1 = sd_C1(plan.q, plan.r)
    if set(plan.C0) & set(plan.C1):
        raise DesignError("C0 and C1 intersect")
    if max(plan.C0 + plan.C1) > plan.d + 2:
        raise DesignError("reserved colors exceed d+2")
    return plan


def recolor_sd(coloring, plan: PrecolorPlan):
    """Replace the initial Q colors by the final table; returns a new coloring with palette d+2."""
    from .coloring import ColoringError, from_colors

    phi0 = plan.phi0
    for e, c in phi0.items():
        if coloring.colors[e] != c:
            raise DesignError(f"edge {e} is not colored by the initial precoloring")
    table = sd_phi0_prime_roles(plan.q, plan.r)
    colors = list(coloring.colors)
    for e, role in zip(plan.q_eids, plan.q_roles):
        colors[e] = table[role]
    try:
        out = from_colors(coloring.graph, colors, k=plan.d + 2)
    except ColoringError as exc:
        raise DesignError(f"recolored Q is not proper: {exc}") from exc
    out.frozen = set(plan.q_eids)
    return out


def label_sums(plan: PrecolorPlan, sums: list[int]) -> dict[tuple[str, int], int]:
    out = {}
    for v, lab in plan.vertex_label().items():
        out[lab] = sums[v]
    return out


__all__ = [
    "DesignError",
    "GraphError",
    "PrecolorPlan",
    "QStructure",
    "bibd_blocks",
    "block_sequence",
    "build_Q_sd",
    "build_Q_vd",
    "equitable_vertex_coloring",
    "expected_sums",
    "label_sums",
    "precolor_sd",
    "precolor_vd",
    "q_vertex_sets",
    "recolor_sd",
    "sd_C0",
    "sd_C1",
    "sd_phi0_prime_roles",
    "sd_phi0_roles",
    "vd_block_budget",
]
