"""Six-step construction of vd/sd edge-(d+2)-colorings of dense regular graphs.

Both modes build an auxiliary d*-regular graph G* carrying a precolored
subgraph Q, then produce a proper coloring of G* with exactly d* colors that
extends the precoloring:

1. split V into equal halves A, B with small side-degree discrepancy;
2. extend the precoloring to G*[A] + G*[B] + Q with k colors (C2), then balance
   the missing counts;
3. grow every C2 class into a perfect matching of G* by switching short
   alternating paths through the uncolored A-B edges (H);
4. color the edges uncolored in step 3 (R_A, R_B) with l new colors (C3) and
   complete every C3 class by a perfect matching of what is left of H;
5. the rest is a regular bipartite graph, colored by König.

Step 6 reads off the answer: for vd the Q edges are dropped, for sd they are
recolored with the two reserved colors.

The bounds used by the asymptotic argument do not hold at small n. Every step
first tries the construction as described; if its preconditions fail it
records a named fallback and either uses a generic repair or hands over to a
global Kempe completion. Verdicts in the report are always recomputed from the
final coloring.
"""

from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass, field

import networkx as nx

from . import design
from .balance import BalanceError, balance_missing, equitable_edge_coloring
from .coloring import (
    ColoringError,
    PartialColoring,
    from_colors,
    is_perfect_matching_class,
    mask_of,
    missing_spread,
    parity_check,
    verify_proper,
    verify_sd,
    verify_vd,
    vertex_sums,
)
from .completion import CompletionError, greedy_fill, kempe_complete
from .graph import GraphError, MultiGraph, union_with
from .matching import MatchingError, hall_matching, konig_color
from .multifan import ExtensionError, extend_precoloring
from .partition import Partition, PartitionError, balanced_partition

log = logging.getLogger(__name__)

BALANCE_M = 4  # each C1 color sits on at most four Q edges


class PipelineError(RuntimeError):
    pass


class StepFailure(RuntimeError):
    """A step could not certify its preconditions; carries the fallback name."""

    def __init__(self, flag: str, msg: str):
        super().__init__(msg)
        self.flag = flag


# -- report ----------------------------------------------------------

@dataclass
class Bound:
    name: str
    required: float | int | str
    measured: float | int | str
    ok: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "required": self.required, "measured": self.measured, "ok": self.ok}


@dataclass
class StepReport:
    name: str
    seconds: float = 0.0
    bounds: list[Bound] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def check(self, name: str, required, measured, ok: bool) -> bool:
        self.bounds.append(Bound(name, required, measured, bool(ok)))
        return bool(ok)

    def to_dict(self, timestamps: bool = True) -> dict:
        out = {"name": self.name, "bounds": [b.to_dict() for b in self.bounds], "info": self.info}
        if timestamps:
            out["seconds"] = round(self.seconds, 4)
        return out


@dataclass
class PipelineReport:
    mode: str
    n: int
    d: int
    seed: int
    epsilon: float
    steps: list[StepReport] = field(default_factory=list)
    fallbacks: list[str] = field(default_factory=list)
    verdict: dict = field(default_factory=dict)
    palette: dict = field(default_factory=dict)
    thresholds: list[Bound] = field(default_factory=list)
    plan: dict = field(default_factory=dict)
    histograms: dict = field(default_factory=dict)
    sums_match: bool | None = None
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.verdict.get("proper")) and bool(self.verdict.get(self.mode))

    def step(self, name: str) -> StepReport:
        for s in self.steps:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self, timestamps: bool = True) -> dict:
        return {
            "config": self.config,
            "mode": self.mode,
            "n": self.n,
            "d": self.d,
            "seed": self.seed,
            "epsilon": self.epsilon,
            "thresholds": [b.to_dict() for b in self.thresholds],
            "steps": [s.to_dict(timestamps) for s in self.steps],
            "fallbacks": list(self.fallbacks),
            "histograms": self.histograms,
            "verdict": self.verdict,
            "sums_match": self.sums_match,
            "palette": self.palette,
            "plan": self.plan,
        }

    def to_text(self, timestamps: bool = True) -> str:
        lines = [f"mode={self.mode} n={self.n} d={self.d} seed={self.seed} epsilon={self.epsilon}"]
        for b in self.thresholds:
            lines.append(f"threshold {b.name}: required {b.required}, measured {b.measured}, ok={b.ok}")
        for s in self.steps:
            head = f"[{s.name}]"
            if timestamps:
                head += f" {s.seconds:.3f}s"
            lines.append(head)
            for b in s.bounds:
                lines.append(f"  {'ok ' if b.ok else 'BAD'} {b.name}: required {b.required}, measured {b.measured}")
        lines.append("fallbacks: " + (", ".join(self.fallbacks) or "none"))
        lines.append(
            "verdict: " + " ".join(f"{k}={v}" for k, v in self.verdict.items())
            + ("" if self.sums_match is None else f" sums_match={self.sums_match}")
        )
        lines.append(f"palette: size={self.palette.get('size')} unused={self.palette.get('unused')}")
        return "\n".join(lines) + "\n"


# -- state -----------------------------------------------------------

@dataclass
class StepState:
    G_star: MultiGraph
    d: int
    d_star: int
    palette: list[int]
    plan: design.PrecolorPlan
    q_eids: set[int]
    C0: list[int]
    C1: list[int]
    C2: list[int] = field(default_factory=list)
    C3: list[int] = field(default_factory=list)
    k: int = 0
    ell: int = 0
    partition: Partition | None = None
    coloring: PartialColoring | None = None
    R_A: set[int] = field(default_factory=set)
    R_B: set[int] = field(default_factory=set)
    deg_RA: list[int] = field(default_factory=list)
    deg_RB: list[int] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.G_star.n

    @property
    def m(self) -> int:
        return self.G_star.n // 2

    @property
    def side(self) -> list[int]:
        return self.partition.side

    def is_cross(self, e: int) -> bool:
        u, v = self.G_star.edges[e]
        return self.side[u] != self.side[v]

    def add_to_R(self, e: int) -> None:
        u, v = self.G_star.edges[e]
        if self.side[u] == 0:
            self.R_A.add(e)
            deg = self.deg_RA
        else:
            self.R_B.add(e)
            deg = self.deg_RB
        deg[u] += 1
        deg[v] += 1

    def remove_from_R(self, e: int) -> None:
        u, v = self.G_star.edges[e]
        if e in self.R_A:
            self.R_A.remove(e)
            deg = self.deg_RA
        else:
            self.R_B.remove(e)
            deg = self.deg_RB
        deg[u] -= 1
        deg[v] -= 1

    def h_colored_degree(self) -> list[int]:
        out = [0] * self.n
        pc = self.coloring
        for e, (u, v) in enumerate(self.G_star.edges):
            if pc.colors[e] and self.side[u] != self.side[v]:
                out[u] += 1
                out[v] += 1
        return out


def nominal_k(d_star: int, m: int) -> int:
    return math.ceil((d_star + m ** (2 / 3)) / 2) + 50


def nominal_ell(m: int) -> int:
    return math.ceil(m ** (5 / 6)) + 1


# -- step 1 ----------------------------------------------------------

def step1_partition(state: StepState, seed: int, rep: StepReport) -> None:
    try:
        part = balanced_partition(state.G_star, seed=seed)
    except PartitionError as exc:
        raise StepFailure("partition", str(exc)) from exc
    state.partition = part
    n = state.n
    rep.check("|A|=|B|", n // 2, part.side.count(0), part.side.count(0) == n // 2)
    target = math.ceil(state.m ** (2 / 3) - 1e-9)
    rep.check("max|d_A-d_B|<=ceil(m^(2/3))", target, part.discrepancy, part.discrepancy <= target)
    rep.info["restart_seed"] = part.seed
    rep.info["bits"] = part.to_bits()


# -- step 2 ----------------------------------------------------------

def _choose_C2(state: StepState, k: int) -> list[int]:
    extra = [c for c in state.palette if c not in state.C1]
    return sorted(state.C1 + extra[: k - len(state.C1)])


def step2_extend(state: StepState, seed: int, rep: StepReport, fallbacks: list[str]) -> None:
    g = state.G_star
    side = state.side
    ab = [e for e, (u, v) in enumerate(g.edges) if side[u] == side[v] or e in state.q_eids]
    sub, parent = g.edge_subgraph(ab)
    to_sub = {e: i for i, e in enumerate(parent)}
    q_sub = {to_sub[e] for e in state.q_eids}
    phi0 = state.plan.phi0
    pre = {to_sub[e]: c for e, c in phi0.items()}
    delta_ab = sub.max_degree()
    c_q = max(MultiGraph(g.n, [g.edges[e] for e in state.q_eids]).degrees(), default=0)
    mult: dict[int, int] = {}
    for c in pre.values():
        mult[c] = mult.get(c, 0) + 1
    m_q = max(mult.values(), default=1)

    kp = nominal_k(state.d_star, state.m)
    rep.info["nominal_k"] = kp
    rep.check("Delta(G*_AB)<=(d*+m^(2/3))/2+3", round((state.d_star + state.m ** (2 / 3)) / 2 + 3, 3), delta_ab,
              delta_ab <= (state.d_star + state.m ** (2 / 3)) / 2 + 3)
    rep.check("Delta(Q)<=3", 3, c_q, c_q <= 3)
    rep.check("C1 multiplicity<=4", BALANCE_M, m_q, m_q <= BALANCE_M)
    if kp <= state.d_star:
        k = kp
    else:
        k = max(len(state.C1), delta_ab + 1)
        fallbacks.append("step2:k_clamped")
    rep.check("k<=d*", state.d_star, k, k <= state.d_star)
    if k > state.d_star:
        raise StepFailure("step2:palette", f"k={k} exceeds d*={state.d_star}")

    rng = random.Random(seed)
    pc_sub = None
    while k <= state.d_star:
        C2 = _choose_C2(state, k)
        allowed = mask_of(C2)
        try:
            pc_sub, stats = extend_precoloring(sub, q_sub, pre, c=max(c_q, 1), m=m_q, k=k,
                                               palette=state.d + 2, allowed=allowed)
            rep.info["extension"] = stats.to_dict()
            break
        except ExtensionError as exc:
            log.info("extension with k=%d stuck: %s", k, exc)
        pc_sub = PartialColoring(sub, state.d + 2)
        for e, c in pre.items():
            pc_sub.assign(e, c)
        pc_sub.frozen = set(q_sub)
        greedy_fill(pc_sub, allowed=allowed)
        try:
            kempe_complete(pc_sub, allowed=allowed, rng=rng, max_steps=100 * sub.m + 20_000)
            if "step2:kempe_extension" not in fallbacks:
                fallbacks.append("step2:kempe_extension")
            break
        except CompletionError:
            pc_sub = None
            k += 1
            if "step2:k_raised" not in fallbacks:
                fallbacks.append("step2:k_raised")
    if pc_sub is None:
        raise StepFailure("step2:extension", "no extension within d* colors")
    state.k = k
    state.C2 = _choose_C2(state, k)
    rep.info["k"] = k
    rep.info["extension_palette"] = max(k, delta_ab + 4 * max(c_q, 1) * m_q - 1)
    used = {c for c in pc_sub.colors if c}
    rep.check("colors used subset of C2", len(state.C2), len(used), used <= set(state.C2))
    rep.check("phi0 preserved", "exact", "exact" if all(pc_sub.colors[e] == c for e, c in pre.items()) else "changed",
              all(pc_sub.colors[e] == c for e, c in pre.items()))

    try:
        balanced, brep = balance_missing(sub, pc_sub, q_sub, BALANCE_M, colors=state.C2)
    except BalanceError as exc:
        fallbacks.append("step2:balance")
        log.info("balancing failed: %s", exc)
        balanced, brep = pc_sub, None
    spread = missing_spread(balanced, state.C2)
    ok = rep.check("missing spread<=17", 4 * BALANCE_M + 1, spread, spread <= 4 * BALANCE_M + 1)
    if not ok and "step2:balance" not in fallbacks:
        fallbacks.append("step2:balance")
    rep.check("parity", True, parity_check(balanced), parity_check(balanced))
    rep.check("proper", True, verify_proper(balanced), verify_proper(balanced))
    if brep is not None:
        rep.info["balance_switches"] = brep.switches
    pc = PartialColoring(g, state.d + 2)
    for i, e in enumerate(parent):
        pc.assign(e, balanced.colors[i])
    pc.frozen = set(state.q_eids)
    state.coloring = pc
    state.deg_RA = [0] * g.n
    state.deg_RB = [0] * g.n


# -- step 3 ----------------------------------------------------------

def mcc_pairs(state: StepState, alpha: int) -> list[tuple[int, int, str]]:
    """Cross-side pairs first, then same-side pairs; lexicographic by vertex id."""
    miss = state.coloring.missing_vertices(alpha)
    a_list = sorted(v for v in miss if state.side[v] == 0)
    b_list = sorted(v for v in miss if state.side[v] == 1)
    t = min(len(a_list), len(b_list))
    pairs = [(a_list[i], b_list[i], "AB") for i in range(t)]
    rest, tag = (a_list[t:], "AA") if len(a_list) > t else (b_list[t:], "BB")
    if len(rest) % 2:
        raise PipelineError("odd number of vertices left unpaired (parity broken)")
    pairs += [(rest[i], rest[i + 1], tag) for i in range(0, len(rest), 2)]
    return pairs


class _PathSearch:
    def __init__(self, state: StepState, alpha: int):
        self.s = state
        self.alpha = alpha
        pc = state.coloring
        g = state.G_star
        self.v_alpha = set()
        for e in state.q_eids:
            if pc.colors[e] == alpha:
                self.v_alpha.update(g.edges[e])
        self.thr = state.m ** (5 / 6) - 1

    def good_vertex(self, v: int) -> bool:
        return self.s.deg_RA[v] < self.thr and self.s.deg_RB[v] < self.thr

    def uncolored_h(self, x: int, y: int) -> int:
        pc = self.s.coloring
        for e, w in self.s.G_star.incidence[x]:
            if w == y and not pc.colors[e] and e not in self.s.q_eids:
                return e
        return -1

    def h_neighbors(self, x: int) -> list[tuple[int, int]]:
        pc = self.s.coloring
        side = self.s.side
        seen = {}
        for e, w in self.s.G_star.incidence[x]:
            if side[w] != side[x] and not pc.colors[e] and w not in seen:
                seen[w] = e
        return sorted(seen.items())

    def alpha_partner(self, x: int) -> tuple[int, int] | None:
        """Good alpha edge at x staying inside x's side, away from V_alpha."""
        s = self.s
        e = s.coloring.at[x][self.alpha]
        if e < 0 or e in s.q_eids or e in s.R_A or e in s.R_B:
            return None
        y = s.G_star.other(e, x)
        if s.side[y] != s.side[x] or y in self.v_alpha:
            return None
        if not (self.good_vertex(x) and self.good_vertex(y)):
            return None
        return e, y

    def find(self, a: int, b: int, n_alpha: int) -> list[int] | None:
        """Edges of an alternating path a..b with ``n_alpha`` colored edges, or None."""
        used = {a, b}

        def rec(cur: int, left: int) -> list[int] | None:
            if left == 0:
                e = self.uncolored_h(cur, b)
                return [e] if e >= 0 else None
            for x, e1 in self.h_neighbors(cur):
                if x in used or x in self.v_alpha:
                    continue
                hit = self.alpha_partner(x)
                if hit is None:
                    continue
                e2, y = hit
                if y in used:
                    continue
                used.update((x, y))
                tail = rec(y, left - 1)
                used.difference_update((x, y))
                if tail is not None:
                    return [e1, e2] + tail
            return None

        return rec(a, n_alpha)


def _exchange(state: StepState, path: list[int], alpha: int) -> None:
    pc = state.coloring
    old = [e for e in path if pc.colors[e]]
    new = [e for e in path if not pc.colors[e]]
    for e in old:
        pc.unassign(e)
        state.add_to_R(e)
    for e in new:
        pc.assign(e, alpha)


def _matching_saturate(state: StepState, alpha: int) -> int:
    """Generic repair: maximum-cardinality matching through alpha edges and uncolored edges.

    Keeping an existing alpha edge is preferred. Dropped side edges join R_A/R_B,
    dropped A-B edges return to H, and chosen R edges leave R.
    """
    pc = state.coloring
    g = state.G_star
    fixed = set()
    for e in state.q_eids:
        if pc.colors[e] == alpha:
            fixed.update(g.edges[e])
    nxg = nx.Graph()
    nxg.add_nodes_from(v for v in range(g.n) if v not in fixed)
    eid_of = {}
    for e, (u, v) in enumerate(g.edges):
        if u in fixed or v in fixed or e in state.q_eids:
            continue
        c = pc.colors[e]
        if c == alpha:
            w = 3
        elif not c:
            w = 1
        else:
            continue
        key = (min(u, v), max(u, v))
        if key not in eid_of or w > eid_of[key][1]:
            eid_of[key] = (e, w)
            nxg.add_edge(*key, weight=w)
    mate = nx.max_weight_matching(nxg, maxcardinality=True)
    if 2 * len(mate) != nxg.number_of_nodes():
        raise StepFailure("step3:matching", f"color {alpha}: no perfect matching through eligible edges")
    chosen = {eid_of[(min(u, v), max(u, v))][0] for u, v in mate}
    changed = 0
    for e in pc.color_class(alpha):
        if e not in chosen and e not in state.q_eids:
            pc.unassign(e)
            if not state.is_cross(e):
                state.add_to_R(e)
            changed += 1
    for e in sorted(chosen):
        if not pc.colors[e]:
            pc.assign(e, alpha)
            if e in state.R_A or e in state.R_B:
                state.remove_from_R(e)
            changed += 1
    return changed


def step3_saturate(state: StepState, rep: StepReport, fallbacks: list[str], allow_fallback: bool = True) -> StepState:
    pc = state.coloring
    q_before = {e: pc.colors[e] for e in state.q_eids}
    lengths: dict[int, int] = {}
    n_pairs = 0
    repaired = []
    for alpha in state.C2:
        pairs = mcc_pairs(state, alpha)
        n_pairs += len(pairs)
        search = _PathSearch(state, alpha)
        for a, b, kind in pairs:
            if pc.present[a] >> alpha & 1 or pc.present[b] >> alpha & 1:
                raise PipelineError("MCC pair no longer missing its color")
            path = search.find(a, b, 2 if kind == "AB" else 3)
            if path is None:
                misses = rep.info.setdefault("path_misses", {})
                misses[kind] = misses.get(kind, 0) + 1
                break
            _exchange(state, path, alpha)
            lengths[len(path)] = lengths.get(len(path), 0) + 1
        if not is_perfect_matching_class(pc, alpha):
            if not allow_fallback:
                raise StepFailure("step3:path", f"color {alpha}: no short alternating path")
            repaired.append(alpha)
            rep.info["matching_repaired_colors"] = repaired
            rep.info["path_lengths"] = {str(k): v for k, v in sorted(lengths.items())}
            _matching_saturate(state, alpha)
    if repaired:
        fallbacks.append("step3:matching")
    rep.info["mcc_pairs"] = n_pairs
    m = state.m
    rep.check("MCC pairs<2m^(5/3)", round(2 * m ** (5 / 3), 3), n_pairs, n_pairs < 2 * m ** (5 / 3))
    rep.info["path_lengths"] = {str(k): v for k, v in sorted(lengths.items())}
    rep.info["matching_repaired_colors"] = repaired
    m = state.m
    all_pm = all(is_perfect_matching_class(pc, c) for c in state.C2)
    rep.check("C2 classes perfect matchings", len(state.C2), sum(is_perfect_matching_class(pc, c) for c in state.C2), all_pm)
    rep.check("phi0 untouched", "exact", "exact" if all(pc.colors[e] == c for e, c in q_before.items()) else "changed",
              all(pc.colors[e] == c for e, c in q_before.items()))
    ra, rb = len(state.R_A), len(state.R_B)
    rep.check("(C1) |R_A|=|R_B|", ra, rb, ra == rb)
    rep.check("(C1) |R_A|<4m^(5/3)", round(4 * m ** (5 / 3), 3), ra, ra < 4 * m ** (5 / 3))
    dmax = max(state.deg_RA + state.deg_RB, default=0)
    rep.check("(C2) Delta(R_A),Delta(R_B)<m^(5/6)", round(m ** (5 / 6), 3), dmax, dmax < m ** (5 / 6))
    hdeg = max(state.h_colored_degree(), default=0)
    rep.check("(C3) colored H degree<2m^(5/6)", round(2 * m ** (5 / 6), 3), hdeg, hdeg < 2 * m ** (5 / 6))
    if not all_pm:
        raise StepFailure("step3:incomplete", "some C2 class is not a perfect matching")
    return state


# -- step 4 ----------------------------------------------------------

def _color_side(state: StepState, eids: set[int], ell: int, seed: int) -> dict[int, list[int]]:
    """Equitable ell-coloring of one exceptional graph; classes keyed by local color."""
    sub, parent = state.G_star.edge_subgraph(eids)
    if sub.m == 0:
        return {c: [] for c in range(1, ell + 1)}
    pc = equitable_edge_coloring(sub, ell, seed=seed)
    out = {c: [] for c in range(1, ell + 1)}
    for i, c in enumerate(pc.colors):
        out[c].append(parent[i])
    return out


def _try_step4(state: StepState, ell: int, seed: int, rep: StepReport) -> PartialColoring:
    pc = state.coloring.copy()
    used = set(state.C0) | set(state.C2)
    C3 = [c for c in state.palette if c not in used][:ell]
    if len(C3) < ell:
        raise StepFailure("step4:palette", "not enough fresh colors")
    try:
        cls_a = _color_side(state, state.R_A, ell, seed)
        cls_b = _color_side(state, state.R_B, ell, seed + 1)
    except (BalanceError, ColoringError) as exc:
        raise StepFailure("step4:equitable", str(exc)) from exc
    order_a = sorted(cls_a, key=lambda c: (-len(cls_a[c]), c))
    order_b = sorted(cls_b, key=lambda c: (-len(cls_b[c]), c))
    m = state.m
    load = max((len(x) for x in list(cls_a.values()) + list(cls_b.values())), default=0)
    rep.check("C3 load per side<4m^(5/6)+1", round(4 * m ** (5 / 6) + 1, 3), load, load < 4 * m ** (5 / 6) + 1)
    for alpha, ca, cb in zip(C3, order_a, order_b):
        if len(cls_a[ca]) != len(cls_b[cb]):
            raise StepFailure("step4:class_sizes", "class sizes differ across R_A and R_B")
        for e in cls_a[ca] + cls_b[cb]:
            pc.assign(e, alpha)
    side = state.side
    g = state.G_star
    for alpha in C3:
        covered = [bool(pc.present[v] >> alpha & 1) for v in range(g.n)]
        left = [v for v in range(g.n) if side[v] == 0 and not covered[v]]
        right = [v for v in range(g.n) if side[v] == 1 and not covered[v]]
        pick = {}
        for e, (u, v) in enumerate(g.edges):
            if pc.colors[e] or e in state.q_eids or side[u] == side[v] or covered[u] or covered[v]:
                continue
            a, b = (u, v) if side[u] == 0 else (v, u)
            pick.setdefault((a, b), e)
        try:
            res = hall_matching(left, right, list(pick))
        except MatchingError as exc:
            raise StepFailure("step4:hall", str(exc)) from exc
        if not res.perfect:
            rep.info.setdefault("hall_violators", []).append(
                {"color": alpha, "size": len(res.violator), "neighbors": len(res.neighborhood)}
            )
            raise StepFailure("step4:hall", f"H_{alpha} has no perfect matching")
        for a, b in res.matching.items():
            pc.assign(pick[(a, b)], alpha)
    state.C3 = C3
    return pc


def step4_complete(state: StepState, seed: int, rep: StepReport, fallbacks: list[str],
                   allow_fallback: bool = True) -> StepState:
    rem = state.d_star - state.k
    r_edges = state.R_A | state.R_B
    delta_r = max(state.deg_RA + state.deg_RB, default=0)
    lo = delta_r + 1 if r_edges else 0
    lp = nominal_ell(state.m)
    rep.info["nominal_ell"] = lp
    first = min(max(lp, lo), rem)
    if first != lp:
        fallbacks.append("step4:ell_clamped")
    tries = [first] + ([lo] if allow_fallback and lo != first and lo <= rem else [])
    if lo > rem:
        raise StepFailure("step4:palette", f"R needs {lo} colors, only {rem} left")
    last: StepFailure | None = None
    for i, ell in enumerate(tries):
        try:
            pc = _try_step4(state, ell, seed, rep)
        except StepFailure as exc:
            last = exc
            continue
        if i:
            fallbacks.append("step4:ell_minimal")
        state.coloring = pc
        state.ell = ell
        break
    else:
        raise last
    rep.info["ell"] = state.ell
    rep.check("ell<=d*-k", rem, state.ell, state.ell <= rem)
    pm = [is_perfect_matching_class(state.coloring, c) for c in state.C2 + state.C3]
    rep.check("C2+C3 classes perfect matchings", len(pm), sum(pm), all(pm))
    return state


# -- step 5 ----------------------------------------------------------

def step5_finish(state: StepState, rep: StepReport) -> StepState:
    pc = state.coloring
    g = state.G_star
    rest = [e for e in range(g.m) if not pc.colors[e]]
    want = state.d_star - state.k - state.ell
    sub, parent = g.edge_subgraph(rest)
    rep.check("R bipartite (A-B only)", True, all(state.is_cross(e) for e in rest), all(state.is_cross(e) for e in rest))
    regular = sub.is_regular(want) if want else sub.m == 0
    rep.check("Delta(R)=d*-k-l", want, sub.max_degree(), regular)
    if not regular or not all(state.is_cross(e) for e in rest):
        raise StepFailure("step5:irregular", "remainder is not a regular bipartite graph")
    fresh = [c for c in state.palette if c not in set(state.C2) | set(state.C3)]
    if len(fresh) != want:
        raise PipelineError("palette audit failed before step 5")
    kc = konig_color(sub, colors=fresh, side=state.side)
    for i, e in enumerate(parent):
        pc.assign(e, kc.colors[i])
    rep.check("uncolored edges", 0, len(pc.uncolored()), pc.is_total())
    used = pc.used_colors()
    rep.check("palette exact", len(state.palette), len(used), used == set(state.palette))
    rep.check("parity", True, parity_check(pc), parity_check(pc))
    return state


# -- global fallback -------------------------------------------------

def remainder_fallback(state: StepState, seed: int, start: PartialColoring,
                       attempts: int = 4) -> tuple[PartialColoring | None, int]:
    """Color what Step 3 left uncolored using only the colors outside C2.

    Kempe changes are confined to the allowed colors, so the saturated C2
    classes and the precoloring are untouched. Returns (None, 0) on failure.
    """
    allowed = mask_of(c for c in state.palette if c not in set(state.C2))
    for t in range(attempts):
        pc = start.copy()
        pc.frozen = set(state.q_eids)
        try:
            steps = kempe_complete(pc, allowed=allowed, rng=random.Random(seed * 131 + t),
                                   max_steps=200 * pc.graph.m + 20_000)
        except CompletionError as exc:
            log.info("remainder fallback attempt %d failed: %s", t, exc)
            continue
        return pc, steps
    return None, 0


def global_fallback(state: StepState, seed: int, start: PartialColoring | None = None,
                    attempts: int = 6) -> tuple[PartialColoring, int]:
    """Kempe completion of G* inside the palette with Q frozen; resumes from ``start`` first."""
    g = state.G_star
    allowed = mask_of(state.palette)
    phi0 = state.plan.phi0
    for t in range(attempts):
        if t == 0 and start is not None:
            pc = start.copy()
        else:
            pc = PartialColoring(g, state.d + 2)
            for e, c in phi0.items():
                pc.assign(e, c)
            order = list(range(g.m))
            random.Random(seed * 7919 + t).shuffle(order)
            greedy_fill(pc, order=order, allowed=allowed)
        pc.frozen = set(state.q_eids)
        try:
            steps = kempe_complete(pc, allowed=allowed, rng=random.Random(seed * 31 + t),
                                   max_steps=400 * g.m + 50_000)
        except CompletionError as exc:
            log.info("global fallback attempt %d failed: %s", t, exc)
            continue
        return pc, steps
    raise PipelineError("global fallback exhausted its attempts")


# -- drivers ---------------------------------------------------------

def _check_input(G: MultiGraph) -> int:
    if G.n % 2:
        raise PipelineError(f"need an even number of vertices, got {G.n}")
    d = G.max_degree()
    if not G.is_regular(d):
        raise PipelineError("input graph is not regular")
    if not G.is_simple():
        raise PipelineError("input graph must be simple")
    return d


def _timed(report: PipelineReport, name: str):
    rep = StepReport(name)
    report.steps.append(rep)
    return rep


def _run_steps(state: StepState, report: PipelineReport, seed: int, fallback: bool) -> PartialColoring:
    fb = report.fallbacks
    t0 = time.perf_counter()
    last_partial = None
    try:
        rep = _timed(report, "step1_partition")
        step1_partition(state, seed, rep)
        rep.seconds = time.perf_counter() - t0

        t0 = time.perf_counter()
        rep = _timed(report, "step2_extend")
        step2_extend(state, seed, rep, fb)
        rep.seconds = time.perf_counter() - t0
        if not fallback and fb:
            raise StepFailure(fb[-1], "fallback disabled")

        t0 = time.perf_counter()
        rep = _timed(report, "step3_saturate")
        step3_saturate(state, rep, fb, allow_fallback=fallback)
        rep.seconds = time.perf_counter() - t0
        last_partial = state.coloring

        t0 = time.perf_counter()
        rep = _timed(report, "step4_complete")
        step4_complete(state, seed, rep, fb, allow_fallback=fallback)
        rep.seconds = time.perf_counter() - t0

        t0 = time.perf_counter()
        rep = _timed(report, "step5_finish")
        step5_finish(state, rep)
        rep.seconds = time.perf_counter() - t0
        return state.coloring
    except StepFailure as exc:
        rep.seconds = time.perf_counter() - t0
        rep.info["failure"] = str(exc)
        if exc.flag not in fb:
            fb.append(exc.flag)
        if not fallback:
            raise PipelineError(f"{exc.flag}: {exc} (fallback disabled)") from exc
        t0 = time.perf_counter()
        start = last_partial.copy() if last_partial is not None else None
        pc = None
        if start is not None:
            # keep the saturated C2 classes, drop anything half-built later
            for e in range(start.graph.m):
                if start.colors[e] and start.colors[e] not in state.C2 and e not in state.q_eids:
                    start.unassign(e)
            rep = _timed(report, "remainder_fallback")
            pc, steps = remainder_fallback(state, seed, start)
            if pc is not None:
                fb.append("step4:kempe_remainder")
                rep.info["kempe_steps"] = steps
        if pc is None:
            rep = _timed(report, "global_fallback")
            pc, steps = global_fallback(state, seed, start)
            fb.append("global:kempe_complete")
            rep.info["kempe_steps"] = steps
        pm = [is_perfect_matching_class(pc, c) for c in state.palette]
        rep.check("all classes perfect matchings", len(pm), sum(pm), all(pm))
        rep.check("uncolored edges", 0, len(pc.uncolored()), pc.is_total())
        used = pc.used_colors()
        rep.check("palette exact", len(state.palette), len(used), used == set(state.palette))
        rep.check("parity", True, parity_check(pc), parity_check(pc))
        rep.seconds = time.perf_counter() - t0
        state.coloring = pc
        return pc


def _thresholds(report: PipelineReport, n: int, d: int, epsilon: float, mode: str) -> None:
    vd_req = (1 + epsilon) * n / 2
    report.thresholds.append(Bound("d>=(1+eps)n/2", round(vd_req, 3), d, d >= vd_req))
    if mode == "sd":
        report.thresholds.append(Bound("d>=2n/3", round(2 * n / 3, 3), d, 3 * d >= 2 * n))
    for b in report.thresholds:
        if not b.ok:
            log.warning("threshold %s not met (d=%d, required %s)", b.name, d, b.required)


def _finish(report: PipelineReport, out: PartialColoring, d: int) -> None:
    proper = verify_proper(out) and out.is_total()
    report.verdict = {
        "proper": proper,
        "vd": proper and verify_vd(out),
        "sd": proper and verify_sd(out),
    }
    used = out.used_colors()
    report.palette = {
        "size": len(used),
        "colors": sorted(used),
        "unused": [c for c in range(1, d + 3) if c not in used],
    }


def run_vd(G: MultiGraph, seed: int = 0, epsilon: float = 0.05, fallback: bool = True
           ) -> tuple[PartialColoring, PipelineReport]:
    d = _check_input(G)
    n = G.n
    report = PipelineReport("vd", n, d, seed, epsilon)
    _thresholds(report, n, d, epsilon, "vd")
    try:
        structure = design.build_Q_vd(n)
        plan = design.precolor_vd(structure, d)
    except design.DesignError as exc:
        raise PipelineError(str(exc)) from exc
    g_star = union_with(G, structure.edges)
    plan.attach(list(range(G.m, g_star.m)))
    report.plan = plan.to_dict()
    state = StepState(g_star, d, d + 2, list(range(1, d + 3)), plan, set(plan.q_eids), [], plan.C1)
    pc = _run_steps(state, report, seed, fallback)
    out = from_colors(G, pc.colors[: G.m], k=d + 2)
    rep = _timed(report, "step6_restrict")
    sets_ok = _q_sets_distinct(plan)
    rep.check("phi0 vertex-distinguishing on Q", True, sets_ok, sets_ok)
    _finish(report, out, d)
    return out, report


def _q_sets_distinct(plan: design.PrecolorPlan) -> bool:
    sets = list(design.q_vertex_sets(plan).values())
    return len(set(sets)) == len(sets)


def run_sd(G: MultiGraph, seed: int = 0, epsilon: float = 0.05, fallback: bool = True
           ) -> tuple[PartialColoring, PipelineReport]:
    d = _check_input(G)
    n = G.n
    report = PipelineReport("sd", n, d, seed, epsilon)
    _thresholds(report, n, d, epsilon, "sd")
    try:
        plan = design.precolor_sd(design.build_Q_sd(G, d, seed=seed))
    except (design.DesignError, GraphError) as exc:
        raise PipelineError(str(exc)) from exc
    report.plan = plan.to_dict()
    palette = [c for c in range(1, d + 3) if c not in plan.C0]
    state = StepState(G, d, d, palette, plan, set(plan.q_eids), list(plan.C0), plan.C1)
    pc = _run_steps(state, report, seed, fallback)
    rep = _timed(report, "step6_recolor")
    s = sum(palette)
    sums_before = vertex_sums(pc)
    rep.check("all sums equal s before recoloring", s, max(sums_before), all(x == s for x in sums_before))
    out = design.recolor_sd(pc, plan)
    expected = design.expected_sums(plan.q, plan.r, s=s)
    labelled = plan.vertex_label()
    sums = vertex_sums(out)
    match = all(sums[v] == (expected[labelled[v]] if v in labelled else s) for v in range(n))
    report.sums_match = match
    rep.check("sums equal closed forms", "all", sum(
        sums[v] == (expected[labelled[v]] if v in labelled else s) for v in range(n)), match)
    _finish(report, out, d)
    return out, report


def run(mode: str, G: MultiGraph, seed: int = 0, epsilon: float = 0.05, fallback: bool = True):
    if mode == "vd":
        return run_vd(G, seed, epsilon, fallback)
    if mode == "sd":
        return run_sd(G, seed, epsilon, fallback)
    raise PipelineError(f"unknown mode {mode!r}")
