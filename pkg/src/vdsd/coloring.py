"""Partial edge colorings, Kempe chains and the proper / vd / sd verifiers.

Colors are 1-based. Color 0 in ``colors`` means "uncolored". Per-vertex
present sets are Python ints used as bitsets (bit ``c`` set iff some edge at
the vertex carries color ``c``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .graph import MultiGraph


class ColoringError(ValueError):
    pass


class FrozenEdgeError(ColoringError):
    pass


def bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_of(colors: Iterable[int]) -> int:
    m = 0
    for c in colors:
        m |= 1 << c
    return m


class PartialColoring:
    """Proper partial edge coloring of ``graph`` with palette ``[1, k]``.

    ``at[v][c]`` is the edge colored ``c`` at ``v`` (or -1); ``present[v]`` is
    the bitset of colors seen at ``v``. Both are maintained incrementally.
    """

    def __init__(self, graph: MultiGraph, k: int):
        if k < 0:
            raise ColoringError("palette size must be >= 0")
        self.graph = graph
        self.k = k
        self.colors = [0] * graph.m
        self.present = [0] * graph.n
        self.at = [[-1] * (k + 1) for _ in range(graph.n)]
        self.frozen: set[int] = set()
        self.full = ((1 << (k + 1)) - 1) ^ 1

    # -- bookkeeping -------------------------------------------------

    def copy(self) -> "PartialColoring":
        c = PartialColoring.__new__(PartialColoring)
        c.graph = self.graph
        c.k = self.k
        c.colors = list(self.colors)
        c.present = list(self.present)
        c.at = [list(row) for row in self.at]
        c.frozen = set(self.frozen)
        c.full = self.full
        return c

    def grow_palette(self, k: int) -> None:
        if k < self.k:
            raise ColoringError("palette can only grow")
        for row in self.at:
            row.extend([-1] * (k - self.k))
        self.k = k
        self.full = ((1 << (k + 1)) - 1) ^ 1

    def missing(self, v: int) -> int:
        return self.full & ~self.present[v]

    def missing_set(self, v: int) -> set[int]:
        return set(bits(self.missing(v)))

    def present_set(self, v: int) -> set[int]:
        return set(bits(self.present[v]))

    def missing_count(self, c: int) -> int:
        bit = 1 << c
        return sum(1 for p in self.present if not p & bit)

    def missing_vertices(self, c: int) -> list[int]:
        bit = 1 << c
        return [v for v, p in enumerate(self.present) if not p & bit]

    def color_class(self, c: int) -> list[int]:
        return [e for e, col in enumerate(self.colors) if col == c]

    def uncolored(self) -> list[int]:
        return [e for e, col in enumerate(self.colors) if col == 0]

    def is_total(self) -> bool:
        return all(self.colors)

    def used_colors(self) -> set[int]:
        return {c for c in self.colors if c}

    # -- mutation ----------------------------------------------------

    def assign(self, e: int, c: int) -> None:
        if not 1 <= c <= self.k:
            raise ColoringError(f"color {c} outside palette [1, {self.k}]")
        if self.colors[e]:
            raise ColoringError(f"edge {e} already colored {self.colors[e]}")
        u, v = self.graph.edges[e]
        bit = 1 << c
        if self.present[u] & bit or self.present[v] & bit:
            raise ColoringError(f"color {c} clashes at an endpoint of edge {e}=({u},{v})")
        self.colors[e] = c
        self.present[u] |= bit
        self.present[v] |= bit
        self.at[u][c] = e
        self.at[v][c] = e

    def unassign(self, e: int) -> int:
        if e in self.frozen:
            raise FrozenEdgeError(f"edge {e} is frozen")
        return self._clear(e)

    def _clear(self, e: int) -> int:
        c = self.colors[e]
        if not c:
            return 0
        u, v = self.graph.edges[e]
        bit = 1 << c
        self.colors[e] = 0
        self.present[u] &= ~bit
        self.present[v] &= ~bit
        self.at[u][c] = -1
        self.at[v][c] = -1
        return c

    def freeze(self, eids: Iterable[int]) -> None:
        eids = set(eids)
        for e in eids:
            if not self.colors[e]:
                raise ColoringError(f"cannot freeze uncolored edge {e}")
        self.frozen |= eids

    def recolor(self, e: int, c: int) -> None:
        """Move edge ``e`` to color ``c`` (frozen check applies)."""
        self.unassign(e)
        self.assign(e, c)

    def reassign_many(self, new_colors: dict[int, int], allow_frozen: bool = False) -> None:
        """Atomically recolor several edges; raises and rolls back if the result is improper."""
        if not allow_frozen:
            bad = set(new_colors) & self.frozen
            if bad:
                raise FrozenEdgeError(f"frozen edges {sorted(bad)}")
        old = {e: self.colors[e] for e in new_colors}
        for e in new_colors:
            self._clear(e)
        try:
            for e, c in new_colors.items():
                if c:
                    self.assign(e, c)
        except ColoringError:
            for e in new_colors:
                self._clear(e)
            for e, c in old.items():
                if c:
                    self.assign(e, c)
            raise

    def recompute(self) -> tuple[list[int], list[list[int]]]:
        """Present bitsets and color tables rebuilt from ``colors`` alone (oracle for tests)."""
        present = [0] * self.graph.n
        at = [[-1] * (self.k + 1) for _ in range(self.graph.n)]
        for e, c in enumerate(self.colors):
            if c:
                u, v = self.graph.edges[e]
                present[u] |= 1 << c
                present[v] |= 1 << c
                at[u][c] = e
                at[v][c] = e
        return present, at


def blank(graph: MultiGraph, k: int) -> PartialColoring:
    return PartialColoring(graph, k)


def from_colors(graph: MultiGraph, colors: list[int], k: int | None = None) -> PartialColoring:
    """Build a coloring from a per-edge color list; raises if it is not proper."""
    if len(colors) != graph.m:
        raise ColoringError(f"expected {graph.m} colors, got {len(colors)}")
    k = max(colors, default=0) if k is None else k
    pc = PartialColoring(graph, k)
    for e, c in enumerate(colors):
        if c:
            pc.assign(e, c)
    return pc


# -- Kempe chains ----------------------------------------------------

@dataclass
class KempeChain:
    alpha: int
    beta: int
    edges: list[int]
    kind: str  # "path" or "cycle"
    endpoints: tuple[int, ...]
    vertices: list[int]

    def __len__(self) -> int:
        return len(self.edges)


def _walk(pc: PartialColoring, start: int, first: int, other: int, stop_edge: int = -1):
    """Follow alternating colors from ``start`` beginning with ``first``."""
    edges: list[int] = []
    verts = [start]
    v, c = start, first
    while True:
        e = pc.at[v][c]
        if e < 0 or e == stop_edge:
            return edges, verts, False
        if edges and e == edges[0]:
            return edges, verts, True
        edges.append(e)
        v = pc.graph.other(e, v)
        verts.append(v)
        c = other if c == first else first
        if v == start and pc.at[v][c] == edges[0]:
            return edges, verts, True


def kempe_chain(pc: PartialColoring, start: int, alpha: int, beta: int) -> KempeChain:
    """Maximal (alpha, beta)-alternating component through ``start``."""
    if alpha == beta:
        raise ColoringError("kempe_chain needs two distinct colors")
    ea, eb = pc.at[start][alpha], pc.at[start][beta]
    if ea < 0 and eb < 0:
        return KempeChain(alpha, beta, [], "path", (start,), [start])
    if ea >= 0 and eb >= 0:
        fwd, fv, cyc = _walk(pc, start, alpha, beta)
        if cyc:
            return KempeChain(alpha, beta, fwd, "cycle", (), fv[:-1])
        back, bv, _ = _walk(pc, start, beta, alpha)
        edges = list(reversed(back)) + fwd
        verts = list(reversed(bv)) + fv[1:]
        return KempeChain(alpha, beta, edges, "path", (verts[0], verts[-1]), verts)
    first = alpha if ea >= 0 else beta
    fwd, fv, _ = _walk(pc, start, first, beta if first == alpha else alpha)
    return KempeChain(alpha, beta, fwd, "path", (fv[0], fv[-1]), fv)


def switch(pc: PartialColoring, chain: KempeChain) -> None:
    """Kempe change: swap alpha and beta along ``chain``."""
    if any(e in pc.frozen for e in chain.edges):
        raise FrozenEdgeError("chain contains a frozen edge")
    a, b = chain.alpha, chain.beta
    old = [pc._clear(e) for e in chain.edges]
    for e, c in zip(chain.edges, old):
        pc.assign(e, b if c == a else a)


def component_sweep(pc: PartialColoring, alpha: int, beta: int) -> list[KempeChain]:
    """All (alpha, beta)-chains that contain at least one edge."""
    seen: set[int] = set()
    out = []
    for e, c in enumerate(pc.colors):
        if c in (alpha, beta) and e not in seen:
            u, _ = pc.graph.edges[e]
            ch = kempe_chain(pc, u, alpha, beta)
            seen.update(ch.edges)
            out.append(ch)
    return out


# -- verifiers -------------------------------------------------------

def verify_proper(pc: PartialColoring) -> bool:
    """Recheck properness from the raw color list, ignoring the cached tables."""
    seen: set[tuple[int, int]] = set()
    for e, c in enumerate(pc.colors):
        if not c:
            continue
        if not 1 <= c <= pc.k:
            return False
        for v in pc.graph.edges[e]:
            if (v, c) in seen:
                return False
            seen.add((v, c))
    return True


def vertex_sets(pc: PartialColoring) -> list[int]:
    present = [0] * pc.graph.n
    for e, c in enumerate(pc.colors):
        u, v = pc.graph.edges[e]
        present[u] |= 1 << c
        present[v] |= 1 << c
    return present


def vertex_sums(pc: PartialColoring) -> list[int]:
    sums = [0] * pc.graph.n
    for e, c in enumerate(pc.colors):
        u, v = pc.graph.edges[e]
        sums[u] += c
        sums[v] += c
    return sums


def _require_total(pc: PartialColoring) -> None:
    if not pc.is_total():
        raise ColoringError("verifier needs a total coloring")


def _all_distinct_sorted(values: list[int]) -> bool:
    s = sorted(values)
    return all(a != b for a, b in zip(s, s[1:]))


def verify_vd(pc: PartialColoring) -> bool:
    _require_total(pc)
    return _all_distinct_sorted(vertex_sets(pc))


def verify_sd(pc: PartialColoring) -> bool:
    _require_total(pc)
    return _all_distinct_sorted(vertex_sums(pc))


def explain_violation(pc: PartialColoring, mode: str = "proper") -> str | None:
    """First violated constraint in words, or None; ``mode`` is proper, vd or sd."""
    seen: dict[tuple[int, int], int] = {}
    for e, c in enumerate(pc.colors):
        if not c:
            return f"uncolored: edge {e}"
        if not 1 <= c <= pc.k:
            return f"palette: edge {e} has color {c} outside [1, {pc.k}]"
        for v in pc.graph.edges[e]:
            if (v, c) in seen:
                return f"proper: color {c} on edges {seen[(v, c)]} and {e} at vertex {v}"
            seen[(v, c)] = e
    if mode == "proper":
        return None
    keys = vertex_sets(pc) if mode == "vd" else vertex_sums(pc)
    first: dict[int, int] = {}
    for v, key in enumerate(keys):
        if key in first:
            what = "color set" if mode == "vd" else f"sum {key}"
            return f"{mode}: vertices {first[key]} and {v} share the same {what}"
        first[key] = v
    return None


def parity_check(pc: PartialColoring) -> bool:
    n = pc.graph.n
    return all(pc.missing_count(c) % 2 == n % 2 for c in range(1, pc.k + 1))


def class_sizes(pc: PartialColoring) -> dict[int, int]:
    sizes = {c: 0 for c in range(1, pc.k + 1)}
    for c in pc.colors:
        if c:
            sizes[c] += 1
    return sizes


def missing_spread(pc: PartialColoring, colors: Iterable[int] | None = None) -> int:
    cols = list(range(1, pc.k + 1)) if colors is None else list(colors)
    if not cols:
        return 0
    counts = [pc.missing_count(c) for c in cols]
    return max(counts) - min(counts)


def is_perfect_matching_class(pc: PartialColoring, c: int) -> bool:
    bit = 1 << c
    return all(p & bit for p in pc.present)


# -- dump format -----------------------------------------------------

def dump_coloring(pc: PartialColoring) -> str:
    g = pc.graph
    lines = [f"coloring {g.n} {g.m} {pc.k}"]
    for e, (u, v) in enumerate(g.edges):
        lines.append(f"e {e} {u} {v} {pc.colors[e]}")
    sets = vertex_sets(pc)
    sums = vertex_sums(pc)
    for v in range(g.n):
        cols = " ".join(str(c) for c in bits(sets[v] & ~1))
        lines.append(f"v {v} {sums[v]} {cols}".rstrip())
    return "\n".join(lines) + "\n"


@dataclass
class ColoringFile:
    n: int
    m: int
    k: int
    edges: list[tuple[int, int]]
    colors: list[int]
    labels: dict[int, tuple[int, list[int]]]


def parse_coloring(text: str) -> ColoringFile:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or rows[0][0] != "coloring" or len(rows[0]) != 4:
        raise ColoringError("missing 'coloring n m k' header")
    try:
        n, m, k = (int(x) for x in rows[0][1:])
    except ValueError as exc:
        raise ColoringError(f"malformed header {' '.join(rows[0])!r}") from exc
    edges: list[tuple[int, int] | None] = [None] * m
    colors = [0] * m
    labels: dict[int, tuple[int, list[int]]] = {}
    for row in rows[1:]:
        try:
            if row[0] == "e" and len(row) == 5:
                e, u, v, c = (int(x) for x in row[1:])
                if not 0 <= e < m:
                    raise ColoringError(f"edge id {e} out of range")
                edges[e] = (u, v)
                colors[e] = c
            elif row[0] == "v" and len(row) >= 3:
                labels[int(row[1])] = (int(row[2]), [int(x) for x in row[3:]])
            else:
                raise ColoringError(f"malformed record {' '.join(row)!r}")
        except ValueError as exc:
            raise ColoringError(f"malformed record {' '.join(row)!r}") from exc
    if any(e is None for e in edges):
        raise ColoringError("coloring file is missing edge records")
    return ColoringFile(n, m, k, edges, colors, labels)  # type: ignore[arg-type]
