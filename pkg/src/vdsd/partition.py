"""Balanced bipartition of V with small per-vertex side-degree discrepancy."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .graph import MultiGraph


class PartitionError(RuntimeError):
    def __init__(self, msg: str, achieved: int | None = None):
        super().__init__(msg)
        self.achieved = achieved


@dataclass
class Partition:
    side: list[int]  # 0 = A, 1 = B
    d_a: list[int]
    d_b: list[int]
    seed: int
    restarts: int = 0

    @property
    def a(self) -> list[int]:
        return [v for v, s in enumerate(self.side) if s == 0]

    @property
    def b(self) -> list[int]:
        return [v for v, s in enumerate(self.side) if s == 1]

    @property
    def discrepancy(self) -> int:
        return max((abs(x - y) for x, y in zip(self.d_a, self.d_b)), default=0)

    def to_bits(self) -> str:
        return "".join(str(s) for s in self.side)


def default_target(n: int) -> int:
    # ceil((n/2)^(2/3)), nudged against float round-off at perfect cubes
    x = (n / 2) ** (2 / 3)
    r = round(x)
    return r if abs(x - r) < 1e-9 else math.ceil(x)


def side_degrees(graph: MultiGraph, side: list[int]) -> tuple[list[int], list[int]]:
    d_a = [0] * graph.n
    d_b = [0] * graph.n
    for u, v in graph.edges:
        if side[v] == 0:
            d_a[u] += 1
        else:
            d_b[u] += 1
        if side[u] == 0:
            d_a[v] += 1
        else:
            d_b[v] += 1
    return d_a, d_b


def certify(graph: MultiGraph, part: Partition, pairs, target: int) -> bool:
    side = part.side
    if side.count(0) != side.count(1):
        return False
    if any(side[x] == side[y] for x, y in pairs):
        return False
    d_a, d_b = side_degrees(graph, side)
    if d_a != part.d_a or d_b != part.d_b:
        return False
    return part.discrepancy <= target


def balanced_partition(
    graph: MultiGraph,
    pairs=(),
    seed: int = 0,
    target: int | None = None,
    restarts: int = 20,
    swaps_per_restart: int | None = None,
) -> Partition:
    """Equal halves, every pair split, max |d_A(v) - d_B(v)| <= target (default ceil((n/2)^(2/3))).

    Random start honouring the pairs, then steepest-descent swaps of one A vertex
    with one B vertex (or flipping a pair). Restarts on plateaus. The returned
    partition is re-certified from scratch.
    """
    n = graph.n
    if n % 2:
        raise PartitionError(f"need an even vertex count, got {n}")
    pairs = [tuple(p) for p in pairs]
    flat = [v for p in pairs for v in p]
    if len(flat) != len(set(flat)):
        raise PartitionError("pairs overlap")
    if any(not 0 <= v < n for v in flat) or any(x == y for x, y in pairs):
        raise PartitionError("invalid pair")
    target = default_target(n) if target is None else target
    budget = 10 * n * n if swaps_per_restart is None else swaps_per_restart
    mult = np.zeros((n, n), dtype=np.int64)
    for u, v in graph.edges:
        mult[u, v] += 1
        mult[v, u] += 1
    deg = mult.sum(axis=1)
    partner = {x: y for x, y in pairs} | {y: x for x, y in pairs}
    free = [v for v in range(n) if v not in partner]

    best_seen = None
    for attempt in range(restarts):
        run_seed = seed * 1_000_003 + attempt
        rng = random.Random(run_seed)
        side = np.zeros(n, dtype=np.int64)
        for x, y in pairs:
            if rng.random() < 0.5:
                x, y = y, x
            side[y] = 1
        shuffled = free[:]
        rng.shuffle(shuffled)
        for v in shuffled[: len(shuffled) // 2]:
            side[v] = 1
        disc = deg - 2 * (mult @ side)  # d_A - d_B
        for _ in range(budget):
            worst = int(np.abs(disc).max()) if n else 0
            if worst <= target:
                break
            moved = _best_swap(mult, side, disc, target, partner)
            if moved is None:
                break
            x, y = moved
            disc = disc + 2 * (mult[:, y] - mult[:, x])
            side[x], side[y] = 1, 0
        worst = int(np.abs(disc).max()) if n else 0
        if best_seen is None or worst < best_seen:
            best_seen = worst
        if worst <= target:
            side_l = [int(s) for s in side]
            d_a, d_b = side_degrees(graph, side_l)
            part = Partition(side_l, d_a, d_b, run_seed, attempt)
            if not certify(graph, part, pairs, target):
                raise PartitionError("internal: partition failed certification")
            return part
    raise PartitionError(
        f"no partition with discrepancy <= {target} after {restarts} restarts (best {best_seen})",
        achieved=best_seen,
    )


def _cost(disc: np.ndarray, target: int) -> np.ndarray:
    over = np.maximum(np.abs(disc) - target, 0)
    return (over * over).sum(axis=-1) * 1000 + (disc * disc).sum(axis=-1)


def _best_swap(mult, side, disc, target, partner):
    """Steepest admissible swap (x from A to B, y from B to A); None on a plateau."""
    a_idx = np.flatnonzero(side == 0)
    b_idx = np.flatnonzero(side == 1)
    # new_disc[i, j, :] for moving a_idx[i] to B and b_idx[j] to A
    new = disc[None, None, :] + 2 * (mult[b_idx][None, :, :] - mult[a_idx][:, None, :])
    cost = _cost(new, target)
    if partner:
        ok = np.ones(cost.shape, dtype=bool)
        for i, x in enumerate(a_idx):
            if x in partner:
                ok[i, :] = False
                j = np.flatnonzero(b_idx == partner[x])
                ok[i, j] = True
        for j, y in enumerate(b_idx):
            if y in partner:
                rows = np.ones(len(a_idx), dtype=bool)
                rows[np.flatnonzero(a_idx == partner[y])] = False
                ok[rows, j] = False
        cost = np.where(ok, cost, np.iinfo(np.int64).max)
    flat = int(cost.argmin())
    i, j = divmod(flat, len(b_idx))
    if cost[i, j] >= _cost(disc, target):
        return None
    return int(a_idx[i]), int(b_idx[j])
