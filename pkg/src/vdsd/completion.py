"""Edge-coloring completion kernels built on Kempe changes.

``misra_gries`` gives a (Delta+1)-coloring of a simple graph. ``kempe_complete``
is a randomized repair loop that finishes a partial coloring inside a fixed
palette while leaving frozen edges alone; it is the general-purpose fallback
used when a constructive step cannot certify its own preconditions.
"""

from __future__ import annotations

import random

from .coloring import ColoringError, PartialColoring, bits, kempe_chain, switch
from .graph import MultiGraph


class CompletionError(ColoringError):
    pass


def lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def greedy_fill(pc: PartialColoring, order=None, allowed: int | None = None) -> int:
    """Color every uncolored edge that has a common missing color; returns how many."""
    allowed = pc.full if allowed is None else allowed
    done = 0
    for e in (range(pc.graph.m) if order is None else order):
        if pc.colors[e]:
            continue
        u, v = pc.graph.edges[e]
        common = pc.missing(u) & pc.missing(v) & allowed
        if common:
            pc.assign(e, lowest(common))
            done += 1
    return done


def misra_gries(graph: MultiGraph, k: int | None = None) -> PartialColoring:
    """Proper edge coloring of a simple graph with at most Delta+1 colors."""
    if not graph.is_simple():
        raise CompletionError("misra_gries needs a simple graph")
    delta = graph.max_degree()
    k = delta + 1 if k is None else k
    if k < delta + 1:
        raise CompletionError(f"misra_gries needs k >= Delta+1 = {delta + 1}")
    pc = PartialColoring(graph, k)
    index = graph.edge_index()
    for e in range(graph.m):
        _mg_color_edge(pc, e, index)
    return pc


def _mg_color_edge(pc: PartialColoring, e: int, index) -> None:
    u, v = pc.graph.edges[e]
    common = pc.missing(u) & pc.missing(v)
    if common:
        pc.assign(e, lowest(common))
        return

    def edge(a: int, b: int) -> int:
        return index[(min(a, b), max(a, b))][0]

    fan = [v]
    in_fan = {v}
    grown = True
    while grown:
        grown = False
        free = pc.missing(fan[-1])
        for c in bits(free):
            f = pc.at[u][c]
            if f >= 0:
                w = pc.graph.other(f, u)
                if w not in in_fan:
                    fan.append(w)
                    in_fan.add(w)
                    grown = True
                    break
    c = lowest(pc.missing(u))
    d = lowest(pc.missing(fan[-1]))
    if c != d:
        # u misses c; flip the cd-path starting at u so that u misses d instead
        ch = kempe_chain(pc, u, c, d)
        if ch.edges:
            switch(pc, ch)
    # first fan vertex (in order) that is free on d and whose prefix is still a fan
    w_idx = None
    for i, w in enumerate(fan):
        if i > 0 and pc.colors[edge(u, w)] != 0:
            col = pc.colors[edge(u, w)]
            if not pc.missing(fan[i - 1]) >> col & 1:
                break
        if pc.missing(w) >> d & 1:
            w_idx = i
            break
    if w_idx is None:
        raise CompletionError("Misra-Gries fan invariant broken")
    # rotate the prefix fan[0..w_idx]
    shifted = {}
    for i in range(w_idx):
        shifted[edge(u, fan[i])] = pc.colors[edge(u, fan[i + 1])]
    shifted[edge(u, fan[w_idx])] = 0
    pc.reassign_many(shifted, allow_frozen=True)
    pc.assign(edge(u, fan[w_idx]), d)


def kempe_complete(
    pc: PartialColoring,
    allowed: int | None = None,
    rng: random.Random | None = None,
    max_steps: int = 200_000,
    kick: float = 0.25,
) -> int:
    """Color all remaining edges using only ``allowed`` colors; frozen edges never move.

    Each step either colors the chosen edge directly, frees a color at one end by
    a Kempe change that avoids the other end, or moves the uncolored edge one step
    along (assign alpha, uncolor the alpha edge at the far end). With probability
    ``kick`` a stuck step instead changes the color missing at one end, which
    keeps the walk from cycling on a single color pair. Returns the number
    of steps taken; raises ``CompletionError`` when the budget runs out.
    """
    rng = rng or random.Random(0)
    allowed = pc.full if allowed is None else allowed & pc.full
    todo = pc.uncolored()
    pos = {e: i for i, e in enumerate(todo)}

    def drop(e: int) -> None:
        i = pos.pop(e)
        last = todo.pop()
        if last != e:
            todo[i] = last
            pos[last] = i

    def add(e: int) -> None:
        pos[e] = len(todo)
        todo.append(e)

    last_moved = -1
    steps = 0
    while todo:
        steps += 1
        if steps > max_steps:
            raise CompletionError(f"kempe_complete: {len(todo)} edges left after {max_steps} steps")
        e = todo[rng.randrange(len(todo))]
        u, v = pc.graph.edges[e]
        if rng.random() < 0.5:
            u, v = v, u
        mu = pc.missing(u) & allowed
        mv = pc.missing(v) & allowed
        if not mu or not mv:
            raise CompletionError(f"edge {e}: an endpoint has no allowed color left")
        common = mu & mv
        if common:
            pc.assign(e, rng.choice(bits(common)))
            drop(e)
            continue
        alpha = rng.choice(bits(mu))
        beta = rng.choice(bits(mv))
        ch = kempe_chain(pc, v, alpha, beta)
        if u not in ch.endpoints and not any(f in pc.frozen for f in ch.edges):
            switch(pc, ch)
            pc.assign(e, alpha)
            drop(e)
            continue
        if rng.random() < kick:
            # change the color missing at v: switch a (beta, gamma)-chain from v for a random gamma
            gammas = bits(pc.present[v] & allowed & ~(1 << alpha))
            if gammas:
                ch = kempe_chain(pc, v, beta, rng.choice(gammas))
                if u not in ch.vertices and not any(f in pc.frozen for f in ch.edges):
                    switch(pc, ch)
                    continue
        # move the hole: give e color alpha, uncolor v's alpha edge
        f = pc.at[v][alpha]
        if f in pc.frozen or f == last_moved:
            alpha, beta, u, v = beta, alpha, v, u
            f = pc.at[v][alpha]
            if f in pc.frozen:
                continue
        pc._clear(f)
        pc.assign(e, alpha)
        drop(e)
        add(f)
        last_moved = e
    return steps
