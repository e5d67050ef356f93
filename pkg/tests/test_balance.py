import random

import pytest
from hypothesis import given, settings, strategies as st

from vdsd.balance import BalanceError, balance_missing, equitable_edge_coloring
from vdsd.coloring import class_sizes, missing_spread, verify_proper
from vdsd.completion import misra_gries
from vdsd.graph import MultiGraph, complete_graph, random_regular
from vdsd.matching import konig_color

from conftest import random_bipartite_regular, random_simple_graph


def test_class_sizes_floor_ceil_small():
    g = MultiGraph(8, [(0, 1), (2, 3), (4, 5), (6, 7), (0, 2), (4, 6), (1, 3)])
    pc = equitable_edge_coloring(g, 3)
    assert sorted(class_sizes(pc).values()) == [2, 2, 3]


def test_single_class_matching():
    g = MultiGraph(6, [(0, 1), (2, 3), (4, 5)])
    pc = equitable_edge_coloring(g, 1)
    assert class_sizes(pc) == {1: 3}


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 30), st.integers(0, 10**6), st.integers(1, 4))
def test_equitable_random(n, seed, extra):
    g = random_simple_graph(n, 0.4, seed)
    if g.m == 0:
        return
    k = g.max_degree() + extra
    pc = equitable_edge_coloring(g, k, seed)
    sizes = class_sizes(pc).values()
    assert verify_proper(pc) and pc.is_total()
    assert max(sizes) - min(sizes) <= 1


def test_spread_zero_for_perfect_matchings():
    g = random_bipartite_regular(10, 5, 1)
    pc = konig_color(g)
    out, rep = balance_missing(g, pc, set(), 0)
    assert rep.spread == 0 and rep.switches == 0


def test_m_zero_reaches_parity_optimum():
    g = random_simple_graph(30, 0.3, 2)
    pc = misra_gries(g)
    pc.grow_palette(g.max_degree() + 3)
    out, rep = balance_missing(g, pc, set(), 0)
    assert missing_spread(out) == (0 if g.m % pc.k == 0 else 2)


def test_m_zero_literal_bound_is_unreachable_for_k2():
    # K2 with two colors: one color is missing at both ends, the other at neither
    g = MultiGraph(2, [(0, 1)])
    pc = misra_gries(g)
    pc.grow_palette(2)
    out, rep = balance_missing(g, pc, set(), 0)
    assert rep.spread == 2


def test_m_zero_divisible_gives_spread_zero():
    g = random_regular(12, 6, 0)
    pc = misra_gries(g)
    pc.grow_palette(9)
    assert g.m % 9 == 0
    out, rep = balance_missing(g, pc, set(), 0)
    assert rep.spread == 0


def test_random_frozen_multiplicity_two():
    rng = random.Random(5)
    g = random_simple_graph(40, 0.25, 5)
    pc = misra_gries(g)
    pc.grow_palette(g.max_degree() + 2)
    frozen = set()
    for c in range(1, pc.k + 1):
        frozen.update(rng.sample(pc.color_class(c), min(2, len(pc.color_class(c)))))
    out, rep = balance_missing(g, pc, frozen, 2)
    assert rep.spread <= 9 == 4 * 2 + 1
    assert all(out.colors[e] == pc.colors[e] for e in frozen)
    assert verify_proper(out)
    # the potential strictly decreases
    assert all(b < a for a, b in zip(rep.g_history, rep.g_history[1:]))


def test_restricted_palette():
    g = random_regular(20, 9, 3)
    pc = misra_gries(g)
    pc.grow_palette(14)
    cols = list(range(1, 12))
    out, _ = balance_missing(g, pc, set(), 1, colors=cols)
    assert missing_spread(out, cols) <= 5


def test_frozen_multiplicity_too_large():
    g = complete_graph(6)
    pc = misra_gries(g)
    frozen = set(pc.color_class(1))
    with pytest.raises(BalanceError):
        balance_missing(g, pc, frozen, len(frozen) - 1)


def test_needs_total():
    from vdsd.coloring import PartialColoring

    g = complete_graph(4)
    with pytest.raises(BalanceError):
        balance_missing(g, PartialColoring(g, 3), set(), 1)
