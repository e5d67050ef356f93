import pytest
from hypothesis import given, settings, strategies as st

from vdsd.coloring import class_sizes, verify_proper
from vdsd.graph import MultiGraph, complete_bipartite, cycle_graph
from vdsd.matching import MatchingError, check_hall_certificate, hall_matching, konig_color, two_color

from conftest import random_bipartite_regular


def test_even_cycle_two_colors():
    pc = konig_color(cycle_graph(8))
    assert verify_proper(pc) and pc.used_colors() == {1, 2}


def test_k33():
    pc = konig_color(complete_bipartite(3, 3))
    assert pc.is_total() and len(pc.used_colors()) == 3


def test_odd_cycle_rejected():
    with pytest.raises(MatchingError):
        two_color(cycle_graph(5))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.integers(1, 8), st.integers(0, 10**6))
def test_regular_bipartite_matchings(side, r, seed):
    g = random_bipartite_regular(side, r, seed)
    pc = konig_color(g)
    assert pc.is_total() and verify_proper(pc)
    assert len(pc.used_colors()) == r
    assert all(s == side for s in class_sizes(pc).values())


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(0, 10**6), st.floats(0.1, 0.9))
def test_konig_nonregular(side, seed, p):
    import random

    rng = random.Random(seed)
    edges = [(a, side + b) for a in range(side) for b in range(side) if rng.random() < p]
    g = MultiGraph(2 * side, edges + edges[: len(edges) // 3])
    pc = konig_color(g)
    assert pc.is_total() and verify_proper(pc)
    assert max(pc.colors, default=0) <= g.max_degree()


def test_hall_violator():
    left, right = [0, 1, 2], [3, 4, 5]
    edges = [(0, 3), (1, 3), (2, 4), (2, 5)]
    res = hall_matching(left, right, edges)
    assert not res.perfect
    assert check_hall_certificate(res, left, right, edges)
    assert len(res.neighborhood) < len(res.violator)


def test_hall_errors():
    with pytest.raises(MatchingError):
        hall_matching([0, 1], [2], [])
    with pytest.raises(MatchingError):
        hall_matching([0], [1], [(0, 2)])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.integers(0, 10**6), st.floats(0.05, 0.95))
def test_hall_either_certificate(side, seed, p):
    import random

    rng = random.Random(seed)
    left = list(range(side))
    right = list(range(side, 2 * side))
    edges = [(a, b) for a in left for b in right if rng.random() < p]
    res = hall_matching(left, right, edges)
    assert check_hall_certificate(res, left, right, edges)
