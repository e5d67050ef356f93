import random

import pytest
from hypothesis import given, settings, strategies as st

from vdsd.coloring import PartialColoring, from_colors, verify_proper
from vdsd.completion import misra_gries
from vdsd.graph import MultiGraph, random_regular
from vdsd.multifan import (
    ExtensionError,
    build_maximal_multifan,
    extend_precoloring,
    is_linear_sequence,
    is_multifan,
    extension_palette,
    restricted_fan,
    shift,
    unshift,
)

from conftest import random_precoloring, random_simple_graph


def star_example():
    # center 0; e0 = 0-1 uncolored, e1 = 0-2 colored 1, e2 = 0-3 colored 2
    # 1 is missing at s0=1; 2 is missing at s1=2 (s1 carries only color 1 here)
    g = MultiGraph(4, [(0, 1), (0, 2), (0, 3)])
    pc = PartialColoring(g, 3)
    pc.assign(1, 1)
    pc.assign(2, 2)
    return pc


def test_star_fan():
    pc = star_example()
    fan = build_maximal_multifan(pc, 0, center=0)
    assert fan.edges == [0, 1, 2]
    assert fan.vertices == [1, 2, 3]
    assert is_multifan(pc, fan)


def test_blocked_fan_is_trivial():
    # every color used at the center is present at s0
    g = MultiGraph(6, [(0, 1), (0, 2), (1, 3), (0, 4), (1, 5)])
    pc = PartialColoring(g, 2)
    pc.assign(1, 1)
    pc.assign(2, 1)
    pc.assign(3, 2)
    pc.assign(4, 2)
    fan = build_maximal_multifan(pc, 0, center=0)
    assert fan.edges == [0]


def test_one_step_shift_and_inverse():
    pc = star_example()
    fan = build_maximal_multifan(pc, 0, center=0)
    before = list(pc.colors)
    shift(pc, fan, [0, 1], 1)
    assert pc.colors[0] == 1 and pc.colors[1] == 0
    assert verify_proper(pc)
    unshift(pc, fan, [0, 1], 1)
    assert pc.colors == before


def test_shift_rejects_bad_sequence():
    pc = star_example()
    fan = build_maximal_multifan(pc, 0, center=0)
    with pytest.raises(ExtensionError):
        shift(pc, fan, [1, 2], 1)


def _uncolor_random(seed, n=18, p=0.5):
    g = random_simple_graph(n, p, seed)
    if g.m == 0:
        return None
    pc = misra_gries(g)
    e0 = random.Random(seed).randrange(g.m)
    pc.unassign(e0)
    return pc, e0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_fan_prefixes_revalidate(seed):
    got = _uncolor_random(seed)
    if got is None:
        return
    pc, e0 = got
    fan = build_maximal_multifan(pc, e0)
    for p in range(len(fan)):
        assert is_multifan(pc, fan.prefix(p))
    for i in range(len(fan)):
        assert is_linear_sequence(pc, fan, fan.linear_sequence_to(i))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_shift_leaves_one_uncolored_at_center(seed):
    got = _uncolor_random(seed)
    if got is None:
        return
    pc, e0 = got
    fan = build_maximal_multifan(pc, e0)
    i = len(fan) - 1
    if i == 0:
        return
    seq = fan.linear_sequence_to(i)
    before = list(pc.colors)
    shift(pc, fan, seq, len(seq) - 1)
    assert verify_proper(pc)
    r = fan.center
    assert sum(1 for e, w in pc.graph.incidence[r] if pc.colors[e] == 0) == 1
    unshift(pc, fan, seq, len(seq) - 1)
    assert pc.colors == before


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_restricted_fan_avoids_blocked(seed):
    got = _uncolor_random(seed)
    if got is None:
        return
    pc, e0 = got
    fan = build_maximal_multifan(pc, e0)
    blocked = set(fan.edges[1::2])
    sub = restricted_fan(pc, fan, blocked)
    assert not blocked & set(sub.edges[1:])
    assert is_multifan(pc, sub)


def test_extension_empty_q():
    g = random_regular(16, 9, 1)
    pc, stats = extend_precoloring(g, set(), {}, 1, 1, 1)
    assert pc.is_total() and verify_proper(pc)
    assert max(pc.colors) <= max(1, g.max_degree() + 3)


def test_extension_one_edge():
    g = random_regular(16, 9, 2)
    pc, _ = extend_precoloring(g, {0}, {0: 1}, 1, 1, 1)
    assert pc.colors[0] == 1
    assert max(pc.colors) <= g.max_degree() + 3


@pytest.mark.parametrize("seed", range(5))
def test_extension_pipeline_shape(seed):
    g = random_regular(30, 18, seed)
    q, pre = random_precoloring(g, 3, 4, g.max_degree() + 1, seed)
    pc, stats = extend_precoloring(g, q, pre, 3, 4, g.max_degree() + 1)
    assert all(pc.colors[e] == c for e, c in pre.items())
    assert max(pc.colors) <= extension_palette(g, g.max_degree() + 1, 3, 4) == g.max_degree() + 47
    assert verify_proper(pc) and pc.is_total()


def test_extension_input_checks():
    g = random_regular(10, 5, 0)
    with pytest.raises(ExtensionError):
        extend_precoloring(g, {0}, {0: 1}, 0, 1, 1)
    with pytest.raises(ExtensionError):
        extend_precoloring(g, {0, 1}, {0: 1}, 1, 1, 1)
    incident = [e for e, _ in g.incidence[0]][:2]
    with pytest.raises(ExtensionError):
        extend_precoloring(g, set(incident), {incident[0]: 1, incident[1]: 2}, 1, 1, 2)
