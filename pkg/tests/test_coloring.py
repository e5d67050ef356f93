import random

import pytest
from hypothesis import given, settings, strategies as st

from vdsd.coloring import (
    ColoringError,
    FrozenEdgeError,
    PartialColoring,
    class_sizes,
    component_sweep,
    dump_coloring,
    explain_violation,
    from_colors,
    kempe_chain,
    parity_check,
    parse_coloring,
    switch,
    verify_proper,
    verify_sd,
    verify_vd,
    vertex_sums,
)
from vdsd.completion import misra_gries
from vdsd.graph import MultiGraph, complete_graph, cycle_graph

from conftest import random_simple_graph


def test_blank_palette():
    pc = PartialColoring(complete_graph(3), 3)
    assert pc.uncolored() == [0, 1, 2]
    assert all(len(pc.missing_set(v)) == 3 for v in range(3))
    pc = PartialColoring(complete_graph(4), 5)
    assert all(pc.missing_count(i) == 4 for i in range(1, 6))


def test_empty_palette_rejects_every_color():
    pc = PartialColoring(complete_graph(3), 0)
    with pytest.raises(ColoringError):
        pc.assign(0, 1)


def test_assign_unassign_inverse():
    pc = PartialColoring(complete_graph(4), 4)
    before = (list(pc.colors), list(pc.present))
    pc.assign(2, 3)
    pc.unassign(2)
    assert (pc.colors, pc.present) == before


def test_assign_conflict_and_recolor():
    pc = PartialColoring(cycle_graph(4), 2)
    pc.assign(0, 1)
    with pytest.raises(ColoringError):
        pc.assign(1, 1)
    with pytest.raises(ColoringError):
        pc.assign(0, 2)
    pc.freeze([0])
    with pytest.raises(FrozenEdgeError):
        pc.unassign(0)


def test_perfect_matching_saturates():
    g = complete_graph(4)
    pc = PartialColoring(g, 3)
    for e, (u, v) in enumerate(g.edges):
        if (u, v) in ((0, 1), (2, 3)):
            pc.assign(e, 1)
    assert pc.missing_count(1) == 0
    assert parity_check(pc)


def path_coloring():
    g = MultiGraph(3, [(0, 1), (1, 2)])
    return from_colors(g, [1, 2], k=3)


def test_kempe_chain_examples():
    pc = path_coloring()
    ch = kempe_chain(pc, 0, 1, 2)
    assert ch.edges == [0, 1] and set(ch.endpoints) == {0, 2}
    pc2 = PartialColoring(MultiGraph(3, [(0, 1), (1, 2)]), 3)
    assert kempe_chain(pc2, 0, 1, 2).edges == []


def test_switch_involution_and_counts():
    # path x - a - b - y colored 2,1,2 where x and y miss color 1
    g = MultiGraph(4, [(0, 1), (1, 2), (2, 3)])
    pc = from_colors(g, [2, 1, 2], k=2)
    assert pc.missing_count(1) == 2
    ch = kempe_chain(pc, 0, 1, 2)
    orig = list(pc.colors)
    switch(pc, ch)
    assert pc.missing_count(1) == 0 and pc.missing_count(2) == 2
    switch(pc, kempe_chain(pc, 0, 1, 2))
    assert pc.colors == orig


def test_switch_on_cycle_keeps_missing_counts():
    pc = from_colors(cycle_graph(6), [1, 2, 1, 2, 1, 2], k=3)
    ch = kempe_chain(pc, 0, 1, 2)
    assert ch.kind == "cycle"
    before = (pc.missing_count(1), pc.missing_count(2))
    switch(pc, ch)
    assert (pc.missing_count(1), pc.missing_count(2)) == before


def test_switch_refuses_frozen():
    pc = path_coloring()
    pc.freeze([1])
    with pytest.raises(FrozenEdgeError):
        switch(pc, kempe_chain(pc, 0, 1, 2))


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 25), st.integers(0, 10**6))
def test_components_partition_edges(n, seed):
    g = random_simple_graph(n, 0.4, seed)
    pc = misra_gries(g)
    rng = random.Random(seed)
    if pc.k < 2:
        return
    a, b = rng.sample(range(1, pc.k + 1), 2)
    comps = component_sweep(pc, a, b)
    seen = [e for ch in comps for e in ch.edges]
    assert sorted(seen) == sorted(e for e, c in enumerate(pc.colors) if c in (a, b))
    verts = {}
    for i, ch in enumerate(comps):
        for v in ch.vertices:
            assert verts.setdefault(v, i) == i


def test_verifier_examples():
    k3 = from_colors(complete_graph(3), [1, 2, 3])
    assert verify_proper(k3) and verify_vd(k3) and verify_sd(k3)
    c4 = from_colors(cycle_graph(4), [1, 2, 1, 2])
    assert verify_proper(c4) and not verify_vd(c4)
    k4 = complete_graph(4)
    colors = [0] * k4.m
    for e, (u, v) in enumerate(k4.edges):
        colors[e] = {frozenset((0, 1)): 1, frozenset((2, 3)): 1, frozenset((0, 2)): 2,
                     frozenset((1, 3)): 2, frozenset((0, 3)): 3, frozenset((1, 2)): 3}[frozenset((u, v))]
    pc = from_colors(k4, colors)
    assert verify_proper(pc) and not verify_vd(pc)


def test_verifiers_need_total():
    pc = PartialColoring(complete_graph(3), 3)
    with pytest.raises(ColoringError):
        verify_vd(pc)
    with pytest.raises(ColoringError):
        verify_sd(pc)


def test_parity_examples():
    k3 = from_colors(complete_graph(3), [1, 2, 3])
    assert parity_check(k3)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.floats(0.1, 0.9), st.integers(0, 10**6))
def test_parity_on_random_total(n, p, seed):
    pc = misra_gries(random_simple_graph(n, p, seed))
    assert verify_proper(pc)
    assert parity_check(pc)


def test_class_sizes():
    sizes = class_sizes(from_colors(cycle_graph(4), [1, 2, 1, 2], k=3))
    assert sizes == {1: 2, 2: 2, 3: 0}


def test_explain_violation_messages():
    k3 = complete_graph(3)
    assert explain_violation(from_colors(k3, [1, 2, 3]), "sd") is None
    pc = PartialColoring(k3, 3)
    assert explain_violation(pc).startswith("uncolored")
    pc.colors = [1, 1, 2]
    assert explain_violation(pc).startswith("proper")
    c4 = from_colors(cycle_graph(4), [1, 2, 1, 2])
    assert explain_violation(c4, "vd").startswith("vd")
    assert explain_violation(c4, "sd").startswith("sd")
    assert explain_violation(c4, "proper") is None


def test_dump_parse_round_trip():
    pc = misra_gries(random_simple_graph(12, 0.5, 3))
    cf = parse_coloring(dump_coloring(pc))
    assert (cf.n, cf.m, cf.k) == (pc.graph.n, pc.graph.m, pc.k)
    assert cf.colors == pc.colors
    assert [s for s, _ in (cf.labels[v] for v in range(cf.n))] == vertex_sums(pc)


@pytest.mark.parametrize("text", ["", "coloring 2 1\n", "coloring a b c\n", "coloring 2 1 1\n",
                                  "coloring 2 1 1\ne 0 0 1\n", "coloring 2 1 1\ne 5 0 1 1\n"])
def test_parse_coloring_errors(text):
    with pytest.raises(ColoringError):
        parse_coloring(text)
