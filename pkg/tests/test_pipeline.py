import json
import math

import pytest

from vdsd.coloring import parity_check, verify_proper, verify_sd, verify_vd, vertex_sums
from vdsd.design import expected_sums
from vdsd.graph import complete_graph, complete_minus_perfect_matching, cycle_graph, random_regular
from vdsd.pipeline import PipelineError, nominal_ell, nominal_k, run, run_sd, run_vd


def test_nominal_parameters_exceed_palette():
    # at desk scale the prescribed k already exceeds the whole palette
    assert nominal_k(22, 12 * 11 // 2) > 22
    assert nominal_ell(100) >= math.ceil(100 ** (5 / 6))


def test_vd_complete_minus_matching():
    G = complete_minus_perfect_matching(20)
    pc, rep = run_vd(G)
    assert verify_proper(pc) and verify_vd(pc)
    assert rep.palette["size"] == 20
    assert rep.passed


@pytest.mark.parametrize("n,d,seed", [(12, 7, 0), (16, 9, 1), (24, 14, 2), (30, 20, 3)])
def test_vd_random(n, d, seed):
    pc, rep = run_vd(random_regular(n, d, seed), seed=seed)
    assert pc.is_total() and verify_vd(pc)
    assert len(pc.used_colors()) >= d + 2  # counting bound
    assert max(pc.colors) <= d + 2


def test_threshold_warning_recorded():
    pc, rep = run_vd(random_regular(20, 8, 1))
    th = {b.name: b for b in rep.thresholds}
    assert not th["d>=(1+eps)n/2"].ok
    assert rep.verdict["proper"]


@pytest.mark.parametrize("n,d,seed", [(12, 9, 1), (14, 10, 0), (16, 11, 2), (24, 16, 4)])
def test_sd_random(n, d, seed):
    pc, rep = run_sd(random_regular(n, d, seed), seed=seed)
    assert verify_proper(pc) and verify_sd(pc)
    assert rep.sums_match
    assert rep.palette["size"] == d + 2
    before = rep.step("step6_recolor").bounds[0]
    assert before.ok


def test_sd_sums_match_closed_form():
    G = random_regular(12, 9, 1)
    pc, rep = run_sd(G, seed=1)
    plan = rep.plan
    s = sum(c for c in range(1, 12) if c not in plan["C0"])
    exp = expected_sums(plan["q"], plan["r"], s=s)
    sums = vertex_sums(pc)
    labelled = {}
    for name, verts in plan["labels"].items():
        for i, v in enumerate(verts, start=1):
            if v >= 0:
                labelled[v] = (name, i)
    assert all(sums[v] == exp[labelled[v]] if v in labelled else sums[v] == s for v in range(12))


def test_k6_sd_uses_seven_colors():
    pc, rep = run_sd(complete_graph(6))
    assert verify_sd(pc) and len(pc.used_colors()) == 7


def test_input_checks():
    with pytest.raises(PipelineError):
        run_vd(cycle_graph(5))
    with pytest.raises(PipelineError):
        run("xx", complete_graph(4))


def test_fallback_off_raises_when_needed():
    with pytest.raises(PipelineError):
        run_vd(random_regular(12, 7, 0), fallback=False)


def test_report_serialization_is_deterministic():
    G = random_regular(16, 11, 5)
    a = run_sd(G, seed=5)[1].to_dict(timestamps=False)
    b = run_sd(G, seed=5)[1].to_dict(timestamps=False)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    for key in ("steps", "fallbacks", "verdict", "palette"):
        assert key in a
    assert {"name", "required", "measured", "ok"} <= set(a["steps"][1]["bounds"][0])
    assert set(a["palette"]) >= {"size", "unused"}


def test_step_checkpoints():
    pc, rep = run_vd(random_regular(24, 14, 7), seed=7)
    names = [s.name for s in rep.steps]
    assert names[:3] == ["step1_partition", "step2_extend", "step3_saturate"]
    spread = next(b for b in rep.step("step2_extend").bounds if b.name.startswith("missing spread"))
    assert spread.ok or "step2:balance" in rep.fallbacks
    final = rep.steps[-2]
    assert all(b.ok for b in final.bounds if b.name in ("uncolored edges", "palette exact", "parity"))
    assert parity_check(pc)
    assert "parity" in rep.to_text(timestamps=False)
