import json

import pytest

from vdsd.cli import main
from vdsd.coloring import parse_coloring
from vdsd.graph import read_graph


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_oracle_k4(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--complete", "4", "--mode", "vd")
    assert code == 0 and out.strip() == "5"


def test_oracle_json(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--complete", "3", "--mode", "sd", "--json")
    assert code == 0 and json.loads(out)["value"] == 3


def test_generate_and_color_and_verify(tmp_path, capsys):
    gpath = tmp_path / "g.txt"
    cpath = tmp_path / "c.txt"
    assert run_cli(capsys, "generate", "--n", "12", "--d", "9", "--seed", "1", "--output", str(gpath))[0] == 0
    g = read_graph(gpath.read_text())
    assert g.is_regular(9)
    code, out, _ = run_cli(capsys, "color", "--mode", "sd", "--input", str(gpath), "--seed", "1",
                           "--output", str(cpath), "--json", "--no-timestamps")
    assert code == 0
    rep = json.loads(out)
    assert rep["verdict"]["sd"] is True and rep["palette"]["size"] == 11
    assert rep["config"]["mode"] == "sd" and rep["config"]["seed"] == 1
    code, out, _ = run_cli(capsys, "verify", "--mode", "sd", "--input", str(gpath), "--coloring", str(cpath))
    assert code == 0 and "sd=True" in out

    # tamper: give edge 0 the color of an adjacent edge
    cf = parse_coloring(cpath.read_text())
    u = cf.edges[0][0]
    other = next(e for e in range(1, cf.m) if u in cf.edges[e])
    lines = cpath.read_text().splitlines()
    parts = lines[1].split()
    parts[-1] = str(cf.colors[other])
    lines[1] = " ".join(parts)
    cpath.write_text("\n".join(lines) + "\n")
    code, out, err = run_cli(capsys, "verify", "--mode", "sd", "--input", str(gpath), "--coloring", str(cpath))
    assert code == 1
    assert "proper" in err


def test_color_example_random(capsys):
    code, out, _ = run_cli(capsys, "color", "--mode", "sd", "--n", "12", "--d", "9", "--seed", "1", "--no-timestamps")
    assert code == 0
    assert "sd=True" in out and "palette: size=11" in out
    assert out.startswith("config: ")


def test_color_deterministic(capsys):
    args = ("color", "--mode", "vd", "--n", "16", "--d", "9", "--seed", "3", "--no-timestamps")
    a = run_cli(capsys, *args)[1]
    b = run_cli(capsys, *args)[1]
    assert a == b


def test_verify_swapped_colors_breaks_sd(tmp_path, capsys):
    gpath = tmp_path / "g.txt"
    cpath = tmp_path / "c.txt"
    run_cli(capsys, "generate", "--family", "complete", "--n", "3", "--d", "2", "--output", str(gpath))
    cpath.write_text("coloring 3 3 3\ne 0 0 1 1\ne 1 0 2 2\ne 2 1 2 3\n")
    assert run_cli(capsys, "verify", "--mode", "sd", "--input", str(gpath), "--coloring", str(cpath))[0] == 0
    cpath.write_text("coloring 3 3 3\ne 0 0 1 1\ne 1 0 2 2\ne 2 1 2 2\n")
    code, _, err = run_cli(capsys, "verify", "--mode", "sd", "--input", str(gpath), "--coloring", str(cpath))
    assert code == 1 and "violation" in err


@pytest.mark.parametrize("argv", [
    ["color", "--bogus"],
    ["nosuch"],
    ["color", "--fallback", "maybe", "--n", "12", "--d", "9"],
    ["color"],
])
def test_parse_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_malformed_files_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("not a graph\n")
    assert main(["color", "--input", str(bad)]) == 2
    good = tmp_path / "g.txt"
    main(["generate", "--family", "complete", "--n", "4", "--d", "3", "--output", str(good)])
    assert main(["verify", "--input", str(good), "--coloring", str(bad)]) == 2
    assert main(["verify", "--input", str(good), "--coloring", str(tmp_path / "missing.txt")]) == 2


def test_failed_pipeline_exit_1(capsys):
    code, _, err = run_cli(capsys, "color", "--mode", "vd", "--n", "12", "--d", "7", "--fallback", "off")
    assert code == 1 and "error" in err


def test_bench(capsys):
    code, out, _ = run_cli(capsys, "bench", "--mode", "sd", "--n", "12", "--seeds", "2", "--json", "--no-timestamps")
    assert code == 0
    data = json.loads(out)
    assert data["runs"] == 2 and data["passed"] == 2
    assert any(k.startswith("step2_extend/") for k in data["bounds"])
