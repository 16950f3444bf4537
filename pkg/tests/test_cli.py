import json

import pytest

from tpng.cli import main, parse_partition


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_parse_partition_formats():
    assert parse_partition("1|2,3", 3) == [[1], [2, 3]]
    assert parse_partition("1-2|3-4", 4) == [[1, 2], [3, 4]]
    with pytest.raises(ValueError):
        parse_partition("1,3|2", 3)


def test_verify_weights_stochastic(capsys):
    code, out = run(capsys, "verify-weights", "--n", "2")
    rep = json.loads(out.out)
    assert code == 0 and rep["pass"] and rep["check"] == "stochastic"


def test_verify_weights_ignorance_and_partition(capsys):
    assert run(capsys, "verify-weights", "--n", "3", "--m", "2")[0] == 0
    code, out = run(capsys, "verify-weights", "--n", "3", "--partition", "1|2-3")
    assert code == 0 and json.loads(out.out)["pass"]


def test_verify_weights_bad_partition(capsys):
    code, out = run(capsys, "verify-weights", "--n", "3", "--partition", "1|3")
    assert code == 2 and "error" in out.err


def test_simulate_writes_svg_and_json(tmp_path, capsys):
    svg, js = tmp_path / "d.svg", tmp_path / "d.json"
    code, _ = run(capsys, "simulate", "--t", "0.5", "--size", "8", "--seed", "1", "--svg", str(svg), "--json", str(js))
    assert code == 0 and svg.read_text().startswith("<svg")
    data = json.loads(js.read_text())
    assert set(data) >= {"nucleations", "crossings", "corners", "in", "out", "far_corner_height"}


def test_simulate_summary_with_boundary(capsys):
    code, out = run(capsys, "simulate", "--t", "0", "--size", "5", "--sources", "1,2", "--sinks", "0.5")
    assert code == 0 and json.loads(out.out)["far_corner_height"] >= 2


def test_simulate_rejects_bad_t(capsys):
    code, out = run(capsys, "simulate", "--t", "2", "--size", "5")
    assert code == 2


def test_colored_superadditivity(capsys):
    code, out = run(capsys, "colored", "--n", "5", "--t", "0.5", "--check-superadditivity")
    data = json.loads(out.out)
    assert code == 0 and data["superadditivity"]["pass"] and len(data["X"]) == 6


def test_hydro_csv(tmp_path, capsys):
    path = tmp_path / "h.csv"
    code, out = run(capsys, "hydro", "--t", "0,0.5", "--size", "10", "--replicas", "3", "--csv", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "kind,t,s,seed,observable,value" and len(lines) == 7


def test_config_file_with_override(tmp_path, capsys):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"kind": "hydro", "t_values": [0.5], "sizes": [10], "replicas": 2, "seed": 1}))
    code, out = run(capsys, "hydro", "--config", str(cfg), "--replicas", "3")
    data = json.loads(out.out)
    assert code == 0 and data["aggregates"][0]["n"] == 3


def test_resource_guard_exit_code(capsys):
    code, out = run(capsys, "hydro", "--size", "100000", "--replicas", "1", "--max-points", "1000")
    assert code == 2 and "exceeds" in out.err


def test_scaling_and_burke(capsys):
    assert run(capsys, "scaling", "--t", "0.5", "--replicas", "20", "--x", "5", "--y", "5")[0] == 0
    assert run(capsys, "burke", "--t", "0.5", "--size", "10", "--replicas", "5", "--lambda", "1")[0] == 0


def test_verify_all_quick(capsys):
    code, out = run(capsys, "verify-all", "--level", "quick")
    data = json.loads(out.out)
    assert code == 0 and data["pass"] and data["failures"] == []
