import csv
import io
import json

import pytest

from tpng.experiments import (
    CSV_HEADER,
    ExperimentSpec,
    ResourceGuardError,
    hydro_target,
    non_increasing_up_to,
    replica_seed,
    run_experiment,
    thread_cap,
)


def small(kind, **kw):
    base = dict(kind=kind, t_values=[0.0, 0.5], sizes=[10, 20], replicas=4, seed=3)
    base.update(kw)
    return ExperimentSpec(**base)


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(kind="nope")
    with pytest.raises(ValueError):
        ExperimentSpec(kind="hydro", replicas=0)
    with pytest.raises(ValueError):
        ExperimentSpec(kind="hydro", t_values=[1.5])
    with pytest.raises(ValueError):
        ExperimentSpec(kind="hydro", sizes=[0])


def test_hydro_target_and_monotonicity_helper():
    assert hydro_target(0.0) == 2.0
    assert hydro_target(0.75) == pytest.approx(4.0)
    assert non_increasing_up_to([4, 3, 3.5, 2])
    assert not non_increasing_up_to([4, 5, 3, 3.5])


def test_replica_seeds_distinct():
    spec = small("hydro")
    seeds = {replica_seed(spec, t, s, r) for t in spec.t_values for s in spec.sizes for r in range(spec.replicas)}
    assert len(seeds) == 16


@pytest.mark.parametrize("kind,extra", [
    ("hydro", {}),
    ("alpha-lln", {}),
    ("coupling", {}),
    ("colored", {"sizes": [4, 6]}),
    ("scaling", {"options": {"x": 8.0, "y": 8.0, "scale": 2.0}}),
    ("burke", {"t_values": [0.5], "sizes": [15], "options": {"lambda": 1.0, "times": [5.0]}}),
])
def test_rerun_is_byte_identical(tmp_path, kind, extra):
    csv_path, json_path = tmp_path / "out.csv", tmp_path / "out.json"
    spec = dict(csv_path=str(csv_path), json_path=str(json_path), **extra)
    out = []
    for _ in range(2):
        run_experiment(small(kind, **spec))
        out.append((csv_path.read_bytes(), json_path.read_bytes()))
        csv_path.unlink()
        json_path.unlink()
    assert out[0] == out[1]
    assert out[0][0].decode().splitlines()[0] == CSV_HEADER


def test_parallel_equals_serial(monkeypatch):
    monkeypatch.setenv("TPNG_THREADS", "2")
    par = run_experiment(small("hydro", threads=2))
    ser = run_experiment(small("hydro", threads=1))
    assert sorted(par.rows) == sorted(ser.rows)
    assert par.csv_text() == ser.csv_text()


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("TPNG_THREADS", "3")
    assert thread_cap() == 3
    assert thread_cap(8) == 3
    assert thread_cap(1) == 1


def test_seed_changes_output():
    a = run_experiment(small("hydro")).csv_text()
    b = run_experiment(small("hydro", seed=4)).csv_text()
    assert a != b


def test_csv_rows_parse():
    res = run_experiment(small("hydro"))
    rows = list(csv.DictReader(io.StringIO(res.csv_text())))
    assert len(rows) == 16
    assert {r["observable"] for r in rows} == {"N/s"}
    assert all(float(r["value"]) >= 0 for r in rows)


def test_hydro_checks_structure():
    res = run_experiment(small("hydro"))
    assert set(res.checks) == {"t=0", "t=0.5"}
    assert len(res.checks["t=0"]["abs_errors"]) == 2
    json.dumps(res.to_json())


def test_alpha_identity_residual_zero():
    res = run_experiment(small("alpha-lln"))
    assert res.checks["identity_residual_zero"]


def test_coupling_no_violations():
    assert run_experiment(small("coupling", t_values=[0.5, 0.9])).checks["violations"] == 0


def test_colored_rejects_fractional_box():
    with pytest.raises(ValueError):
        run_experiment(small("colored", sizes=[2.5]))


def test_resource_guard():
    with pytest.raises(ResourceGuardError):
        run_experiment(small("hydro", sizes=[10_000], max_points=1e6))
    with pytest.raises(ResourceGuardError):
        run_experiment(small("scaling", options={"x": 1e4, "y": 1e4}, max_points=1e6))


def test_scaling_negative_control_detected():
    res = run_experiment(ExperimentSpec(kind="scaling", t_values=[0.5], replicas=300, seed=1,
                                        options={"x": 10.0, "y": 10.0, "scale": 2.0, "area_factor": 2.0}))
    assert res.aggregates[0]["verdict"] == "fail"
