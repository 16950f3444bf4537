"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from test_weights import TWO_COLOR_TABLE
from tpng import colored, core, verify, weights
from tpng import stats as st
from tpng.experiments import ExperimentSpec, run_experiment
from tpng.rng import derive_seed
from tpng.stationary import burke_battery, stationarity_battery, stationary_height_moment

SEED = 20240601
LEVEL = 0.01


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def test_c01_stochasticity(criterion):
    with Timer() as tm:
        reps = [weights.verify_stochastic(n) for n in range(1, 6)]
    ok = all(r.passed for r in reps) and tm.seconds < 30
    criterion(1, "exact stochasticity n=1..5", ok, f"{sum(r.checked for r in reps)} inputs, {tm.seconds:.2f}s")
    assert ok


def test_c02_ignorance_and_erasure(criterion):
    with Timer() as tm:
        reps = [weights.verify_color_ignorance(n, m) for n in range(1, 5) for m in range(1, n + 1)]
        reps += [weights.verify_mod2_erasure(n, p) for n in range(1, 5) for p in weights.all_interval_partitions(n)]
    ok = all(r.passed for r in reps) and tm.seconds < 60
    criterion(2, "color ignorance and mod-2 erasure, n <= 4", ok, f"{len(reps)} certificates, {tm.seconds:.2f}s")
    assert ok


def test_c03_two_color_table(criterion):
    with Timer() as tm:
        got = weights.enumerate_nonzero(2)
        brute = sum(weights.ln_weight(weights.VertexConfig(i, j, k, l, 2)) is not weights.Weight.ZERO
                    for i, j, k, l in np.ndindex(4, 4, 4, 4))
    rows = [tuple("".join(map(str, weights.to_tuple(v, 2))) for v in (c.i, c.j, c.k, c.l)) + (str(wt),)
            for c, wt in got]
    ok = len(rows) == brute == len(TWO_COLOR_TABLE) and sorted(rows) == sorted(TWO_COLOR_TABLE) and tm.seconds < 1
    criterion(3, "two-color nonzero table", ok, f"{len(rows)} entries, oracle {brute}, {tm.seconds:.3f}s")
    assert ok


def test_c04_pathwise_identities(criterion):
    with Timer() as tm:
        rep = verify.identity_check(1000, SEED)
    ok = rep["pass"] and tm.seconds < 120
    criterion(4, "N = #alpha - #beta, squared-height identity, path balance", ok,
              f"max residual {rep['max_v_residual']:.2e}, {len(rep['counterexamples'])} counterexamples, {tm.seconds:.1f}s")
    assert ok


def test_c05_lis_equivalence(criterion):
    with Timer() as tm:
        rep = verify.lis_check(1000, SEED)
    ok = rep["pass"] and tm.seconds < 60
    criterion(5, "t = 0 sweep equals longest chain", ok, f"{len(rep['counterexamples'])} mismatches, {tm.seconds:.1f}s")
    assert ok


def test_c06_t_equals_one(criterion):
    with Timer() as tm:
        rep = verify.t_one_check(1000, SEED)
    ok = rep["pass"] and tm.seconds < 30
    criterion(6, "t = 1 height equals nucleation count", ok, f"{len(rep['counterexamples'])} mismatches, {tm.seconds:.1f}s")
    assert ok


def test_c07_coupling_with_t_zero(criterion):
    with Timer() as tm:
        res = run_experiment(ExperimentSpec(kind="coupling", t_values=[0.5, 0.9], sizes=[50], replicas=1000, seed=SEED))
    viol = res.checks["violations"]
    ok = viol == 0 and tm.seconds < 120
    ratios = ", ".join(f"t={a['t']:g}: N_t/N_0 {a['mean_ratio']:.3f}" for a in res.aggregates)
    criterion(7, "N_t >= N_0 pathwise at s = 50", ok, f"{viol} violations, {ratios}, {tm.seconds:.1f}s")
    assert ok


def test_c08_superadditivity(criterion):
    with Timer() as tm:
        res = run_experiment(ExperimentSpec(kind="colored", t_values=[0.5], sizes=[20], replicas=200, seed=SEED))
    viol = res.checks["superadditivity_violations"]
    ok = viol == 0 and tm.seconds < 300
    criterion(8, "superadditivity over 0 <= m <= n <= 20", ok, f"{viol} violations on 200 diagrams, {tm.seconds:.1f}s")
    assert ok


def test_c09_distributional_projection(criterion):
    with Timer() as tm:
        xs = [colored.compute_X(colored.simulate_colored(5, 0.5, derive_seed(SEED, "proj-colored", r),
                                                         record_vertices=False), 0, 5) for r in range(2000)]
        ns = [core.sweep_counts(core.SimConfig(t=0.5, width=5, height=5, seed=derive_seed(SEED, "proj-single", r))).height
              for r in range(2000)]
        ks = st.ks_two_sample(xs, ns, level=LEVEL)
    ok = ks.p_value > LEVEL and tm.seconds < 180
    criterion(9, "X_{0,5} has the law of N(5,5)", ok,
              f"KS D={ks.statistic:.4f} p={ks.p_value:.3f}, means {np.mean(xs):.3f} vs {np.mean(ns):.3f}, {tm.seconds:.1f}s")
    assert ok


def test_c10_hydrodynamic_limit(criterion):
    ts = [0.0, 0.25, 0.5, 0.75]
    with Timer() as tm:
        res = run_experiment(ExperimentSpec(kind="hydro", t_values=ts, sizes=[25, 50, 100, 200], replicas=50, seed=SEED))
    details, ok = [], True
    for t in ts:
        c = res.checks[f"t={t:g}"]
        good = c["rel_error_largest_s"] <= 0.06 and c["non_increasing"]
        ok &= good
        details.append(f"t={t:g}: rel err {100 * c['rel_error_largest_s']:.2f}%, "
                       f"errors {['%.3f' % e for e in c['abs_errors']]}")
    criterion(10, "N(s,s)/s -> 2/sqrt(1-t) within 6% at s = 200", ok, "; ".join(details) + f"; {tm.seconds:.0f}s")
    assert ok


def test_c11_alpha_lln(criterion):
    with Timer() as tm:
        res = run_experiment(ExperimentSpec(kind="alpha-lln", t_values=[0.0, 0.5], sizes=[200], replicas=50, seed=SEED))
    ok = all(a["rel_error"] <= 0.05 for a in res.aggregates) and res.checks["identity_residual_zero"] and tm.seconds < 300
    det = ", ".join(f"t={a['t']:g}: {a['mean']:.4f} vs {a['target']:.4f}" for a in res.aggregates)
    criterion(11, "alpha-point density -> 1/(1-t) within 5%", ok, f"{det}, {tm.seconds:.1f}s")
    assert ok


def test_c12_burke(criterion):
    with Timer() as tm:
        bat = burke_battery(1.0, 0.5, 100.0, 100, derive_seed(SEED, "burke"), level=LEVEL)
    ok = bat.passed and tm.seconds < 600
    det = ", ".join(f"{k}: {'ok' if v.passed else 'FAIL'}" for k, v in bat.tests.items())
    criterion(12, "Burke output processes at lambda = 1, t = 0.5", ok, f"{det}, {tm.seconds:.1f}s")
    assert ok


def test_c13_stationarity(criterion):
    with Timer() as tm:
        bat = stationarity_battery(1.0, 0.5, 100.0, [25, 50, 100], 100, derive_seed(SEED, "stationarity"), level=LEVEL)
    ok = bat.passed and tm.seconds < 300
    comb = bat.tests["combined"]
    criterion(13, "particle snapshots Poisson(lambda) at tau = 25, 50, 100", ok,
              f"combined p={comb.p_value:.3f}, {tm.seconds:.1f}s")
    assert ok


def test_c14_attractivity(criterion):
    with Timer() as tm:
        rep = verify.attractivity_check(1000, SEED)
    ok = rep["pass"] and tm.seconds < 180
    criterion(14, "source and sink coupling inequalities", ok,
              f"{len(rep['counterexamples'])} violations, {tm.seconds:.1f}s")
    assert ok


def test_c15_scaling_and_mean_formula(criterion):
    with Timer() as tm:
        res = run_experiment(ExperimentSpec(kind="scaling", t_values=[0.5], replicas=2000, seed=SEED,
                                            options={"x": 40.0, "y": 40.0, "scale": 2.0}))
        agg = res.aggregates[0]
        moments = [stationary_height_moment(1.0, 0.5, 10.0, 10.0, 2000, derive_seed(SEED, "moment-a")),
                   stationary_height_moment(0.8, 0.25, 20.0, 5.0, 2000, derive_seed(SEED, "moment-b"))]
    ok = agg["ks_p"] > LEVEL and all(abs(m.z) <= 3 for m in moments) and tm.seconds < 300
    zs = ", ".join(f"mean {m.mean:.3f} vs {m.exact:.3f} (z={m.z:+.2f})" for m in moments)
    criterion(15, "N(2x, y/2) ~ N(x, y); stationary mean formula", ok,
              f"KS p={agg['ks_p']:.3f}; {zs}; {tm.seconds:.1f}s")
    assert ok


DETERMINISM_SPECS = [
    dict(kind="hydro", t_values=[0.0, 0.5], sizes=[20, 40], replicas=6),
    dict(kind="alpha-lln", t_values=[0.5], sizes=[30], replicas=6),
    dict(kind="coupling", t_values=[0.5, 0.9], sizes=[20], replicas=6),
    dict(kind="colored", t_values=[0.5], sizes=[6], replicas=6),
    dict(kind="scaling", t_values=[0.5], replicas=20, options={"x": 10.0, "y": 10.0, "scale": 2.0}),
    dict(kind="burke", t_values=[0.5], sizes=[20], replicas=6, options={"lambda": 1.0, "times": [10.0]}),
]


def test_c16_determinism(criterion, tmp_path, monkeypatch):
    monkeypatch.setenv("TPNG_THREADS", "2")
    bad = []
    for k, base in enumerate(DETERMINISM_SPECS):
        csv_path, json_path = tmp_path / f"{k}.csv", tmp_path / f"{k}.json"
        outs = []
        for _ in range(2):
            run_experiment(ExperimentSpec(seed=SEED, csv_path=str(csv_path), json_path=str(json_path), threads=1, **base))
            outs.append((csv_path.read_bytes(), json_path.read_bytes()))
        if outs[0] != outs[1]:
            bad.append(f"{base['kind']} rerun")
        par = run_experiment(ExperimentSpec(seed=SEED, threads=2, **base))
        ser = run_experiment(ExperimentSpec(seed=SEED, threads=1, **base))
        if sorted(par.rows) != sorted(ser.rows):
            bad.append(f"{base['kind']} parallel")
    ok = not bad
    criterion(16, "byte-identical reruns, parallel equals serial", ok,
              f"{len(DETERMINISM_SPECS)} experiment kinds" + (f", mismatches: {bad}" if bad else ""))
    assert ok
