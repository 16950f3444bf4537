"""Experiment orchestration: replica farms, aggregation and CSV/JSON output.

Every replica gets its own seed hashed from (spec seed, kind, t, s, index),
so results do not depend on scheduling and serial and parallel runs agree.
"""
from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import stats as st
from .colored import X_matrix, simulate_colored
from .core import SimConfig, couple_with_png, sweep_counts
from .rng import derive_seed
from .stationary import burke_battery, stationarity_battery

KINDS = ("hydro", "alpha-lln", "burke", "scaling", "coupling", "verify-weights", "colored")
CSV_HEADER = "kind,t,s,seed,observable,value"
DEFAULT_MAX_POINTS = 10**8


class ResourceGuardError(RuntimeError):
    pass


@dataclass
class ExperimentSpec:
    kind: str
    t_values: list = field(default_factory=lambda: [0.5])
    sizes: list = field(default_factory=lambda: [50])
    replicas: int = 10
    seed: int = 0
    csv_path: str | None = None
    json_path: str | None = None
    threads: int | None = None
    max_points: float = DEFAULT_MAX_POINTS
    options: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if any(not s > 0 for s in self.sizes):
            raise ValueError("sizes must be positive")
        if any(not 0.0 <= t <= 1.0 for t in self.t_values):
            raise ValueError("t values must lie in [0, 1]")
        self.t_values = [float(t) for t in self.t_values]
        self.sizes = [float(s) if not float(s).is_integer() else int(s) for s in self.sizes]

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentSpec":
        return cls(**data)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list  # (kind, t, s, seed, observable, value)
    aggregates: list  # dicts keyed by t and s
    checks: dict = field(default_factory=dict)

    def csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for kind, t, s, seed, obs, val in self.rows:
            buf.write(f"{kind},{t:.17g},{float(s):.17g},{seed},{obs},{float(val):.17g}\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.csv_text(), encoding="utf-8")

    def to_json(self) -> dict:
        return {"spec": asdict(self.spec), "aggregates": self.aggregates, "checks": self.checks}

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True, default=_json_default) + "\n",
                              encoding="utf-8")

    def persist(self) -> None:
        if self.spec.csv_path:
            self.write_csv(self.spec.csv_path)
        if self.spec.json_path:
            self.write_json(self.spec.json_path)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def thread_cap(requested: int | None = None) -> int:
    env = os.environ.get("TPNG_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    n = cap if requested is None else min(requested, cap)
    return max(1, n)


def run_tasks(fn: Callable, tasks: Sequence, threads: int | None = None) -> list:
    """Map ``fn`` over tasks, in order; a process pool is used when more than one worker is allowed."""
    n = thread_cap(threads)
    if n == 1 or len(tasks) < 2:
        return [fn(task) for task in tasks]
    chunk = max(1, len(tasks) // (4 * n))
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def replica_seed(spec: ExperimentSpec, t: float, s, r: int) -> int:
    return derive_seed(spec.seed, spec.kind, repr(float(t)), repr(float(s)), r)


def guard(spec: ExperimentSpec, expected_points: float) -> None:
    if expected_points > spec.max_points:
        raise ResourceGuardError(
            f"expected {expected_points:.3g} points exceeds the limit {spec.max_points:.3g}; raise --max-points to run")


def _summary(values: Sequence[float]) -> dict:
    x = np.asarray(values, dtype=float)
    n = len(x)
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return {"mean": mean, "stderr": se, "ci95": [mean - 1.96 * se, mean + 1.96 * se], "n": n}


# --- workers (top level so they pickle) ---------------------------------------------------------


def _hydro_task(task):
    t, s, seed = task
    c = sweep_counts(SimConfig(t=t, width=s, height=s, seed=seed))
    return [("N/s", c.height / s), ("A1/s^2", (c.nucleations + c.crossings) / s**2),
            ("A2/s^2", (c.corners + c.crossings) / s**2),
            ("residual", c.height - ((c.nucleations + c.crossings) - (c.corners + c.crossings)))]


def _scaling_task(task):
    t, w, h, seed = task
    return [("N", sweep_counts(SimConfig(t=t, width=w, height=h, seed=seed)).height)]


def _coupling_task(task):
    t, s, seed = task
    n_t, n_0 = couple_with_png(SimConfig(t=t, width=s, height=s, seed=seed))
    return [("N_t", n_t), ("N_0", n_0)]


def _colored_task(task):
    t, n, seed = task
    X = X_matrix(simulate_colored(int(n), t, seed, record_vertices=False))
    viol = sum(int(X[0, b] < X[0, a] + X[a, b]) for b in range(int(n) + 1) for a in range(b + 1))
    return [("X_0n", int(X[0, int(n)])), ("superadditivity_violations", viol)]


def _farm(spec: ExperimentSpec, worker, make_task) -> tuple[list, dict]:
    tasks, keys = [], []
    for t in spec.t_values:
        for s in spec.sizes:
            for r in range(spec.replicas):
                seed = replica_seed(spec, t, s, r)
                tasks.append(make_task(t, s, seed))
                keys.append((t, s, seed))
    out = run_tasks(worker, tasks, spec.threads)
    rows, by = [], {}
    for (t, s, seed), obs in zip(keys, out):
        for name, val in obs:
            rows.append((spec.kind, t, s, seed, name, val))
            by.setdefault((t, s, name), []).append(val)
    return rows, by


def hydro_target(t: float) -> float:
    return 2.0 / math.sqrt(1.0 - t) if t < 1 else math.inf


def non_increasing_up_to(values: Sequence[float], inversions: int = 1) -> bool:
    return sum(b > a for a, b in zip(values, values[1:])) <= inversions


def run_hydro(spec: ExperimentSpec) -> ExperimentResult:
    guard(spec, max(spec.sizes) ** 2 * 1.0)
    if any(t >= 1 for t in spec.t_values):
        raise ValueError("the hydrodynamic target is finite only for t < 1")
    rows, by = _farm(spec, _hydro_task, lambda t, s, seed: (t, s, seed))
    rows = [r for r in rows if r[4] == "N/s"]
    aggs, checks = [], {}
    for t in spec.t_values:
        gamma = hydro_target(t)
        errs = []
        for s in spec.sizes:
            a = _summary(by[(t, s, "N/s")])
            a.update(t=t, s=s, target=gamma, rel_error=abs(a["mean"] - gamma) / gamma)
            errs.append(abs(a["mean"] - gamma))
            aggs.append(a)
        checks[f"t={t:g}"] = {"abs_errors": errs, "non_increasing": non_increasing_up_to(errs),
                              "rel_error_largest_s": errs[-1] / gamma}
    res = ExperimentResult(spec, rows, aggs, checks)
    res.persist()
    return res


def run_alpha_lln(spec: ExperimentSpec) -> ExperimentResult:
    guard(spec, max(spec.sizes) ** 2 * 1.0)
    if any(t >= 1 for t in spec.t_values):
        raise ValueError("the alpha-point density is finite only for t < 1")
    rows, by = _farm(spec, _hydro_task, lambda t, s, seed: (t, s, seed))
    rows = [r for r in rows if r[4] != "N/s"]
    aggs = []
    residual_ok = True
    for t in spec.t_values:
        for s in spec.sizes:
            a = _summary(by[(t, s, "A1/s^2")])
            a.update(t=t, s=s, target=1.0 / (1.0 - t), A2_mean=_summary(by[(t, s, "A2/s^2")])["mean"],
                     max_abs_residual=max(abs(v) for v in by[(t, s, "residual")]))
            a["rel_error"] = abs(a["mean"] - a["target"]) / a["target"]
            residual_ok &= a["max_abs_residual"] == 0
            aggs.append(a)
    res = ExperimentResult(spec, rows, aggs, {"identity_residual_zero": residual_ok})
    res.persist()
    return res


def run_scaling(spec: ExperimentSpec) -> ExperimentResult:
    """Far-corner heights on [0, s x] x [0, y / s] against [0, x] x [0, y], s = ``options['scale']``.

    ``options['area_factor']`` stretches the first rectangle (negative control).
    """
    x = float(spec.options.get("x", 40.0))
    y = float(spec.options.get("y", 40.0))
    scale = float(spec.options.get("scale", 2.0))
    area = float(spec.options.get("area_factor", 1.0))
    guard(spec, x * y * area)
    rows, aggs = [], []
    for t in spec.t_values:
        tasks_a = [(t, scale * x * area, y / scale, derive_seed(spec.seed, "scaling", "a", repr(t), r))
                   for r in range(spec.replicas)]
        tasks_b = [(t, x, y, derive_seed(spec.seed, "scaling", "b", repr(t), r)) for r in range(spec.replicas)]
        out = run_tasks(_scaling_task, tasks_a + tasks_b, spec.threads)
        na = [o[0][1] for o in out[: spec.replicas]]
        nb = [o[0][1] for o in out[spec.replicas:]]
        for (tt, _, _, seed), v in zip(tasks_a, na):
            rows.append((spec.kind, tt, scale, seed, "N_scaled", v))
        for (tt, _, _, seed), v in zip(tasks_b, nb):
            rows.append((spec.kind, tt, scale, seed, "N", v))
        ks = st.ks_two_sample(na, nb)
        aggs.append({"t": t, "s": scale, "x": x, "y": y, "area_factor": area, "mean_scaled": float(np.mean(na)),
                     "mean": float(np.mean(nb)), "ks_statistic": ks.statistic, "ks_p": ks.p_value,
                     "verdict": ks.verdict})
    res = ExperimentResult(spec, rows, aggs)
    res.persist()
    return res


def run_coupling(spec: ExperimentSpec) -> ExperimentResult:
    guard(spec, max(spec.sizes) ** 2 * 2.0)
    rows, by = _farm(spec, _coupling_task, lambda t, s, seed: (t, s, seed))
    aggs = []
    total_viol = 0
    for t in spec.t_values:
        for s in spec.sizes:
            nt = np.asarray(by[(t, s, "N_t")], dtype=float)
            n0 = np.asarray(by[(t, s, "N_0")], dtype=float)
            viol = int(np.sum(nt < n0))
            total_viol += viol
            ratio = _summary(nt / np.maximum(n0, 1))
            aggs.append({"t": t, "s": s, "violations": viol, "mean_ratio": ratio["mean"],
                         "ratio_stderr": ratio["stderr"], "mean_N_t": float(nt.mean()), "mean_N_0": float(n0.mean())})
    res = ExperimentResult(spec, rows, aggs, {"violations": total_viol})
    res.persist()
    return res


def run_colored(spec: ExperimentSpec) -> ExperimentResult:
    for s in spec.sizes:
        if not float(s).is_integer() or not 1 <= int(s) <= 63:
            raise ValueError("colored runs need integer box sides in [1, 63]")
    guard(spec, max(spec.sizes) ** 2 * 1.0)
    rows, by = _farm(spec, _colored_task, lambda t, s, seed: (t, int(s), seed))
    aggs, total = [], 0
    for t in spec.t_values:
        for s in spec.sizes:
            viol = int(sum(by[(t, s, "superadditivity_violations")]))
            total += viol
            a = _summary(by[(t, s, "X_0n")])
            a.update(t=t, s=s, superadditivity_violations=viol)
            aggs.append(a)
    res = ExperimentResult(spec, rows, aggs, {"superadditivity_violations": total})
    res.persist()
    return res


def run_burke(spec: ExperimentSpec) -> ExperimentResult:
    lam = float(spec.options.get("lambda", 1.0))
    cells = int(spec.options.get("cells", 10))
    guard(spec, max(spec.sizes) ** 2 * 1.0)
    rows, aggs, checks = [], [], {}
    for t in spec.t_values:
        for s in spec.sizes:
            bseed = derive_seed(spec.seed, "burke", repr(t), repr(float(s)))
            bat = burke_battery(lam, t, float(s), spec.replicas, bseed, cells)
            for name, vals in bat.counts.items():
                for r, v in enumerate(vals):
                    # the replica seed used inside the battery
                    rows.append((spec.kind, t, s, derive_seed(bseed, "burke", r), name, v))
            aggs.append({"t": t, "s": s, "lambda": lam, **bat.to_json()})
            checks[f"t={t:g},s={s:g}"] = bat.passed
            if "times" in spec.options:
                sb = stationarity_battery(lam, t, float(s), spec.options["times"], spec.replicas,
                                          derive_seed(spec.seed, "stationarity", repr(t), repr(float(s))), cells)
                aggs[-1]["stationarity"] = sb.to_json()
                checks[f"stationarity t={t:g},s={s:g}"] = sb.passed
    res = ExperimentResult(spec, rows, aggs, checks)
    res.persist()
    return res


RUNNERS = {
    "hydro": run_hydro,
    "alpha-lln": run_alpha_lln,
    "scaling": run_scaling,
    "coupling": run_coupling,
    "colored": run_colored,
    "burke": run_burke,
}


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    if spec.kind not in RUNNERS:
        raise ValueError(f"{spec.kind!r} is not a replica experiment")
    return RUNNERS[spec.kind](spec)
