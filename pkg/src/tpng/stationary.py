"""Stationary t-PNG: Poisson(lam) sources, Poisson(1/(lam (1 - t))) sinks, Poisson(1) bulk.

Includes the output-process statistics (corners, top exits, right exits)
and the particle-snapshot stationarity checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats as sps

from . import stats as st
from .core import Diagram, SimConfig, simulate, sweep_counts
from .rng import derive_seed


@dataclass(frozen=True)
class StationaryConfig:
    lam: float
    t: float
    T1: float
    T2: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not 0.0 <= self.t < 1.0:
            raise ValueError("stationary model needs 0 <= t < 1")
        if not (self.T1 > 0 and self.T2 > 0):
            raise ValueError("rectangle must have positive sides")

    @property
    def sink_intensity(self) -> float:
        return 1.0 / (self.lam * (1.0 - self.t))

    def sim_config(self) -> SimConfig:
        return SimConfig(t=self.t, width=self.T1, height=self.T2, seed=self.seed,
                         sources=float(self.lam), sinks=self.sink_intensity)


def simulate_stationary(config: StationaryConfig) -> Diagram:
    return simulate(config.sim_config())


def _intervals(points: np.ndarray, length: float, bins: int) -> np.ndarray:
    return np.histogram(points, bins=bins, range=(0.0, length))[0]


def _spacing_ks(points: np.ndarray, rate: float, level: float) -> st.TestResult:
    gaps = np.sort(np.diff(np.concatenate([[0.0], np.sort(points)])))
    return st.ks_one_sample(gaps, lambda g: 1.0 - np.exp(-rate * g), level=level)


@dataclass
class ProcessStats:
    count: int
    expected: float
    dispersion_index: float
    dispersion: st.TestResult
    spacing: st.TestResult | None = None
    uniformity: st.TestResult | None = None

    def to_json(self) -> dict:
        return {
            "count": self.count, "expected": self.expected, "dispersion_index": self.dispersion_index,
            "dispersion": self.dispersion.to_json(),
            "spacing": None if self.spacing is None else self.spacing.to_json(),
            "uniformity": None if self.uniformity is None else self.uniformity.to_json(),
        }


@dataclass
class BurkeReport:
    corner_stats: ProcessStats
    out_stats: ProcessStats
    in_stats: ProcessStats
    independence_stats: dict
    snapshot_stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "corner_stats": self.corner_stats.to_json(),
            "out_stats": self.out_stats.to_json(),
            "in_stats": self.in_stats.to_json(),
            "independence_stats": self.independence_stats,
            "snapshot_stats": {str(k): [r.to_json() for r in v] for k, v in self.snapshot_stats.items()},
        }


def one_dim_stats(points: np.ndarray, length: float, rate: float, bins: int, level: float = st.DEFAULT_LEVEL) -> ProcessStats:
    counts = _intervals(points, length, bins)
    return ProcessStats(
        count=len(points), expected=rate * length, dispersion_index=st.dispersion_index(counts),
        dispersion=st.poisson_dispersion(counts, rate * length / bins, level=level),
        spacing=_spacing_ks(points, rate, level),
    )


def burke_statistics(d: Diagram, cells: int = 10, lam: float | None = None, level: float = st.DEFAULT_LEVEL) -> BurkeReport:
    """Poisson tests on the corner, top-exit and right-exit processes of a stationary diagram.

    ``cells`` is the number of strips per side; corners use a cells x cells grid.
    """
    W, H, t = d.width, d.height, d.t
    if lam is None:
        lam = d.config.sources if isinstance(d.config.sources, float) else len(d.sources) / W
    in_rate = 1.0 / (lam * (1.0 - t))
    kx, ky = d.k_x, d.k_y
    grid = np.histogram2d(kx, ky, bins=cells, range=[[0, W], [0, H]])[0].ravel()
    cell_mean = W * H / cells**2
    corner = ProcessStats(
        count=len(kx), expected=W * H, dispersion_index=st.dispersion_index(grid),
        dispersion=st.poisson_dispersion(grid, cell_mean, level=level),
        uniformity=st.chi_square_gof(grid, np.ones_like(grid), level=level) if len(kx) else st.insufficient(0, level),
    )
    out = one_dim_stats(d.out_points, W, lam, cells, level)
    inn = one_dim_stats(d.in_points, H, in_rate, cells, level)
    cx = np.histogram(kx, bins=cells, range=(0, W))[0]
    cy = np.histogram(ky, bins=cells, range=(0, H))[0]
    oc = _intervals(d.out_points, W, cells)
    ic = _intervals(d.in_points, H, cells)
    indep = {
        "corner_vs_out_by_column": st.pearson_r(cx, oc),
        "corner_vs_in_by_row": st.pearson_r(cy, ic),
        "out_vs_in_by_bin": st.pearson_r(oc, ic),
        "verdict": "consistent with independence" if max(abs(st.pearson_r(cx, oc)), abs(st.pearson_r(cy, ic)),
                                                       abs(st.pearson_r(oc, ic))) < 3 / math.sqrt(cells) else "correlated",
    }
    return BurkeReport(corner, out, inn, indep)


def particles_at(d: Diagram, tau: float) -> np.ndarray:
    """Sorted particle positions at height tau (right-continuous)."""
    alive = (d.p_y0 <= tau) & (tau < d.p_y1)
    return np.sort(d.p_x[alive])


def check_stationarity(d: Diagram, times: Sequence[float], lam: float, bins: int = 10,
                       level: float = st.DEFAULT_LEVEL) -> dict:
    """Per time: the particle count, a cell dispersion test and an exponential spacing KS test."""
    out = {}
    for tau in times:
        pts = particles_at(d, float(tau))
        counts = _intervals(pts, d.width, bins)
        out[float(tau)] = {
            "count": len(pts),
            "expected": lam * d.width,
            "dispersion": st.poisson_dispersion(counts, lam * d.width / bins, level=level, min_cells=bins),
            "spacing": _spacing_ks(pts, lam, level),
        }
    return out


@dataclass
class BatteryResult:
    tests: dict  # name -> TestResult
    correlations: dict
    counts: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.tests.values())

    def to_json(self) -> dict:
        return {"pass": self.passed, "tests": {k: v.to_json() for k, v in self.tests.items()},
                "correlations": self.correlations,
                "counts": {k: [int(c) for c in v] for k, v in self.counts.items()}}


def burke_battery(lam: float, t: float, size: float, replicas: int, seed: int, cells: int = 10,
                  level: float = st.DEFAULT_LEVEL) -> BatteryResult:
    """Burke statistics pooled over independent replicas."""
    corner_n, out_n, in_n = [], [], []
    disp_p, ks_p = [], []
    for r in range(replicas):
        cfg = StationaryConfig(lam, t, size, size, derive_seed(seed, "burke", r))
        rep = burke_statistics(simulate_stationary(cfg), cells, lam, level)
        corner_n.append(rep.corner_stats.count)
        out_n.append(rep.out_stats.count)
        in_n.append(rep.in_stats.count)
        disp_p.append(rep.corner_stats.dispersion.p_value)
        ks_p += [rep.out_stats.spacing.p_value, rep.in_stats.spacing.p_value]
    area = size * size
    in_rate = 1.0 / (lam * (1.0 - t))
    tests = {
        "corner_mean": st.mean_within(corner_n, area, variance=area),
        "out_mean": st.mean_within(out_n, lam * size, variance=lam * size),
        "in_mean": st.mean_within(in_n, in_rate * size, variance=in_rate * size),
        "corner_dispersion": st.fisher_combine(disp_p, level),
        "spacing_ks": st.fisher_combine(ks_p, level),
    }
    bound = 3.0 / math.sqrt(replicas)
    corr = {
        "corner_out": st.pearson_r(corner_n, out_n),
        "corner_in": st.pearson_r(corner_n, in_n),
        "out_in": st.pearson_r(out_n, in_n),
        "bound": bound,
    }
    for key in ("corner_out", "corner_in", "out_in"):
        r = corr[key]
        tests[f"corr_{key}"] = st.TestResult(r, float("nan"), replicas, "pass" if abs(r) <= bound else "fail",
                                             level, f"corr_{key}")
    return BatteryResult(tests, corr, {"corners": corner_n, "out": out_n, "in": in_n})


def stationarity_battery(lam: float, t: float, size: float, times: Sequence[float], replicas: int, seed: int,
                         bins: int = 10, level: float = st.DEFAULT_LEVEL) -> BatteryResult:
    """Particle snapshots at each time: mean count over replicas, Fisher-combined dispersion and spacing."""
    per = {float(tau): {"count": [], "disp": [], "ks": []} for tau in times}
    for r in range(replicas):
        d = simulate_stationary(StationaryConfig(lam, t, size, size, derive_seed(seed, "stationarity", r)))
        for tau, res in check_stationarity(d, times, lam, bins, level).items():
            per[tau]["count"].append(res["count"])
            per[tau]["disp"].append(res["dispersion"].p_value)
            per[tau]["ks"].append(res["spacing"].p_value)
    tests = {}
    for tau, v in per.items():
        tests[f"count_mean@{tau:g}"] = st.mean_within(v["count"], lam * size, variance=lam * size)
        tests[f"dispersion@{tau:g}"] = st.fisher_combine(v["disp"], level)
        tests[f"spacing@{tau:g}"] = st.fisher_combine(v["ks"], level)
    combined = st.bonferroni([r for k, r in tests.items() if not k.startswith("count_mean")], level)
    tests["combined"] = combined
    return BatteryResult(tests, {}, {f"count@{tau:g}": v["count"] for tau, v in per.items()})


@dataclass
class MomentEstimate:
    mean: float
    stderr: float
    ci: tuple[float, float]
    exact: float
    replicas: int
    samples: np.ndarray

    @property
    def z(self) -> float:
        return (self.mean - self.exact) / self.stderr if self.stderr > 0 else 0.0


def stationary_mean(lam: float, t: float, x: float, y: float) -> float:
    return y / (lam * (1.0 - t)) + lam * x


def stationary_height_moment(lam: float, t: float, x: float, y: float, replicas: int, seed: int) -> MomentEstimate:
    """Monte Carlo E[N(x, y)] for the stationary model, next to the exact mean."""
    if replicas < 2:
        raise ValueError("need at least two replicas")
    samples = np.array([
        sweep_counts(StationaryConfig(lam, t, x, y, derive_seed(seed, "moment", r)).sim_config()).height
        for r in range(replicas)
    ], dtype=float)
    m = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(replicas))
    z = sps.norm.ppf(0.975)
    return MomentEstimate(m, se, (m - z * se, m + z * se), stationary_mean(lam, t, x, y), replicas, samples)


def optimal_lambda(t: float, x: float, y: float) -> float:
    """The lambda minimising the stationary mean at (x, y)."""
    return math.sqrt(y / (x * (1.0 - t)))
