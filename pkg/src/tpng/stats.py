"""Small statistical test kit used by the verification suites.

Statistics are computed here; scipy supplies only the asymptotic null
distributions (Kolmogorov, chi-square, normal).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special, stats as sps

DEFAULT_LEVEL = 0.01


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n: int
    verdict: str  # "pass", "fail" or "insufficient"
    level: float = DEFAULT_LEVEL
    name: str = ""

    __test__ = False  # keep pytest from collecting this class

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_json(self) -> dict:
        return {"name": self.name, "statistic": self.statistic, "p_value": self.p_value,
                "n": self.n, "verdict": self.verdict, "level": self.level}


def _result(stat: float, p: float, n: int, level: float, name: str) -> TestResult:
    p = float(min(1.0, max(0.0, p)))
    return TestResult(float(stat), p, int(n), "pass" if p > level else "fail", level, name)


def insufficient(n: int, level: float = DEFAULT_LEVEL, name: str = "") -> TestResult:
    return TestResult(float("nan"), float("nan"), int(n), "insufficient", level, name)


def kolmogorov_sf(d: float, n_eff: float) -> float:
    """Asymptotic P(D > d) with Stephens' small-sample correction."""
    if d <= 0:
        return 1.0
    sq = math.sqrt(n_eff)
    return float(special.kolmogorov((sq + 0.12 + 0.11 / sq) * d))


def ks_one_sample(samples: Sequence[float], cdf: Callable, level: float = DEFAULT_LEVEL,
                  min_n: int = 8) -> TestResult:
    x = np.asarray(samples, dtype=float)
    if np.any(np.diff(x) < 0):
        raise ValueError("ks_one_sample expects sorted samples")
    n = len(x)
    if n < min_n:
        return insufficient(n, level, "ks_one_sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = max(np.max(i / n - f), np.max(f - (i - 1) / n))
    return _result(d, kolmogorov_sf(d, n), n, level, "ks_one_sample")


def ks_two_sample(a: Sequence[float], b: Sequence[float], level: float = DEFAULT_LEVEL,
                  min_n: int = 8) -> TestResult:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    na, nb = len(a), len(b)
    if min(na, nb) < min_n:
        return insufficient(min(na, nb), level, "ks_two_sample")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / na
    fb = np.searchsorted(b, grid, side="right") / nb
    d = float(np.max(np.abs(fa - fb)))
    return _result(d, kolmogorov_sf(d, na * nb / (na + nb)), min(na, nb), level, "ks_two_sample")


def poisson_dispersion(counts: Sequence[int], mean: float | None = None, level: float = DEFAULT_LEVEL,
                       min_cells: int = 20) -> TestResult:
    """Two-sided index-of-dispersion test; sum (c - mean)^2 / mean is chi-square under Poisson counts."""
    c = np.asarray(counts, dtype=float)
    n = len(c)
    if n < min_cells:
        return insufficient(n, level, "poisson_dispersion")
    if mean is None:
        mu, df = float(c.mean()), n - 1
    else:
        mu, df = float(mean), n
    if mu == 0:
        ok = bool(np.all(c == 0))
        return TestResult(0.0, 1.0 if ok else 0.0, n, "pass" if ok else "fail", level, "poisson_dispersion")
    stat = float(np.sum((c - mu) ** 2) / mu)
    p = 2.0 * min(sps.chi2.sf(stat, df), sps.chi2.cdf(stat, df))
    return _result(stat, p, n, level, "poisson_dispersion")


def dispersion_index(counts: Sequence[int]) -> float:
    c = np.asarray(counts, dtype=float)
    m = c.mean()
    return float(c.var(ddof=1) / m) if m > 0 else float("nan")


def chi_square_gof(observed: Sequence[float], expected: Sequence[float], level: float = DEFAULT_LEVEL,
                   min_expected: float = 5.0, ddof: int = 0) -> TestResult:
    """Pearson chi-square; ``expected`` may be probabilities or counts. Small tail cells are pooled."""
    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    if obs.shape != exp.shape:
        raise ValueError(f"dimension mismatch: {obs.shape} vs {exp.shape}")
    total = obs.sum()
    if exp.sum() <= 0:
        raise ValueError("expected frequencies must have positive mass")
    exp = exp / exp.sum() * total
    # pool adjacent cells left to right until each pooled cell reaches min_expected
    po, pe = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            po.append(acc_o)
            pe.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if pe:
            po[-1] += acc_o
            pe[-1] += acc_e
        else:
            po.append(acc_o)
            pe.append(acc_e)
    po, pe = np.array(po), np.array(pe)
    df = len(po) - 1 - ddof
    if df < 1:
        return insufficient(int(total), level, "chi_square_gof")
    stat = float(np.sum((po - pe) ** 2 / pe))
    return _result(stat, sps.chi2.sf(stat, df), int(total), level, "chi_square_gof")


def chi_square_two_sample(a: Sequence[float], b: Sequence[float], level: float = DEFAULT_LEVEL,
                          min_expected: float = 5.0) -> TestResult:
    """Homogeneity test of two histograms over the same bins (pooling sparse bins)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("histograms must share bins")
    tot = a + b
    pa, pb = [], []
    ca = cb = 0.0
    for x, y in zip(a, b):
        ca += x
        cb += y
        if ca + cb >= 2 * min_expected:
            pa.append(ca)
            pb.append(cb)
            ca = cb = 0.0
    if ca + cb > 0 and pa:
        pa[-1] += ca
        pb[-1] += cb
    pa, pb = np.array(pa), np.array(pb)
    if len(pa) < 2 or tot.sum() == 0:
        return insufficient(int(tot.sum()), level, "chi_square_two_sample")
    table = np.vstack([pa, pb])
    expected = table.sum(axis=1, keepdims=True) * table.sum(axis=0, keepdims=True) / table.sum()
    stat = float(np.sum((table - expected) ** 2 / expected))
    return _result(stat, sps.chi2.sf(stat, len(pa) - 1), int(tot.sum()), level, "chi_square_two_sample")


def mean_within(samples: Sequence[float], target: float, sigmas: float = 3.0,
                variance: float | None = None) -> TestResult:
    """|mean - target| <= sigmas * stderr, stderr from ``variance`` if given, else the sample."""
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n < 2:
        return insufficient(n, name="mean_within")
    var = float(x.var(ddof=1)) if variance is None else float(variance)
    se = math.sqrt(var / n)
    z = (x.mean() - target) / se if se > 0 else (0.0 if x.mean() == target else math.inf)
    p = float(2 * sps.norm.sf(abs(z)))
    verdict = "pass" if abs(z) <= sigmas else "fail"
    return TestResult(float(z), p, n, verdict, float(2 * sps.norm.sf(sigmas)), "mean_within")


def pearson_r(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        return 0.0
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def permutation_correlation(a, b, stream, permutations: int = 999, level: float = DEFAULT_LEVEL) -> TestResult:
    """Two-sided permutation test of zero Pearson correlation."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 8:
        return insufficient(len(a), level, "permutation_correlation")
    r0 = abs(pearson_r(a, b))
    hits = 0
    for _ in range(permutations):
        if abs(pearson_r(a, stream.generator.permutation(b))) >= r0 - 1e-12:
            hits += 1
    return _result(r0, (hits + 1) / (permutations + 1), len(a), level, "permutation_correlation")


def fisher_combine(p_values: Sequence[float], level: float = DEFAULT_LEVEL) -> TestResult:
    p = np.asarray([q for q in p_values if not math.isnan(q)], dtype=float)
    if len(p) == 0:
        return insufficient(0, level, "fisher")
    stat = float(-2.0 * np.sum(np.log(np.clip(p, 1e-300, 1.0))))
    return _result(stat, sps.chi2.sf(stat, 2 * len(p)), len(p), level, "fisher")


def bonferroni(results: Sequence[TestResult], level: float = DEFAULT_LEVEL) -> TestResult:
    """Battery passes when every definite p-value exceeds level / m."""
    ps = [r.p_value for r in results if r.verdict != "insufficient"]
    if not ps:
        return insufficient(0, level, "bonferroni")
    m = len(ps)
    pmin = min(ps)
    return _result(pmin, min(1.0, pmin * m), m, level, "bonferroni")
