"""Colored vertex weights.

A color vector is an ``int`` bitmask: bit ``r - 1`` is set when a line of color
``r`` is present, color 1 being the highest priority. Weights are symbolic
tags over the indeterminate ``t``; nothing here ever compares floats.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_COLORS = 63


class Weight(enum.IntEnum):
    ZERO = 0
    T = 1
    ONE_MINUS_T = 2
    ONE = 3

    def evaluate(self, t: float) -> float:
        return (0.0, t, 1.0 - t, 1.0)[self]

    def poly(self) -> tuple[int, int]:
        """Coefficients (c0, c1) of c0 + c1*t."""
        return _POLY[self]

    def __str__(self) -> str:
        return ("0", "t", "1-t", "1")[self]


_POLY = {Weight.ZERO: (0, 0), Weight.T: (0, 1), Weight.ONE_MINUS_T: (1, -1), Weight.ONE: (1, 0)}

# indexed by (i << 3) | (j << 2) | (k << 1) | l
_L1 = np.zeros(16, dtype=np.uint8)
_L1[0b1111] = Weight.T
_L1[0b1100] = Weight.ONE_MINUS_T
_L1[0b1010] = Weight.ONE
_L1[0b0101] = Weight.ONE
_L1[0b0000] = Weight.ONE


def l1_weight(i: int, j: int, k: int, l: int) -> Weight:
    for b in (i, j, k, l):
        if b not in (0, 1):
            raise ValueError("L1 entries are indexed by bits")
    return Weight(int(_L1[(i << 3) | (j << 2) | (k << 1) | l]))


def _check_width(x: int, n: int) -> None:
    if not 0 <= n <= MAX_COLORS:
        raise ValueError(f"number of colors must be in [0, {MAX_COLORS}], got {n}")
    if x < 0 or x >> n:
        raise ValueError(f"color vector {x:#b} does not fit in {n} colors")


def fold_projection(x: int, r: int, n: int | None = None) -> int:
    """Parity of the lines of colors 1..r."""
    if n is not None:
        _check_width(x, n)
        if not 1 <= r <= n:
            raise ValueError(f"projection index r={r} outside [1, {n}]")
    elif r < 1:
        raise ValueError("projection index must be >= 1")
    return bin(x & ((1 << r) - 1)).count("1") & 1


def prefix_parity(x: int, n: int) -> int:
    """Bitmask whose bit r-1 is the r-fold projection of x."""
    p = x
    p ^= p << 1
    p ^= p << 2
    p ^= p << 4
    p ^= p << 8
    p ^= p << 16
    p ^= p << 32
    return p & ((1 << n) - 1)


def from_prefix_parity(p: int, n: int) -> int:
    return (p ^ (p << 1)) & ((1 << n) - 1)


def frak_min(ws: Iterable[Weight]) -> Weight:
    """Minimum over {0 < t, 1-t < 1}, except that t together with 1-t gives 0."""
    ws = list(ws)
    if not ws:
        raise ValueError("frak_min of an empty list")
    if Weight.T in ws and Weight.ONE_MINUS_T in ws:
        return Weight.ZERO
    if Weight.ZERO in ws:
        return Weight.ZERO
    if Weight.T in ws:
        return Weight.T
    if Weight.ONE_MINUS_T in ws:
        return Weight.ONE_MINUS_T
    return Weight.ONE


@dataclass(frozen=True)
class VertexConfig:
    i: int
    j: int
    k: int
    l: int
    n: int

    def __post_init__(self) -> None:
        for x in (self.i, self.j, self.k, self.l):
            _check_width(x, self.n)

    def as_tuples(self) -> tuple[tuple[int, ...], ...]:
        return tuple(to_tuple(x, self.n) for x in (self.i, self.j, self.k, self.l))


@dataclass(frozen=True)
class VertexOutcome:
    k: int
    l: int
    weight: Weight


def to_tuple(x: int, n: int) -> tuple[int, ...]:
    return tuple((x >> b) & 1 for b in range(n))


def from_tuple(bits: Sequence[int]) -> int:
    out = 0
    for b, v in enumerate(bits):
        if v not in (0, 1):
            raise ValueError("color vectors hold bits")
        out |= v << b
    return out


def ln_weight(cfg: VertexConfig) -> Weight:
    """Direct evaluation: frak_min of L1 over every r-fold projection."""
    if cfg.n == 0:
        return Weight.ONE
    return frak_min(
        l1_weight(
            fold_projection(cfg.i, r),
            fold_projection(cfg.j, r),
            fold_projection(cfg.k, r),
            fold_projection(cfg.l, r),
        )
        for r in range(1, cfg.n + 1)
    )


def row_outcomes(i: int, j: int, n: int) -> tuple[VertexOutcome, ...]:
    """The nonzero outcomes for inputs (i, j), built row by row from the projections.

    Rows r where both projections are odd are the coin rows. Without coin
    rows everything passes through with weight 1. With them the cross branch
    is again pass-through (weight t); the annihilate branch zeroes both
    output projections on every coin row (weight 1-t).
    """
    _check_width(i, n)
    _check_width(j, n)
    a = prefix_parity(i, n)
    b = prefix_parity(j, n)
    coin = a & b
    if not coin:
        return (VertexOutcome(i, j, Weight.ONE),)
    k2 = from_prefix_parity(a & ~coin, n)
    l2 = from_prefix_parity(b & ~coin, n)
    return (VertexOutcome(i, j, Weight.T), VertexOutcome(k2, l2, Weight.ONE_MINUS_T))


def resolve_vertex(i: int, j: int, n: int, u: float, t: float) -> tuple[int, int, bool]:
    """Hot-loop form of sample_vertex: returns (k, l, coin_flipped) for a uniform u in [0, 1)."""
    a = prefix_parity(i, n)
    b = prefix_parity(j, n)
    coin = a & b
    if not coin or u < t:
        return i, j, bool(coin)
    mask = (1 << n) - 1
    c = a & ~coin
    d = b & ~coin
    return (c ^ (c << 1)) & mask, (d ^ (d << 1)) & mask, True


def sample_vertex(i: int, j: int, n: int, t: float, stream) -> VertexOutcome:
    if not 0.0 <= t < 1.0:
        raise ValueError("sample_vertex needs 0 <= t < 1")
    outcomes = row_outcomes(i, j, n)
    if len(outcomes) == 1:
        return outcomes[0]
    return outcomes[0] if stream.uniform() < t else outcomes[1]


# ---------------------------------------------------------------------------
# vectorised table and exhaustive verifiers


@lru_cache(maxsize=8)
def ln_table(n: int) -> np.ndarray:
    """uint8 array T[i, j, k, l] of Weight codes over all 16**n tuples (n <= 5)."""
    if not 0 <= n <= 5:
        raise ValueError("the full L^n table is only built for n <= 5")
    size = 1 << n
    vec = np.arange(size, dtype=np.int64)
    # par[r, x] = r-fold projection of x
    par = np.array([[bin(x & ((1 << r) - 1)).count("1") & 1 for x in range(size)] for r in range(1, n + 1)],
                   dtype=np.int64).reshape(n, size)
    shape = (size, size, size, size)
    zero = np.zeros(shape, dtype=bool)
    has_t = np.zeros(shape, dtype=bool)
    has_1mt = np.zeros(shape, dtype=bool)
    for r in range(n):
        p = par[r]
        code = (p[:, None, None, None] << 3) | (p[None, :, None, None] << 2) | (p[None, None, :, None] << 1) | p[None, None, None, :]
        w = _L1[code]
        zero |= w == Weight.ZERO
        has_t |= w == Weight.T
        has_1mt |= w == Weight.ONE_MINUS_T
    out = np.full(shape, Weight.ONE, dtype=np.uint8)
    out[has_1mt] = Weight.ONE_MINUS_T
    out[has_t] = Weight.T
    out[zero | (has_t & has_1mt)] = Weight.ZERO
    del vec
    out.setflags(write=False)
    return out


def _poly_arrays(table: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c0 = np.array([0, 0, 1, 1], dtype=np.int64)[table]
    c1 = np.array([0, 1, -1, 0], dtype=np.int64)[table]
    return c0, c1


@dataclass
class Report:
    check: str
    n: int
    passed: bool = True
    counterexamples: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    checked: int = 0

    def fail(self, example) -> None:
        self.passed = False
        if len(self.counterexamples) < 20:
            self.counterexamples.append(example)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "n": self.n,
            "pass": self.passed,
            "counterexamples": self.counterexamples,
            **({"params": self.params} if self.params else {}),
            "checked": self.checked,
        }


def verify_stochastic(n: int) -> Report:
    """Every row's nonzero weights form exactly {1} or {t, 1-t}."""
    if not 1 <= n <= 5:
        raise ValueError("exhaustive stochasticity check supports 1 <= n <= 5")
    table = ln_table(n)
    size = 1 << n
    flat = table.reshape(size * size, size * size)
    rep = Report("stochastic", n)
    counts = np.stack([(flat == w).sum(axis=1) for w in Weight], axis=1)
    ok_single = (counts[:, Weight.ONE] == 1) & (counts[:, Weight.T] == 0) & (counts[:, Weight.ONE_MINUS_T] == 0)
    ok_pair = (counts[:, Weight.ONE] == 0) & (counts[:, Weight.T] == 1) & (counts[:, Weight.ONE_MINUS_T] == 1)
    rep.checked = size * size
    for row in np.flatnonzero(~(ok_single | ok_pair)):
        i, j = divmod(int(row), size)
        rep.fail({"i": to_tuple(i, n), "j": to_tuple(j, n),
                  "nonzero": sorted(str(Weight(int(w))) for w in flat[row] if w != Weight.ZERO)})
    return rep


def verify_color_ignorance(n: int, m: int) -> Report:
    """Summing L^n over outputs that agree on colors 1..m gives L^m (as polynomials in t)."""
    if not 1 <= m <= n <= 4:
        raise ValueError("color ignorance check supports 1 <= m <= n <= 4")
    low = (1 << m) - 1
    return _verify_projection(n, m, lambda x: x & low, "color_ignorance", {"m": m})


def interval_partition(blocks: Sequence[Sequence[int]], n: int) -> list[tuple[int, int]]:
    """Validate an ordered partition of 1..n into consecutive intervals; return (start, end) pairs."""
    out = []
    expect = 1
    for block in blocks:
        block = sorted(block)
        if not block or block[0] != expect or block != list(range(block[0], block[-1] + 1)):
            raise ValueError(f"not an ordered interval partition of 1..{n}: {blocks}")
        out.append((block[0], block[-1]))
        expect = block[-1] + 1
    if expect != n + 1:
        raise ValueError(f"partition does not cover 1..{n}: {blocks}")
    return out


def all_interval_partitions(n: int) -> list[list[list[int]]]:
    parts = []
    for cuts in itertools.product((0, 1), repeat=max(n - 1, 0)):
        blocks, cur = [], [1]
        for c, v in zip(cuts, range(2, n + 1)):
            if c:
                blocks.append(cur)
                cur = [v]
            else:
                cur.append(v)
        blocks.append(cur)
        parts.append(blocks)
    return parts


def g_pi(x: int, intervals: Sequence[tuple[int, int]]) -> int:
    """Block-parity map {0,1}^n -> {0,1}^m of an interval partition."""
    out = 0
    for b, (lo, hi) in enumerate(intervals):
        block = (x >> (lo - 1)) & ((1 << (hi - lo + 1)) - 1)
        out |= (bin(block).count("1") & 1) << b
    return out


def verify_mod2_erasure(n: int, blocks: Sequence[Sequence[int]]) -> Report:
    """Summing L^n over outputs with a given block-parity image gives L^m of the images."""
    if not 1 <= n <= 4:
        raise ValueError("mod-2 erasure check supports 1 <= n <= 4")
    intervals = interval_partition(blocks, n)
    return _verify_projection(n, len(intervals), lambda x: g_pi(x, intervals), "mod2_erasure",
                              {"partition": [list(range(a, b + 1)) for a, b in intervals]})


def _verify_projection(n: int, m: int, proj, name: str, params: dict) -> Report:
    big, small = ln_table(n), ln_table(m)
    size, msize = 1 << n, 1 << m
    image = np.array([proj(x) for x in range(size)], dtype=np.int64)
    c0, c1 = _poly_arrays(big)
    rep = Report(name, n, params=params)
    # bucket (k, l) by (proj k, proj l) for every (i, j)
    bucket = (image[:, None] * msize + image[None, :]).ravel()
    c0 = c0.reshape(size * size, size * size)
    c1 = c1.reshape(size * size, size * size)
    s0 = np.zeros((size * size, msize * msize), dtype=np.int64)
    s1 = np.zeros_like(s0)
    for col in range(size * size):
        s0[:, bucket[col]] += c0[:, col]
        s1[:, bucket[col]] += c1[:, col]
    t0, t1 = _poly_arrays(small)
    t0 = t0.reshape(msize * msize, msize * msize)
    t1 = t1.reshape(msize * msize, msize * msize)
    for row in range(size * size):
        i, j = divmod(row, size)
        target = int(image[i]) * msize + int(image[j])
        rep.checked += msize * msize
        bad = np.flatnonzero((s0[row] != t0[target]) | (s1[row] != t1[target]))
        for col in bad:
            kk, ll = divmod(int(col), msize)
            rep.fail({"i": to_tuple(i, n), "j": to_tuple(j, n), "k_image": to_tuple(kk, m),
                      "l_image": to_tuple(ll, m), "sum": [int(s0[row, col]), int(s1[row, col])],
                      "expected": [int(t0[target, col]), int(t1[target, col])]})
    return rep


def enumerate_nonzero(n: int) -> list[tuple[VertexConfig, Weight]]:
    """All configurations with nonzero weight, in descending lexicographic order of (i, j, k, l)."""
    if not 0 <= n <= 4:
        raise ValueError("enumeration supports 0 <= n <= 4")
    if n == 0:
        return [(VertexConfig(0, 0, 0, 0, 0), Weight.ONE)]
    table = ln_table(n)
    size = 1 << n
    found = []
    for i, j, k, l in zip(*np.nonzero(table)):
        cfg = VertexConfig(int(i), int(j), int(k), int(l), n)
        found.append((cfg, Weight(int(table[i, j, k, l]))))
    found.sort(key=lambda cw: cw[0].as_tuples(), reverse=True)
    del size
    return found
