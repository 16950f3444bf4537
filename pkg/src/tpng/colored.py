"""Colored t-PNG sweep, the step colored model and the two-color couplings.

Color bundles are bitmasks (see :mod:`tpng.weights`): bit 0 is the highest
priority color. In the step colored model on [0, n]^2 the nucleation label
-r maps to bit n - r, so the innermost label -n is the highest priority.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import SimConfig, resolve_inputs
from .rng import RandomStream, poisson_field
from .weights import MAX_COLORS, ln_weight, Weight, VertexConfig

_BUFFER = 4096


class _Coins:
    """Buffered uniforms drawn only when a vertex actually has two outcomes."""

    def __init__(self, stream: RandomStream):
        self.stream = stream
        self.buf: list[float] = []
        self.k = 0

    def next(self) -> float:
        if self.k == len(self.buf):
            self.buf = self.stream.uniform(_BUFFER).tolist()
            self.k = 0
        u = self.buf[self.k]
        self.k += 1
        return u


@dataclass
class ColoredDiagram:
    n: int  # number of colors (bits)
    t: float
    width: float
    height: float
    seed: int
    nucleations: np.ndarray  # (K, 2)
    nucleation_bits: list
    sources: list  # (x, bits)
    sinks: list  # (y, bits)
    vertices: list  # (x, y, i, j, k, l)
    snapshots: dict  # height -> (positions array, bits list)
    out_bundles: list  # (x, bits) at the top edge
    in_bundles: list  # (y, bits) leaving through the right edge
    trace: list = field(default_factory=list)  # (y, #bit0 bundles, #odd bundles, #bit0 & even bundles)
    v_segments: list = field(default_factory=list)  # (x, y0, y1, bits)
    h_segments: list = field(default_factory=list)  # (x0, x1, y, bits)
    box: int | None = None  # side of the step colored box

    def snapshot(self, level: int) -> tuple[np.ndarray, list]:
        if level not in self.snapshots:
            raise ValueError(f"no snapshot at height {level}")
        return self.snapshots[level]

    def to_json(self) -> dict:
        return {
            "n": self.n, "t": self.t, "seed": self.seed, "width": self.width, "height": self.height,
            "nucleations": [[float(a), float(b), int(c)] for (a, b), c in zip(self.nucleations.tolist(), self.nucleation_bits)],
            "vertices": [list(v) for v in self.vertices],
            "out": [[float(a), int(b)] for a, b in self.out_bundles],
            "in": [[float(a), int(b)] for a, b in self.in_bundles],
        }


def colored_sweep(n: int, t: float, width: float, height: float, nucleations: np.ndarray, nucleation_bits,
                  sources=(), sinks=(), coins: RandomStream | None = None, snapshot_heights=(),
                  seed: int = 0, record_vertices: bool = True) -> ColoredDiagram:
    """Sweep a colored ensemble. ``sources`` are (x, bits), ``sinks`` are (y, bits)."""
    if not 1 <= n <= MAX_COLORS:
        raise ValueError(f"number of colors must be in [1, {MAX_COLORS}]")
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    full = (1 << n) - 1
    coins_buf = _Coins(coins if coins is not None else RandomStream(seed, ("coins",)))

    events = [(float(y), 0, float(x), int(b)) for (x, y), b in zip(np.asarray(nucleations).reshape(-1, 2).tolist(), nucleation_bits)]
    events += [(float(y), 1, 0.0, int(b)) for y, b in sinks]
    events.sort(key=lambda e: e[0])
    snaps = sorted(float(h) for h in snapshot_heights)

    src = sorted((float(x), int(b)) for x, b in sources)
    pos = [x for x, _ in src]
    bits = [b for _, b in src]
    since = [0.0] * len(pos)
    v_segments, h_segments = [], []
    for b in bits + [e[3] for e in events]:
        if not 0 < b <= full:
            raise ValueError(f"color bundle {b:#b} is not a non-empty {n}-color vector")

    # running counts for the coupling traces
    c_low = sum(b & 1 for b in bits)
    c_odd = sum(bin(b).count("1") & 1 for b in bits)
    c_bad = sum((b & 1) and not (bin(b).count("1") & 1) for b in bits)

    def tally(b: int, sign: int) -> None:
        nonlocal c_low, c_odd, c_bad
        odd = bin(b).count("1") & 1
        c_low += sign * (b & 1)
        c_odd += sign * odd
        c_bad += sign * ((b & 1) and not odd)

    vertices, in_bundles, trace, snapshots = [], [], [(0.0, c_low, c_odd, c_bad)], {}
    si = 0
    for y, kind, x, lb in events:
        while si < len(snaps) and snaps[si] < y:
            snapshots[_snap_key(snaps[si])] = (np.array(pos), list(bits))
            si += 1
        if kind == 0:
            idx = bisect.bisect_left(pos, x)
            pos.insert(idx, x)
            bits.insert(idx, lb)
            since.insert(idx, y)
            tally(lb, 1)
            q = idx + 1
        else:
            q = 0
        l = lb
        hx = x
        while l and q < len(pos):
            i = bits[q]
            # prefix parities; coin rows are where both are odd
            a = i
            b = l
            for sh in (1, 2, 4, 8, 16, 32):
                a ^= a << sh
                b ^= b << sh
            a &= full
            b &= full
            coin = a & b
            if coin and (t == 1.0 or coins_buf.next() < t):
                k, l2 = i, l
            elif coin:
                ca = a & ~coin
                cb = b & ~coin
                k = (ca ^ (ca << 1)) & full
                l2 = (cb ^ (cb << 1)) & full
            else:
                k, l2 = i, l
            if record_vertices:
                vertices.append((pos[q], y, i, l, k, l2))
                h_segments.append((hx, pos[q], y, l))
                hx = pos[q]
                if k != i:
                    v_segments.append((pos[q], since[q], y, i))
                    since[q] = y
            if k != i:
                tally(i, -1)
                if k:
                    tally(k, 1)
            if k:
                bits[q] = k
                q += 1
            else:
                del pos[q]
                del bits[q]
                del since[q]
            l = l2
        if l:
            in_bundles.append((y, l))
            if record_vertices:
                h_segments.append((hx, float(width), y, l))
        trace.append((y, c_low, c_odd, c_bad))
    while si < len(snaps):
        snapshots[_snap_key(snaps[si])] = (np.array(pos), list(bits))
        si += 1
    if record_vertices:
        v_segments += [(x, y0, float(height), b) for x, y0, b in zip(pos, since, bits)]
    nuc = np.asarray(nucleations, dtype=float).reshape(-1, 2)
    return ColoredDiagram(
        n=n, t=t, width=float(width), height=float(height), seed=seed, nucleations=nuc,
        nucleation_bits=[int(b) for b in nucleation_bits], sources=list(sources), sinks=list(sinks),
        vertices=vertices, snapshots=snapshots, out_bundles=list(zip(pos, bits)), in_bundles=in_bundles,
        trace=trace, v_segments=v_segments, h_segments=h_segments,
    )


def _snap_key(h: float):
    return int(h) if float(h).is_integer() else h


def step_color(x: float, y: float) -> int:
    """Label of a nucleation in the step colored model: -(min(floor x, floor y) + 1)."""
    if x <= 0 or y <= 0:
        raise ValueError("point must lie in the open positive quadrant")
    if float(x).is_integer() or float(y).is_integer():
        raise ValueError("step coloring is undefined on integer coordinates")
    return -(min(math.floor(x), math.floor(y)) + 1)


def label_to_bit(label: int, n: int) -> int:
    """Bit index of label -r in an n-box: the highest priority label -n sits at bit 0."""
    r = -label
    if not 1 <= r <= n:
        raise ValueError(f"label {label} outside -1..-{n}")
    return n - r


def simulate_colored(n: int, t: float, seed: int, record_vertices: bool = True) -> ColoredDiagram:
    """Step colored model on [0, n]^2 with snapshots at every integer height."""
    if not 1 <= n <= MAX_COLORS:
        raise ValueError(f"box side must be in [1, {MAX_COLORS}], got {n}")
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    stream = RandomStream(int(seed), ("nucleations",))
    pts = poisson_field(float(n), float(n), 1.0, stream)
    while np.any(np.mod(pts.xs, 1.0) == 0) or np.any(np.mod(pts.ys, 1.0) == 0):  # probability zero
        pts = poisson_field(float(n), float(n), 1.0, stream)
    nb = [1 << label_to_bit(step_color(x, y), n) for x, y in pts.points()]
    d = colored_sweep(n, t, n, n, np.column_stack([pts.xs, pts.ys]), nb,
                      coins=RandomStream(int(seed), ("coins",)), snapshot_heights=range(n + 1),
                      seed=seed, record_vertices=record_vertices)
    d.box = n
    return d


def compute_X(d: ColoredDiagram, m: int, n: int) -> int:
    """Sum over bundles on [m, n] x {n} of the parity of their colors among labels -n..-(m+1)."""
    if d.box is None:
        raise ValueError("compute_X needs a step colored diagram")
    if not 0 <= m <= n <= d.box:
        raise ValueError(f"need 0 <= m <= n <= {d.box}, got m={m}, n={n}")
    if m == n:
        return 0
    pos, bits = d.snapshot(n)
    mask = ((1 << (n - m)) - 1) << (d.box - n)
    total = 0
    for x, b in zip(pos.tolist(), bits):
        if m <= x <= n:
            total += bin(b & mask).count("1") & 1
    return total


def X_matrix(d: ColoredDiagram) -> np.ndarray:
    box = d.box
    out = np.zeros((box + 1, box + 1), dtype=np.int64)
    for n in range(box + 1):
        for m in range(n + 1):
            out[m, n] = compute_X(d, m, n)
    return out


def parity_count(d: ColoredDiagram, level: int, x_max: float | None = None) -> int:
    """Bundles with an odd number of colors at a snapshot: the mod-2 projected line count."""
    pos, bits = d.snapshot(level)
    x_max = level if x_max is None else x_max
    return sum(bin(b).count("1") & 1 for x, b in zip(pos.tolist(), bits) if x <= x_max)


@dataclass
class SuperadditivityReport:
    check: str
    n: int
    seed: int
    passed: bool
    violations: list

    def to_json(self) -> dict:
        return {"check": self.check, "n": self.n, "seed": self.seed, "pass": self.passed,
                "counterexamples": self.violations}


def verify_superadditivity(d: ColoredDiagram) -> SuperadditivityReport:
    X = X_matrix(d)
    bad = []
    if X[0, 0] != 0:
        bad.append({"m": 0, "n": 0, "X00": int(X[0, 0])})
    for n in range(d.box + 1):
        for m in range(n + 1):
            if X[0, n] < X[0, m] + X[m, n]:
                bad.append({"m": m, "n": n, "seed": d.seed, "X0n": int(X[0, n]), "X0m": int(X[0, m]), "Xmn": int(X[m, n])})
    return SuperadditivityReport("superadditivity", d.box, d.seed, not bad, bad)


def logged_weights(d: ColoredDiagram) -> list[Weight]:
    return [ln_weight(VertexConfig(i, j, k, l, d.n)) for _, _, i, j, k, l in d.vertices]


# ---------------------------------------------------------------------------
# two-color couplings (bit 0 = color 1, bit 1 = color 2)


@dataclass
class CouplingTrace:
    heights: np.ndarray  # event heights, starting at 0
    base: np.ndarray  # particle count of the color-1 process
    augmented: np.ndarray  # particle count of the mod-2 process
    not_contained: np.ndarray  # color-1 particles missing from the mod-2 process
    extra_so_far: np.ndarray  # extra boundary points up to each height (sinks only)
    base_height: int  # far corner heights
    augmented_height: int
    diagram: ColoredDiagram


def _coupling_inputs(config: SimConfig):
    nuc, sources, sinks = resolve_inputs(config)
    return np.column_stack([nuc.xs, nuc.ys]), sources, sinks


def _trace(d: ColoredDiagram, extra_heights: np.ndarray, base_sinks: int, aug_sinks: int) -> CouplingTrace:
    tr = np.asarray(d.trace, dtype=float)
    hs = tr[:, 0]
    extra = np.searchsorted(np.sort(extra_heights), hs, side="right")
    return CouplingTrace(
        heights=hs, base=tr[:, 1].astype(np.int64), augmented=tr[:, 2].astype(np.int64),
        not_contained=tr[:, 3].astype(np.int64), extra_so_far=extra.astype(np.int64),
        base_height=base_sinks + int(tr[-1, 1]), augmented_height=aug_sinks + int(tr[-1, 2]), diagram=d,
    )


def couple_add_sources(base_sources: Sequence[float], extra_sources: Sequence[float], config: SimConfig) -> CouplingTrace:
    """Base sources and nucleations colored 1, extra sources colored 2.

    The color-1 process is the t-PNG with the base sources, the mod-2 process
    the t-PNG with all sources; the color-1 particles stay contained in the
    mod-2 particles.
    """
    if set(map(float, base_sources)) & set(map(float, extra_sources)):
        raise ValueError("base and extra sources must be disjoint")
    nuc, _, sinks = _coupling_inputs(config)
    srcs = [(float(x), 1) for x in base_sources] + [(float(x), 2) for x in extra_sources]
    d = colored_sweep(2, config.t, config.width, config.height, nuc, [1] * len(nuc), sources=srcs,
                      sinks=[(float(y), 1) for y in sinks], coins=config.stream("coins"),
                      seed=config.seed, record_vertices=False)
    return _trace(d, np.empty(0), len(sinks), len(sinks))


def couple_add_sinks(base_sinks: Sequence[float], extra_sinks: Sequence[float], config: SimConfig) -> CouplingTrace:
    """Base sinks, sources and nucleations colored 1, extra sinks colored 2."""
    if set(map(float, base_sinks)) & set(map(float, extra_sinks)):
        raise ValueError("base and extra sinks must be disjoint")
    nuc, sources, _ = _coupling_inputs(config)
    sk = [(float(y), 1) for y in base_sinks] + [(float(y), 2) for y in extra_sinks]
    d = colored_sweep(2, config.t, config.width, config.height, nuc, [1] * len(nuc),
                      sources=[(float(x), 1) for x in sources], sinks=sk, coins=config.stream("coins"),
                      seed=config.seed, record_vertices=False)
    return _trace(d, np.asarray(extra_sinks, dtype=float), len(base_sinks), len(base_sinks) + len(extra_sinks))
