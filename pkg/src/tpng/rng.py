"""Deterministic random primitives.

Every stream is keyed by ``(seed, label path)`` through a BLAKE2b hash into a
Philox counter-based generator, so replicas running side by side never share
state and any stream can be rebuilt from its key alone.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

SEED_MASK = (1 << 64) - 1


def _derive_key(seed: int, path: tuple[str, ...]) -> int:
    h = hashlib.blake2b(digest_size=16)
    h.update(int(seed & SEED_MASK).to_bytes(8, "little"))
    for label in path:
        h.update(b"\x1f")
        h.update(label.encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def derive_seed(seed: int, *labels: object) -> int:
    """Hash a seed and labels down to a fresh 64-bit seed (used for replica seeds)."""
    key = _derive_key(seed, tuple(str(x) for x in labels))
    return key & SEED_MASK


@dataclass
class RandomStream:
    """A labelled random stream. Two streams with equal (seed, path) draw identically."""

    seed: int
    path: tuple[str, ...] = ()
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.seed < 0 or self.seed > SEED_MASK:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        self.generator = np.random.Generator(np.random.Philox(key=_derive_key(self.seed, self.path)))

    def child(self, label: str) -> "RandomStream":
        return RandomStream(self.seed, self.path + (label,))

    def uniform(self, size=None):
        return self.generator.random(size)

    def uniform_open(self, size=None):
        """Uniforms on (0, 1]."""
        return 1.0 - self.generator.random(size)

    def poisson(self, lam: float) -> int:
        return int(self.generator.poisson(lam))


def split_stream(seed: int, label: str) -> RandomStream:
    return RandomStream(int(seed), (label,))


@dataclass(frozen=True)
class PointSet:
    """Points in the open rectangle (0, width) x (0, height), stored sorted by y."""

    xs: np.ndarray
    ys: np.ndarray
    width: float
    height: float

    def __post_init__(self) -> None:
        if self.xs.shape != self.ys.shape:
            raise ValueError("xs and ys must have equal length")

    def __len__(self) -> int:
        return len(self.xs)

    @classmethod
    def from_points(cls, points, width: float, height: float) -> "PointSet":
        arr = np.asarray(list(points), dtype=float).reshape(-1, 2)
        xs, ys = arr[:, 0], arr[:, 1]
        if len(xs):
            if np.any(xs <= 0) or np.any(xs >= width) or np.any(ys <= 0) or np.any(ys >= height):
                raise ValueError("points must lie strictly inside the rectangle")
            if len(np.unique(xs)) != len(xs) or len(np.unique(ys)) != len(ys):
                raise ValueError("points must have pairwise distinct x- and y-coordinates")
        order = np.argsort(ys, kind="stable")
        return cls(xs[order].copy(), ys[order].copy(), float(width), float(height))

    @classmethod
    def empty(cls, width: float, height: float) -> "PointSet":
        return cls(np.empty(0), np.empty(0), float(width), float(height))

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))


def _redraw_duplicates(values: np.ndarray, scale: float, stream: RandomStream) -> np.ndarray:
    values = values.copy()
    while True:
        _, first, counts = np.unique(values, return_index=True, return_counts=True)
        dup = np.ones(len(values), dtype=bool)
        dup[first] = False
        bad = dup | (values <= 0.0) | (values >= scale)
        if not bad.any():
            return values
        values[bad] = stream.uniform(int(bad.sum())) * scale


def poisson_field(width: float, height: float, intensity: float, stream: RandomStream) -> PointSet:
    """Homogeneous Poisson points on (0, width) x (0, height) with distinct coordinates."""
    if not (width > 0 and height > 0):
        raise ValueError(f"degenerate rectangle {width} x {height}")
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    if intensity == 0:
        return PointSet.empty(width, height)
    count = stream.poisson(intensity * width * height)
    xs = _redraw_duplicates(stream.uniform(count) * width, width, stream)
    ys = _redraw_duplicates(stream.uniform(count) * height, height, stream)
    order = np.argsort(ys, kind="stable")
    return PointSet(xs[order], ys[order], float(width), float(height))


def poisson_on_interval(length: float, intensity: float, stream: RandomStream) -> np.ndarray:
    """Sorted, strictly increasing Poisson points in (0, length)."""
    if not length > 0:
        raise ValueError("length must be positive")
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    if intensity == 0:
        return np.empty(0)
    count = stream.poisson(intensity * length)
    pts = _redraw_duplicates(stream.uniform(count) * length, length, stream)
    return np.sort(pts)


def geometric_indices(t: float, size: int, stream: RandomStream) -> np.ndarray:
    """``size`` i.i.d. draws with P(i) = t**(i-1) * (1-t), i >= 1, by inversion."""
    if not 0.0 <= t < 1.0:
        raise ValueError(f"geometric index needs 0 <= t < 1, got {t}")
    if t == 0.0:
        return np.ones(size, dtype=np.int64)
    u = stream.uniform_open(size)
    return np.floor(np.log(u) / math.log(t)).astype(np.int64) + 1


def geometric_index(t: float, stream: RandomStream) -> int:
    return int(geometric_indices(t, 1, stream)[0])
