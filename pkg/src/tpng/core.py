"""Single-colored t-PNG sampler on a rectangle.

The sampler sweeps upward in y over the particle picture: vertical lines are
particles, and each nucleation or sink sends a horizontal line to the right
that crosses a geometric number of particles before annihilating one (or
leaving through the right edge).
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .rng import PointSet, RandomStream, geometric_indices, poisson_field, poisson_on_interval

BoundarySpec = Union[None, float, Sequence[float], np.ndarray]

ORIGIN_SOURCE = 0
ORIGIN_NUCLEATION = 1
LINE_NUCLEATION = 0
LINE_SINK = 1


@dataclass
class SimConfig:
    """Parameters of one t-PNG run on [0, width] x [0, height].

    ``sources`` and ``sinks`` are either explicit sorted positions, a float
    meaning a Poisson process of that intensity, or ``None`` for empty
    boundary. ``nucleations`` is a PointSet, a list of points, or ``None`` for
    a Poisson field of intensity ``nucleation_intensity``.
    """

    t: float
    width: float
    height: float
    seed: int = 0
    sources: BoundarySpec = None
    sinks: BoundarySpec = None
    nucleations: object = None
    nucleation_intensity: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {self.t}")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("rectangle must have positive side lengths")

    def stream(self, label: str) -> RandomStream:
        return RandomStream(int(self.seed), (label,))

    def to_json(self) -> dict:
        def enc(v):
            if v is None or isinstance(v, (int, float)):
                return v
            if isinstance(v, PointSet):
                return [list(p) for p in v.points()]
            return [float(a) if np.ndim(a) == 0 else [float(b) for b in a] for a in v]

        return {
            "t": self.t,
            "width": self.width,
            "height": self.height,
            "seed": self.seed,
            "sources": enc(self.sources),
            "sinks": enc(self.sinks),
            "nucleations": enc(self.nucleations),
            "nucleation_intensity": self.nucleation_intensity,
        }


def _boundary(spec: BoundarySpec, length: float, stream: RandomStream, what: str) -> np.ndarray:
    if spec is None:
        return np.empty(0)
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return poisson_on_interval(length, float(spec), stream)
    arr = np.asarray(spec, dtype=float).ravel()
    if len(arr) and (np.any(arr <= 0) or np.any(arr >= length)):
        raise ValueError(f"{what} must lie strictly inside (0, {length})")
    if np.any(np.diff(arr) <= 0):
        raise ValueError(f"{what} must be strictly increasing")
    return arr


def resolve_inputs(cfg: SimConfig) -> tuple[PointSet, np.ndarray, np.ndarray]:
    """Materialise nucleations, sources and sinks for a config."""
    if cfg.nucleations is None:
        nuc = poisson_field(cfg.width, cfg.height, cfg.nucleation_intensity, cfg.stream("nucleations"))
    elif isinstance(cfg.nucleations, PointSet):
        nuc = cfg.nucleations
        if nuc.width > cfg.width or nuc.height > cfg.height:
            raise ValueError("nucleations do not fit in the rectangle")
    else:
        nuc = PointSet.from_points(cfg.nucleations, cfg.width, cfg.height)
    sources = _boundary(cfg.sources, cfg.width, cfg.stream("sources"), "sources")
    sinks = _boundary(cfg.sinks, cfg.height, cfg.stream("sinks"), "sinks")
    if len(sinks) and len(nuc) and np.intersect1d(sinks, nuc.ys).size:
        raise ValueError("sink heights must differ from nucleation heights")
    return nuc, sources, sinks


@dataclass
class Diagram:
    """The sampled line ensemble. Arrays are indexed by particle, line, crossing and corner ids."""

    config: SimConfig
    nucleations: PointSet
    sources: np.ndarray
    sinks: np.ndarray
    # particles (vertical lines)
    p_x: np.ndarray
    p_y0: np.ndarray
    p_y1: np.ndarray  # death height, inf for particles leaving through the top
    p_origin: np.ndarray
    p_line: np.ndarray  # line born with the particle, -1 for sources
    # horizontal lines, in processing order
    l_kind: np.ndarray
    l_x0: np.ndarray
    l_y: np.ndarray
    l_draw: np.ndarray  # geometric index drawn, 0 when t = 1
    l_ncross: np.ndarray
    l_corner_pid: np.ndarray  # annihilated particle, -1 if the line left through the right edge
    l_x1: np.ndarray
    # crossings, ordered by line then left to right
    c_x: np.ndarray
    c_y: np.ndarray
    c_pid: np.ndarray
    c_line: np.ndarray
    # corners
    k_x: np.ndarray
    k_y: np.ndarray
    k_pid: np.ndarray
    k_line: np.ndarray

    @property
    def width(self) -> float:
        return self.config.width

    @property
    def height(self) -> float:
        return self.config.height

    @property
    def t(self) -> float:
        return self.config.t

    @property
    def empty_boundary(self) -> bool:
        return len(self.sources) == 0 and len(self.sinks) == 0

    @property
    def out_points(self) -> np.ndarray:
        """x-positions where particles leave through the top edge."""
        return np.sort(self.p_x[np.isinf(self.p_y1)])

    @property
    def in_points(self) -> np.ndarray:
        """Heights where horizontal lines leave through the right edge."""
        return np.sort(self.l_y[self.l_corner_pid < 0])

    def crossing_points(self) -> np.ndarray:
        return np.column_stack([self.c_x, self.c_y])

    def corner_points(self) -> np.ndarray:
        return np.column_stack([self.k_x, self.k_y])

    def alpha_points(self) -> np.ndarray:
        return np.concatenate([np.column_stack([self.nucleations.xs, self.nucleations.ys]), self.crossing_points()])

    def beta_points(self) -> np.ndarray:
        return np.concatenate([self.corner_points(), self.crossing_points()])

    def event_log(self) -> list[dict]:
        """One record per horizontal line: origin, drawn index, crossed particles, annihilated particle."""
        out = []
        for li in range(len(self.l_y)):
            pid = int(self.l_corner_pid[li])
            out.append({
                "origin": "nucleation" if self.l_kind[li] == LINE_NUCLEATION else "sink",
                "x": float(self.l_x0[li]),
                "y": float(self.l_y[li]),
                "index": int(self.l_draw[li]),
                "crossed": int(self.l_ncross[li]),
                "annihilated": None if pid < 0 else pid,
            })
        return out

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "nucleations": [[float(a), float(b)] for a, b in self.nucleations.points()],
            "crossings": self.crossing_points().tolist(),
            "corners": self.corner_points().tolist(),
            "in": self.in_points.tolist(),
            "out": self.out_points.tolist(),
        }


@dataclass
class SweepCounts:
    """Totals from a sweep run without recording geometry."""

    height: int  # N(width, height)
    nucleations: int
    crossings: int
    corners: int
    particles_left: int
    sinks: int = 0
    removed_indices: list = field(default_factory=list)


def _event_order(nuc: PointSet, sinks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ys = np.concatenate([nuc.ys, sinks])
    xs = np.concatenate([nuc.xs, np.zeros(len(sinks))])
    kind = np.concatenate([np.zeros(len(nuc), dtype=np.int8), np.ones(len(sinks), dtype=np.int8)])
    order = np.argsort(ys, kind="stable")
    return xs[order], ys[order], kind[order]


def _draws(t: float, count: int, stream: RandomStream) -> np.ndarray:
    if t == 1.0:
        return np.zeros(count, dtype=np.int64)
    return geometric_indices(t, count, stream)


def simulate(config: SimConfig) -> Diagram:
    """Run the sweep and keep the whole diagram."""
    nuc, sources, sinks = resolve_inputs(config)
    ex, ey, ek = _event_order(nuc, sinks)
    draws = _draws(config.t, len(ey), config.stream("coins"))
    width = float(config.width)

    p_x = list(map(float, sources))
    p_y0 = [0.0] * len(p_x)
    p_y1 = [np.inf] * len(p_x)
    p_origin = [ORIGIN_SOURCE] * len(p_x)
    p_line = [-1] * len(p_x)
    pos = list(p_x)
    ids = list(range(len(p_x)))

    l_kind, l_x0, l_y, l_draw, l_ncross, l_corner, l_x1 = [], [], [], [], [], [], []
    c_x, c_y, c_pid, c_line = [], [], [], []
    k_x, k_y, k_pid, k_line = [], [], [], []

    for x, y, kind, draw in zip(ex.tolist(), ey.tolist(), ek.tolist(), draws.tolist()):
        li = len(l_y)
        if kind == 0:
            idx = bisect.bisect_left(pos, x)
            pid = len(p_x)
            p_x.append(x)
            p_y0.append(y)
            p_y1.append(np.inf)
            p_origin.append(ORIGIN_NUCLEATION)
            p_line.append(li)
            pos.insert(idx, x)
            ids.insert(idx, pid)
            start = idx + 1
            l_x0.append(x)
        else:
            start = 0
            l_x0.append(0.0)
        l_kind.append(kind)
        l_y.append(y)
        l_draw.append(draw)
        right = len(pos) - start
        ncross = right if (draw == 0 or draw > right) else draw - 1
        for q in range(start, start + ncross):
            c_x.append(pos[q])
            c_y.append(y)
            c_pid.append(ids[q])
            c_line.append(li)
        l_ncross.append(ncross)
        if ncross < right:
            q = start + ncross
            dead = ids[q]
            k_x.append(pos[q])
            k_y.append(y)
            k_pid.append(dead)
            k_line.append(li)
            p_y1[dead] = y
            l_corner.append(dead)
            l_x1.append(pos[q])
            del pos[q]
            del ids[q]
        else:
            l_corner.append(-1)
            l_x1.append(width)

    f = lambda a: np.asarray(a, dtype=float)
    i = lambda a: np.asarray(a, dtype=np.int64)
    return Diagram(
        config=config, nucleations=nuc, sources=sources, sinks=sinks,
        p_x=f(p_x), p_y0=f(p_y0), p_y1=f(p_y1), p_origin=i(p_origin), p_line=i(p_line),
        l_kind=i(l_kind), l_x0=f(l_x0), l_y=f(l_y), l_draw=i(l_draw), l_ncross=i(l_ncross),
        l_corner_pid=i(l_corner), l_x1=f(l_x1),
        c_x=f(c_x), c_y=f(c_y), c_pid=i(c_pid), c_line=i(c_line),
        k_x=f(k_x), k_y=f(k_y), k_pid=i(k_pid), k_line=i(k_line),
    )


def sweep_counts(config: SimConfig, track_removed: bool = False) -> SweepCounts:
    """Same randomness as :func:`simulate`, keeping only totals (the fast path for experiments)."""
    nuc, sources, sinks = resolve_inputs(config)
    ex, ey, ek = _event_order(nuc, sinks)
    draws = _draws(config.t, len(ey), config.stream("coins"))
    pos = sorted(sources.tolist())
    crossings = corners = 0
    removed = []
    for x, kind, draw in zip(ex.tolist(), ek.tolist(), draws.tolist()):
        if kind == 0:
            idx = bisect.bisect_left(pos, x)
            pos.insert(idx, x)
            start = idx + 1
        else:
            start = 0
        right = len(pos) - start
        if draw == 0 or draw > right:
            crossings += right
        else:
            crossings += draw - 1
            corners += 1
            del pos[start + draw - 1]
            if track_removed:
                removed.append((int(kind), draw, right))
    return SweepCounts(
        height=len(sinks) + len(pos), nucleations=len(nuc), crossings=crossings, corners=corners,
        particles_left=len(pos), sinks=len(sinks), removed_indices=removed,
    )


def _check_query(d: Diagram, x: float, y: float) -> None:
    if not (0.0 <= x <= d.width and 0.0 <= y <= d.height):
        raise ValueError(f"query ({x}, {y}) lies outside [0, {d.width}] x [0, {d.height}]")


def height(d: Diagram, x: float, y: float) -> int:
    """N(x, y): sinks at height <= y plus particles in [0, x] alive at height y (right-continuous).

    On the bottom edge y = 0 only the sink contribution (zero) is returned.
    """
    _check_query(d, x, y)
    sinks = int(np.searchsorted(d.sinks, y, side="right"))
    if y == 0.0:
        return sinks
    alive = (d.p_x <= x) & (d.p_y0 <= y) & (y < d.p_y1)
    return sinks + int(np.count_nonzero(alive))


def heights(d: Diagram, xs, ys) -> np.ndarray:
    return np.array([height(d, float(a), float(b)) for a, b in zip(np.ravel(xs), np.ravel(ys))], dtype=np.int64)


def count_alpha_beta(d: Diagram, x: float, y: float) -> tuple[int, int]:
    """(alpha, beta) counts in the closed rectangle [0, x] x [0, y]; crossings count for both."""
    _check_query(d, x, y)
    nuc = int(np.count_nonzero((d.nucleations.xs <= x) & (d.nucleations.ys <= y)))
    cross = int(np.count_nonzero((d.c_x <= x) & (d.c_y <= y)))
    corner = int(np.count_nonzero((d.k_x <= x) & (d.k_y <= y)))
    return nuc + cross, corner + cross


def height_via_alpha_beta(d: Diagram, x: float, y: float) -> int:
    if not d.empty_boundary:
        raise ValueError("the alpha/beta height identity needs empty boundary data")
    a, b = count_alpha_beta(d, x, y)
    return a - b


@dataclass
class PathVertex:
    x: float
    y: float
    kind: str  # "alpha" or "beta"
    event: str  # "nucleation", "crossing" or "corner"


@dataclass
class DownRightPath:
    vertices: list[PathVertex]
    top_x: float
    right_y: float

    @property
    def n_alpha(self) -> int:
        return sum(v.kind == "alpha" for v in self.vertices)

    @property
    def n_beta(self) -> int:
        return sum(v.kind == "beta" for v in self.vertices)

    def crosses(self, x: float, y: float) -> bool:
        """True when the path separates (x, y) from the origin."""
        return any(v.kind == "alpha" and v.x <= x and v.y <= y for v in self.vertices)


def decompose_paths(d: Diagram) -> list[DownRightPath]:
    """Split the line ensemble into non-crossing down-right paths, ordered from the origin outward.

    A crossing is split into a turn from the left arm down (its beta copy,
    on the path nearer the origin) and a turn from the upper arm right (its
    alpha copy, on the outer path).
    """
    if not d.empty_boundary:
        raise ValueError("path decomposition needs empty boundary data")
    n_p, n_l = len(d.p_x), len(d.l_y)
    on_particle: list[list[int]] = [[] for _ in range(n_p)]
    on_line: list[list[int]] = [[] for _ in range(n_l)]
    for c in range(len(d.c_x)):  # already in increasing y, and left to right along each line
        on_particle[d.c_pid[c]].append(c)
        on_line[d.c_line[c]].append(c)
    ppos = np.empty(len(d.c_x), dtype=np.int64)
    lpos = np.empty(len(d.c_x), dtype=np.int64)
    for lst in on_particle:
        for k, c in enumerate(lst):
            ppos[c] = k
    for lst in on_line:
        for k, c in enumerate(lst):
            lpos[c] = k

    paths = []
    for top in sorted(np.flatnonzero(np.isinf(d.p_y1)), key=lambda p: d.p_x[p]):
        verts: list[PathVertex] = []
        p, k = int(top), len(on_particle[top]) - 1
        while True:
            # moving down particle p; k indexes the next crossing below
            if k >= 0:
                c = on_particle[p][k]
                verts.append(PathVertex(float(d.c_x[c]), float(d.c_y[c]), "alpha", "crossing"))
                line, j = int(d.c_line[c]), int(lpos[c]) + 1
            else:
                line = int(d.p_line[p])
                verts.append(PathVertex(float(d.p_x[p]), float(d.p_y0[p]), "alpha", "nucleation"))
                j = 0
            # moving right along line; j indexes the next crossing to the right
            if j < len(on_line[line]):
                c = on_line[line][j]
                verts.append(PathVertex(float(d.c_x[c]), float(d.c_y[c]), "beta", "crossing"))
                p, k = int(d.c_pid[c]), int(ppos[c]) - 1
                continue
            dead = int(d.l_corner_pid[line])
            if dead < 0:
                paths.append(DownRightPath(verts, float(d.p_x[top]), float(d.l_y[line])))
                break
            verts.append(PathVertex(float(d.p_x[dead]), float(d.l_y[line]), "beta", "corner"))
            p, k = dead, len(on_particle[dead]) - 1
    return paths


def _half_open_counts(px: np.ndarray, py: np.ndarray, qx: np.ndarray, qy: np.ndarray, qw: np.ndarray,
                      chunk: int = 2048) -> np.ndarray:
    """For each p, the weighted count of q with qx <= px and qy < py."""
    out = np.zeros(len(px), dtype=np.int64)
    for s in range(0, len(px), chunk):
        m = (qx[None, :] <= px[s:s + chunk, None]) & (qy[None, :] < py[s:s + chunk, None])
        out[s:s + chunk] = m.astype(np.int64) @ qw
    return out


def v_identity_sides(d: Diagram, s: float, x: float, y: float) -> tuple[float, float]:
    """Both sides of the squared-height identity for the rescaled height on [0, s x] x [0, s y]."""
    if not d.empty_boundary:
        raise ValueError("the identity needs empty boundary data")
    if s <= 0:
        raise ValueError("scale must be positive")
    X, Y = s * x, s * y
    _check_query(d, X, Y)
    alpha = d.alpha_points()
    beta = d.beta_points()
    alpha = alpha[(alpha[:, 0] <= X) & (alpha[:, 1] <= Y)]
    beta = beta[(beta[:, 0] <= X) & (beta[:, 1] <= Y)]
    a1, a2 = len(alpha), len(beta)
    v = (a1 - a2) / s
    qx = np.concatenate([alpha[:, 0], beta[:, 0]])
    qy = np.concatenate([alpha[:, 1], beta[:, 1]])
    qw = np.concatenate([np.ones(a1, dtype=np.int64), -np.ones(a2, dtype=np.int64)])
    below = _half_open_counts(qx, qy, qx, qy, qw)
    stieltjes = float(np.dot(below, qw)) / s**2
    lhs = v * v
    rhs = (a1 + a2) / s**2 + 2.0 * stieltjes
    return lhs, rhs


def check_v_identity(d: Diagram, s: float, x: float, y: float) -> float:
    lhs, rhs = v_identity_sides(d, s, x, y)
    return lhs - rhs


def lis_oracle(points) -> int:
    """Longest up-right chain by patience sorting."""
    if isinstance(points, PointSet):
        xs, ys = points.xs, points.ys
    else:
        arr = np.asarray(list(points), dtype=float).reshape(-1, 2)
        xs, ys = arr[:, 0], arr[:, 1]
    tails: list[float] = []
    for yv in ys[np.argsort(xs, kind="stable")].tolist():
        k = bisect.bisect_left(tails, yv)
        if k == len(tails):
            tails.append(yv)
        else:
            tails[k] = yv
    return len(tails)


def couple_with_png(config: SimConfig) -> tuple[int, int]:
    """Far-corner heights of the t-run and a t = 0 run sharing the same nucleations."""
    if config.sources is not None or config.sinks is not None:
        raise ValueError("the coupling is defined for empty boundary data")
    nuc, _, _ = resolve_inputs(config)
    base = dict(width=config.width, height=config.height, seed=config.seed, nucleations=nuc)
    n_t = sweep_counts(SimConfig(t=config.t, **base)).height
    n_0 = sweep_counts(SimConfig(t=0.0, **base)).height
    return n_t, n_0


def line_counts(d: Diagram, x0: float, x1: float, y0: float, y1: float) -> tuple[int, int]:
    """(lines through top + left, lines through bottom + right) of the rectangle [x0, x1] x [y0, y1].

    Edges are assumed to avoid event coordinates.
    """
    in_x = (d.p_x > x0) & (d.p_x < x1)
    top = np.count_nonzero(in_x & (d.p_y0 < y1) & (d.p_y1 > y1))
    bottom = np.count_nonzero(in_x & (d.p_y0 < y0) & (d.p_y1 > y0))
    in_y = (d.l_y > y0) & (d.l_y < y1)
    left = np.count_nonzero(in_y & (d.l_x0 < x0) & (d.l_x1 > x0))
    right = np.count_nonzero(in_y & (d.l_x0 < x1) & (d.l_x1 > x1))
    return int(top + left), int(bottom + right)
