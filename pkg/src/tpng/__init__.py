"""Seedable simulation of the t-PNG growth model and its colored and stationary variants."""

from tpng.rng import RandomStream, PointSet, split_stream, poisson_field, poisson_on_interval, geometric_index
from tpng.weights import Weight
from tpng.core import SimConfig, Diagram, simulate, height, height_via_alpha_beta, count_alpha_beta, lis_oracle
from tpng.colored import ColoredDiagram, simulate_colored, compute_X
from tpng.stationary import StationaryConfig, simulate_stationary

__version__ = "0.1.0"

__all__ = [
    "RandomStream",
    "PointSet",
    "split_stream",
    "poisson_field",
    "poisson_on_interval",
    "geometric_index",
    "Weight",
    "SimConfig",
    "Diagram",
    "simulate",
    "height",
    "height_via_alpha_beta",
    "count_alpha_beta",
    "lis_oracle",
    "ColoredDiagram",
    "simulate_colored",
    "compute_X",
    "StationaryConfig",
    "simulate_stationary",
]
