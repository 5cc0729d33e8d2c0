"""Simulation and estimation toolkit for unimodular discrete spaces.

The package builds random rooted discrete spaces (lattices, trees, random-walk
sets, self-similar sets), equivariant coverings of them, and turns covering
intensities and ball growth into estimates of the unimodular Minkowski and
Hausdorff dimensions.
"""

from unidim.errors import (
    CapExceededError,
    DomainError,
    InvalidRuleError,
    WindowTooSmallError,
)
from unidim.space import Ball, RootedSample, Window, ball, diameter, graph_distances

__all__ = [
    "Ball",
    "CapExceededError",
    "DomainError",
    "InvalidRuleError",
    "RootedSample",
    "Window",
    "WindowTooSmallError",
    "ball",
    "diameter",
    "graph_distances",
]

__version__ = "0.1.0"
