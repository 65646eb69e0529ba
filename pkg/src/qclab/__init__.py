"""Numerical experiments on Grunsky norms, Fredholm eigenvalues and
quasiconformal reflections of polygons and smooth curves."""

from .errors import (
    AccuracyError,
    ConditioningWarning,
    DegenerateVertexError,
    DomainError,
    InfiniteNormError,
    NonconvergenceError,
    QclabError,
    ResolutionError,
    SamplingDensityError,
)
from .polygeom import AffineDeformation, BeltramiConst, Polygon, beltrami_compose, make_polygon

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "AffineDeformation",
    "BeltramiConst",
    "ConditioningWarning",
    "DegenerateVertexError",
    "DomainError",
    "InfiniteNormError",
    "NonconvergenceError",
    "Polygon",
    "QclabError",
    "ResolutionError",
    "SamplingDensityError",
    "beltrami_compose",
    "make_polygon",
]
