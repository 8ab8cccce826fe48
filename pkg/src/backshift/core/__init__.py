"""Weights, intervals, index sets, sparse vectors and densities."""

from .density import DensityProfile, density_at, density_profile
from .intervals import IndexSet, IntegerInterval, IntervalProgression
from .sparse import SparseVector, coordinate, p_norm
from .weights import (
    DyadicWeight,
    ParametricWeight,
    TabulatedWeight,
    WeightSequence,
    log_product,
    weight_at,
    weight_from_dict,
)

__all__ = [
    "DensityProfile",
    "DyadicWeight",
    "IndexSet",
    "IntegerInterval",
    "IntervalProgression",
    "ParametricWeight",
    "SparseVector",
    "TabulatedWeight",
    "WeightSequence",
    "coordinate",
    "density_at",
    "density_profile",
    "log_product",
    "p_norm",
    "weight_at",
    "weight_from_dict",
]
