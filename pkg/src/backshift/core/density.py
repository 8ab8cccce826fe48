"""Finite-horizon densities ``|A ∩ [0, N]| / (N + 1)`` by exact counting."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import PreconditionError
from .intervals import IndexSet


def density_at(a: IndexSet, n: int) -> Fraction:
    """Exact ratio ``|A ∩ [0, n]| / (n + 1)``."""
    if n < 0:
        raise PreconditionError("horizon must be nonnegative")
    return Fraction(a.count_upto(n), n + 1)


@dataclass(frozen=True)
class DensityProfile:
    checkpoints: tuple
    counts: tuple
    values: tuple

    @property
    def minimum(self) -> Fraction:
        return min(self.values)

    @property
    def maximum(self) -> Fraction:
        return max(self.values)

    def csv_rows(self) -> list:
        """Rows ``(horizon, count, ratio)`` with the ratio as a float string."""
        return [(str(n), str(c), repr(float(v))) for n, c, v in zip(self.checkpoints, self.counts, self.values)]


def density_profile(a: IndexSet, checkpoints) -> DensityProfile:
    """One exact density value per checkpoint (sorted ascending)."""
    points = [int(n) for n in checkpoints]
    if any(x > y for x, y in zip(points, points[1:])):
        raise PreconditionError("checkpoints must be sorted ascending")
    counts = [a.count_upto(n) for n in points]
    values = [Fraction(c, n + 1) for c, n in zip(counts, points)]
    return DensityProfile(tuple(points), tuple(counts), tuple(values))
