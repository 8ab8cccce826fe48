"""Certificates against frequent (and upper frequent) hypercyclicity.

Both rest on one observation: ``pi_1(B^n x0) = omega_1...omega_n * x0_{n+1}``,
so the first coordinate of the orbit vanishes whenever ``n + 1`` misses the
support.  The support lies in the union of the schedule intervals, whose
complement has density at least ``(k-1)/k`` just before level ``k`` starts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from ..core.density import density_at
from ..core.intervals import IndexSet
from ..core.sparse import SparseVector
from ..errors import PreconditionError
from ..shift import shifted_coordinate

EXHAUSTIVE_LIMIT = 2 * 10**5


@dataclass(frozen=True)
class DensityCheck:
    level: int
    horizon: int
    density: Fraction
    floor: Fraction

    @property
    def passed(self) -> bool:
        return self.density >= self.floor


@dataclass
class StructuralCheck:
    samples: int
    support_outside: list = field(default_factory=list)
    nonzero_hits: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.support_outside and not self.nonzero_hits


@dataclass
class NonHypercyclicityReport:
    kind: str
    structural: StructuralCheck
    densities: list
    min_location: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.structural.passed and all(d.passed for d in self.densities) and all(m["passed"] for m in self.min_location)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "structural": {
                "samples": self.structural.samples,
                "support_outside": [str(k) for k in self.structural.support_outside],
                "nonzero_hits": [str(k) for k in self.structural.nonzero_hits],
                "passed": self.structural.passed,
            },
            "densities": [
                {"level": d.level, "horizon": str(d.horizon), "density": str(d.density), "floor": str(d.floor), "passed": d.passed}
                for d in self.densities
            ],
            "min_location": self.min_location,
            "passed": self.passed,
        }

    def csv_rows(self) -> list:
        return [(str(d.horizon), str(d.density.numerator), repr(float(d.density))) for d in self.densities]


def _structural(carrier: IndexSet, x0: SparseVector, w, samples: int, seed: int, horizon: int) -> StructuralCheck:
    """Support inside the carrier; ``pi_1(B^n x0) = 0`` for sampled ``n`` with ``n + 1`` outside it."""
    out = StructuralCheck(samples)
    out.support_outside = [k for k in x0.support if k > carrier.bound or k not in carrier]
    rng = random.Random(seed)
    taken = 0
    while taken < samples:
        n = rng.randrange(0, horizon)
        if n + 1 in carrier:
            continue
        taken += 1
        if (n + 1) in x0.entries:
            out.nonzero_hits.append(n)
        elif w is not None and shifted_coordinate(w, x0, n, 1) != 0:
            out.nonzero_hits.append(n)
    return out


def non_fhc_certificate(schedule, x0: SparseVector, checkpoints=None, w=None, samples: int = 1000, seed: int = 0) -> NonHypercyclicityReport:
    """Complement of the carrier at ``p(psi_k(1)) - 1`` has density ``>= (k-1)/k``; ``pi_1`` vanishes off it.

    ``w`` is the shift weight used for the ``pi_1`` evaluation (defaults to the
    schedule weight; pass ``w_mu`` for V3).
    """
    carrier = schedule.m_set()
    complement = carrier.complement()
    ks = list(checkpoints) if checkpoints is not None else list(range(2, schedule.depth + 1))
    dens = []
    for k in ks:
        h = schedule.interval(k, 1).lo - 1
        dens.append(DensityCheck(k, h, density_at(complement, h), Fraction(k - 1, k)))
    weight = w if w is not None else schedule.weight
    structural = _structural(carrier, x0, weight, samples, seed, schedule.end)
    return NonHypercyclicityReport("nonfhc", structural, dens)


def _min_location(complement: IndexSet, lo: int, g: int, hi: int, rng: random.Random) -> dict:
    """Check that ``s -> density_at(complement, s)`` on ``[lo, hi)`` is smallest at ``s = g``."""
    at_g = density_at(complement, g)
    if hi - lo <= EXHAUSTIVE_LIMIT:
        # incremental counts over the whole range
        count = complement.count_upto(lo - 1) if lo > 0 else 0
        best, where = None, None
        for s in range(lo, hi):
            count += 0 if s not in complement else 1
            value = Fraction(count, s + 1)
            if best is None or value < best:
                best, where = value, s
        mode = "exhaustive"
    else:
        points = {lo, g, g + 1, hi - 1} | {rng.randrange(lo, hi) for _ in range(1000)}
        pairs = [(density_at(complement, s), s) for s in sorted(points) if lo <= s < hi]
        best, where = min(pairs)
        mode = "sampled"
    return {"lo": str(lo), "g": str(g), "hi": str(hi), "argmin": str(where), "mode": mode, "passed": where == g and best == at_g}


def non_ufhc_certificate(schedule, x0: SparseVector, checkpoints=None, w=None, samples: int = 1000, seed: int = 0, min_levels: int = 3) -> NonHypercyclicityReport:
    """Complement of the first intervals over ``[0, g(psi_k(1))]`` has density ``>= (k-1)/k``.

    Also checks on ``min_levels`` random levels that the complement density on
    ``[p(psi_k(1)), p(psi_{k+1}(1)))`` is smallest at ``g(psi_k(1))``.
    """
    if schedule.variant != "v2":
        raise PreconditionError("the upper-density certificate needs a v2 schedule")
    carrier = schedule.first_interval_set()
    complement = carrier.complement()
    ks = list(checkpoints) if checkpoints is not None else list(range(2, schedule.depth + 1))
    dens = []
    for k in ks:
        g = schedule.interval(k, 1).hi
        dens.append(DensityCheck(k, g, density_at(complement, g), Fraction(k - 1, k)))
    rng = random.Random(seed)
    pool = list(range(2, schedule.depth))
    chosen = sorted(rng.sample(pool, min(min_levels, len(pool))))
    mins = []
    for k in chosen:
        lo = schedule.interval(k, 1).lo
        g = schedule.interval(k, 1).hi
        hi = schedule.interval(k + 1, 1).lo
        entry = _min_location(complement, lo, g, hi, rng)
        entry["level"] = k
        mins.append(entry)
    weight = w if w is not None else schedule.weight
    structural = _structural(carrier, x0, weight, samples, seed, schedule.end)
    return NonHypercyclicityReport("nonufhc", structural, dens, mins)
