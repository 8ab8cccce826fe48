"""The vectors ``x_q`` built on a schedule, and the embedding ``T(lambda) = sum lambda_q x_q``.

``x_q = e_{g(psi_{2q-1}(1))} + eps * xt_q`` where ``xt_q`` collects one block per
interval of every even level whose fiber position belongs to the part of ``q``.
The payload of a block is the enumerated ball point ranked by the position
inside the part.  Only blocks whose whole interval lies below the horizon are
realized; the rest is covered by a certified tail bound.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from ..construct.fibers import tau_fiber_position
from ..construct.schedule import IntervalSchedule
from ..core.sparse import SparseVector, to_scalar
from ..core.weights import ParametricWeight
from ..errors import HorizonTooSmall, NotInPart, PreconditionError
from ..shift import theta_embed
from .enumeration import RationalBallEnumerator
from .partition import PartitionMap

DEFAULT_Q_CAP = 8
DEFAULT_BLOCK_LIMIT = 10**6


@dataclass(frozen=True)
class PlacedBlock:
    """One realized block: its level, translate index ``u``, fiber data and values."""

    level: int
    u: int
    size: int
    position: int
    r: Fraction | None
    block: object


class ConstructionContext:
    """Schedule, ``eps``, partition and enumerators for building the vectors ``x_q``."""

    def __init__(
        self,
        schedule: IntervalSchedule,
        epsilon=Fraction(1, 2),
        field: str = "real",
        horizon: int | None = None,
        q_cap: int = DEFAULT_Q_CAP,
        block_limit: int = DEFAULT_BLOCK_LIMIT,
    ):
        self.schedule = schedule
        self.epsilon = Fraction(epsilon)
        if self.epsilon <= 0:
            raise PreconditionError("epsilon must be positive")
        self.p = schedule.p
        self.field = field
        self.horizon = schedule.end if horizon is None else int(horizon)
        self.q_cap = q_cap
        self.block_limit = block_limit
        if schedule.variant == "v3":
            self.partition = PartitionMap("double", schedule.fibers.enumeration)
        else:
            self.partition = PartitionMap("single")
        self._enumerators = {}
        self._weights = {}
        self._built = {}

    @property
    def variant(self) -> str:
        return self.schedule.variant

    def enumerator(self, n: int) -> RationalBallEnumerator:
        if n not in self._enumerators:
            self._enumerators[n] = RationalBallEnumerator(n, self.p, self.field)
        return self._enumerators[n]

    def block_weight(self, r=None):
        """``w`` for V1/V2, ``w_r`` for V3."""
        if self.variant != "v3":
            return self.schedule.weight
        r = Fraction(r)
        if r not in self._weights:
            self._weights[r] = ParametricWeight(r)
        return self._weights[r]

    def distinguished(self, q: int) -> int:
        """``g(psi_{2q-1}(1))``."""
        if q < 1:
            raise PreconditionError("q starts at 1")
        k = 2 * q - 1
        if k > self.schedule.depth:
            raise HorizonTooSmall(f"level {k} is needed for q = {q} but only {self.schedule.depth} are built")
        g = self.schedule.interval(k, 1).hi
        if g > self.horizon:
            raise HorizonTooSmall(f"horizon {self.horizon} is below the distinguished coordinate {g}")
        return g

    def level_part(self, k: int):
        """``(size, position, part, r)`` for the even level ``k``."""
        fibers = self.schedule.fibers
        if self.variant == "v3":
            n, r = fibers.rho(k)
            i = fibers.fiber_position(k)
            part = self.partition.part_of(i)
            return n, i, part, r
        n = fibers.tau(k)
        i = tau_fiber_position(k)
        return n, i, self.partition.part_of(i), None

    def populated_by(self, k: int, q: int) -> bool:
        """Whether ``xt_q`` carries blocks on the even level ``k``."""
        _, _, part, r = self.level_part(k)
        if self.variant == "v3":
            return part == (q, r)
        return part == q

    def placed_blocks(self, q: int) -> tuple:
        """Realized blocks of ``xt_q`` and the smallest ``g`` preceding an omitted level."""
        blocks = []
        # the first even level past the schedule follows a level whose first
        # interval ends at g(psi_depth(1)) (depth odd) or beyond the schedule end
        depth = self.schedule.depth
        omitted_g = self.schedule.interval(depth, 1).hi if depth % 2 else self.schedule.end + 1
        for k in range(2, self.schedule.depth + 1, 2):
            if not self.populated_by(k, q):
                continue
            n, i, _, r = self.level_part(k)
            level = self.schedule.level(k)
            payload = phi(self, n, q, i, r)
            w = self.block_weight(r)
            fitting = _fitting_count(level, self.horizon)
            if fitting < level.count:
                omitted_g = min(omitted_g, self.schedule.interval(k - 1, 1).hi)
            if fitting > self.block_limit:
                raise PreconditionError(f"level {k} would realize {fitting} blocks; lower the horizon")
            for u in range(1, fitting + 1):
                iv = level.interval(u)
                blocks.append(PlacedBlock(k, u, n, i, r, theta_embed(w, iv, payload, self.p, self.field)))
        return blocks, omitted_g

    def build(self, q: int) -> "BuiltVector":
        if q in self._built:
            return self._built[q]
        d = self.distinguished(q)
        blocks, omitted_g = self.placed_blocks(q)
        eps = to_scalar(self.epsilon, self.field)
        tilde = {}
        for pb in blocks:
            for idx, v in pb.block.realize().entries.items():
                tilde[idx] = v
        tilde_vec = SparseVector._raw(tilde, self.p, self.field)
        full = dict((idx, eps * v) for idx, v in tilde.items())
        full[d] = to_scalar(1, self.field)
        vec = SparseVector._raw(full, self.p, self.field)
        out = BuiltVector(q, d, vec, tilde_vec, blocks, omitted_g, _tail_from_g(omitted_g, self.p))
        self._built[q] = out
        return out

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "epsilon": str(self.epsilon),
            "p": str(self.p),
            "field": self.field,
            "horizon": str(self.horizon),
            "q_cap": self.q_cap,
        }


@dataclass
class BuiltVector:
    """``x_q`` truncated at the horizon, with its pieces.

    ``tail_bound`` bounds the p-norm of the omitted part of ``xt_q``; the same
    bound covers ``B^s`` of the omitted part for ``s <= omitted_g``.
    """

    q: int
    distinguished: int
    vector: SparseVector
    tilde: SparseVector
    blocks: list = field(repr=False)
    omitted_g: int = 0
    tail_bound: mpmath.mpf = mpmath.mpf(0)


def _fitting_count(level, horizon: int) -> int:
    """Number of intervals of the level lying entirely within ``[1, horizon]``."""
    if level.last.hi <= horizon:
        return level.count
    if level.first.hi > horizon:
        return 0
    if level.is_progression:
        step = level.intervals.step
        return (horizon - level.first.hi) // step + 1
    return sum(1 for iv in level if iv.hi <= horizon)


def _tail_from_g(g: int, p) -> mpmath.mpf:
    """``2**(-g/p)``: the omitted blocks of size ``n`` contribute at most ``2**-(n+g)`` to the p-th power."""
    p = Fraction(p)
    return mpmath.power(2, -mpmath.mpf(g) * p.denominator / p.numerator)


def phi(ctx: ConstructionContext, n: int, q: int, i: int, r=None) -> tuple:
    """``Phi_n^{p,q}(i)`` (or ``Phi_{n,r}^{p,q}(i)`` for V3): the ball point ranked by ``i`` in its part."""
    if ctx.partition.kind == "double" and r is None:
        raise PreconditionError("the double partition needs r")
    part = q if ctx.partition.kind == "single" else (q, Fraction(r))
    rank = ctx.partition.rank_in(part, i)
    return ctx.enumerator(n)[rank]


def find_index(ctx: ConstructionContext, n: int, q: int, point, r=None) -> int:
    """Inverse of :func:`phi`: the member of the part whose image is ``point``."""
    part = q if ctx.partition.kind == "single" else (q, Fraction(r))
    rank = ctx.enumerator(n).index(point)
    return ctx.partition.member(part, rank)


def build_xq(ctx: ConstructionContext, q: int) -> tuple:
    """``(x_q truncated at the horizon, certified tail bound)``."""
    built = ctx.build(q)
    return built.vector, built.tail_bound


def _lambda_items(ctx: ConstructionContext, lam) -> dict:
    if isinstance(lam, dict):
        items = {int(q): v for q, v in lam.items()}
    else:
        items = {q: v for q, v in enumerate(lam, start=1)}
    out = {}
    for q, v in items.items():
        s = to_scalar(v, ctx.field)
        if s == 0:
            continue
        if q < 1:
            raise PreconditionError("lambda is indexed from 1")
        if q > ctx.q_cap:
            raise PreconditionError(f"lambda_{q} is beyond the cap q <= {ctx.q_cap}")
        out[q] = s
    return out


def apply_T(ctx: ConstructionContext, lam) -> SparseVector:
    """``sum_q lambda_q x_q`` on the realized coordinates; ``lam`` is a list (from ``q = 1``) or a dict."""
    out = {}
    for q, s in _lambda_items(ctx, lam).items():
        for idx, v in ctx.build(q).vector.entries.items():
            out[idx] = s * v
    return SparseVector._raw(out, ctx.p, ctx.field)


def lambda_norm(ctx: ConstructionContext, lam) -> mpmath.mpf:
    items = _lambda_items(ctx, lam)
    return SparseVector._raw(items, ctx.p, ctx.field).p_norm_mp()


def tail_allowance(ctx: ConstructionContext, qs) -> mpmath.mpf:
    """``max_q tail_q``: the omitted part of ``T lambda`` has norm at most ``eps * allowance * ||lambda||``."""
    return max((ctx.build(q).tail_bound for q in qs), default=mpmath.mpf(0))


@dataclass
class IsometryReport:
    trials: int
    min_ratio: float
    max_ratio: float
    allowance: float
    upper_limit: float
    lower_limit: float

    @property
    def passed(self) -> bool:
        return self.min_ratio >= self.lower_limit and self.max_ratio <= self.upper_limit

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "min_ratio": repr(self.min_ratio),
            "max_ratio": repr(self.max_ratio),
            "allowance": repr(self.allowance),
            "upper_limit": repr(self.upper_limit),
            "lower_limit": repr(self.lower_limit),
            "passed": self.passed,
        }


def _random_scalar(rng: random.Random, field: str):
    if field == "complex":
        return complex(rng.gauss(0, 1), rng.gauss(0, 1))
    return rng.gauss(0, 1)


def isometry_report(ctx: ConstructionContext, trials: int = 100, support_cap: int = 8, seed: int = 0) -> IsometryReport:
    """Ratios ``||T lambda|| / ||lambda||`` over random finitely supported ``lambda``."""
    rng = random.Random(seed)
    cap = min(support_cap, ctx.q_cap)
    qs = list(range(1, cap + 1))
    allowance = tail_allowance(ctx, qs)
    lo, hi = None, None
    for _ in range(trials):
        size = rng.randint(1, cap)
        support = rng.sample(qs, size)
        lam = {q: _random_scalar(rng, ctx.field) for q in support}
        ratio = apply_T(ctx, lam).p_norm_mp() / lambda_norm(ctx, lam)
        lo = ratio if lo is None else min(lo, ratio)
        hi = ratio if hi is None else max(hi, ratio)
    eps = float(ctx.epsilon)
    return IsometryReport(
        trials=trials,
        min_ratio=float(lo) if lo is not None else 1.0,
        max_ratio=float(hi) if hi is not None else 1.0,
        allowance=float(allowance),
        upper_limit=(1 + eps) * (1 + float(allowance)),
        lower_limit=1 - 1e-9,
    )


def vector_to_json(x: SparseVector) -> dict:
    return x.to_json()


def vector_from_json(data: dict) -> SparseVector:
    return SparseVector.from_json(data)


def check_part(ctx: ConstructionContext, q: int, i: int, r=None):
    """Raise ``NotInPart`` unless ``i`` lies in the part of ``q`` (and ``r``)."""
    part = q if ctx.partition.kind == "single" else (q, Fraction(r))
    if not ctx.partition.contains(part, i):
        raise NotInPart(f"{i} is not in part {part}")
