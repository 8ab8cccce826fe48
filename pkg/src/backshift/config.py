"""Experiment configuration: one JSON document, validated on load, with named presets."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .construct.fibers import FiberMap, RationalEnumeration
from .construct.schedule import VARIANTS, build_schedule
from .core.sparse import SparseVector
from .core.weights import weight_from_dict
from .errors import PreconditionError

# the defaults reproduce the V1 flagship run
DEFAULTS = {
    "variant": "v1",
    "levels": 6,
    "p": "2",
    "field": "real",
    "weight": {"kind": "dyadic", "b": 2, "m0": 2},
    "beta": None,
    "rho_prefix": [],
    "enumeration_prefix": [],
    "epsilon": "1/2",
    "delta": "1/10",
    "horizon": None,
    "q_cap": 3,
    "lambda": {"2": "1"},
    "y0": {"1": "1/4"},
    "n_star": 1,
    "y1": ["1/2"],
    "mus": ["2", "3/2"],
    "grid": 33,
    "seed": 0,
    "trials": 100,
    "support_cap": 8,
    "visits": 3,
    "samples": 1000,
}

PRESETS = {
    # V1 visit: x0 = x_2, target 1/4 e_1, blocks of size 1 on level 6
    "v1-flagship": {
        "variant": "v1",
        "levels": 6,
        "weight": {"kind": "dyadic", "b": 2, "m0": 2},
        "q_cap": 3,
        "lambda": {"2": "1"},
        "y0": {"1": "1/4"},
        "n_star": 1,
    },
    # V2 isometry and upper-density checks; level 15 carries e for q = 8
    "v2-isometry": {
        "variant": "v2",
        "levels": 16,
        "weight": {"kind": "dyadic", "b": 2, "m0": 2},
        "q_cap": 8,
        "lambda": {"1": "1", "2": "1/3"},
    },
    # V3 family: r_1 = 2 fills level 2, the large filler rational keeps the next levels cheap
    "v3-family": {
        "variant": "v3",
        "levels": 6,
        "weight": None,
        "enumeration_prefix": ["2", "1000000"],
        "rho_prefix": [[1, "2"], [1, "1000000"], [1, "1000000"]],
        "q_cap": 3,
        "lambda": {"1": "1"},
        "y0": {"1": "1/4"},
        "n_star": 1,
        "y1": ["1/2"],
        "mus": ["2", "3/2"],
    },
}


@dataclass
class ExperimentConfig:
    """Resolved settings for one run."""

    data: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    def __post_init__(self):
        validate(self.data)

    def __getitem__(self, key):
        return self.data[key]

    @property
    def p(self) -> Fraction:
        return Fraction(str(self.data["p"]))

    @property
    def epsilon(self) -> Fraction:
        return Fraction(str(self.data["epsilon"]))

    @property
    def delta(self) -> Fraction:
        return Fraction(str(self.data["delta"]))

    def weight(self):
        spec = self.data.get("weight")
        return weight_from_dict(spec) if spec else None

    def fibers(self) -> FiberMap:
        if self.data["variant"] != "v3":
            return FiberMap("tau")
        enum = RationalEnumeration(tuple(Fraction(str(r)) for r in self.data["enumeration_prefix"]))
        prefix = tuple((int(n), Fraction(str(r))) for n, r in self.data["rho_prefix"])
        return FiberMap("rho", prefix, enum)

    def lam(self) -> dict:
        return {int(q): Fraction(str(v)) for q, v in self.data["lambda"].items()}

    def y0(self) -> SparseVector:
        return SparseVector({int(k): Fraction(str(v)) for k, v in self.data["y0"].items()}, self.p, self.data["field"])

    def y1(self) -> tuple:
        return tuple(Fraction(str(v)) for v in self.data["y1"])

    def mus(self) -> list:
        return [Fraction(str(m)) for m in self.data["mus"]]

    def build_schedule(self):
        beta = self.data.get("beta")
        return build_schedule(
            self.data["variant"],
            int(self.data["levels"]),
            self.p,
            weight=self.weight(),
            beta=Fraction(str(beta)) if beta is not None else None,
            fibers=self.fibers(),
        )

    def context(self, schedule=None):
        from .vectors.context import ConstructionContext

        schedule = schedule or self.build_schedule()
        horizon = self.data.get("horizon")
        return ConstructionContext(
            schedule,
            self.epsilon,
            self.data["field"],
            int(horizon) if horizon is not None else None,
            int(self.data["q_cap"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)


def validate(data: dict):
    """Raise :class:`PreconditionError` on an invalid configuration."""
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise PreconditionError(f"unknown config keys: {sorted(unknown)}")
    if data["variant"] not in VARIANTS:
        raise PreconditionError(f"variant must be one of {VARIANTS}")
    if int(data["levels"]) < 1:
        raise PreconditionError("levels must be positive")
    if Fraction(str(data["p"])) < 1:
        raise PreconditionError("p must be at least 1")
    if data["field"] not in ("real", "complex"):
        raise PreconditionError("field must be real or complex")
    if Fraction(str(data["epsilon"])) <= 0 or Fraction(str(data["delta"])) <= 0:
        raise PreconditionError("epsilon and delta must be positive")
    if data["variant"] != "v3" and not data.get("weight"):
        raise PreconditionError(f"variant {data['variant']} needs a weight")
    if int(data["q_cap"]) < 1:
        raise PreconditionError("q_cap must be positive")


def load_config(path: str | Path | None = None, preset: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then the preset, then the file, then command-line overrides."""
    data = copy.deepcopy(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise PreconditionError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        data.update(copy.deepcopy(PRESETS[preset]))
    if path is not None:
        with open(path) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise PreconditionError("config file must hold a JSON object")
        data.update(loaded)
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return ExperimentConfig(data)
