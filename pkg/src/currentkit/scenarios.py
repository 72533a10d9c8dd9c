"""Scenario configuration: JSON descriptions of chains, motions, and
cochains, plus the bundled scenario library used by the command line."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .chains import (Chain, boundary, triangle_chain, unit_interval_chain,
                     unit_square_chain)
from .forms import Box, TimePolynomialForm
from .motion import Cochain, Motion, make_motion
from .polynomial import Polynomial

__all__ = ["ScenarioConfig", "load_config", "builtin_scenarios"]

_BUILTIN_CHAINS = {
    "square": lambda: unit_square_chain(),
    "boundary_square": lambda: boundary(unit_square_chain()),
    "interval": lambda: unit_interval_chain(),
    "triangle": lambda: triangle_chain(),
    "boundary_triangle": lambda: boundary(triangle_chain()),
}


@dataclass
class ScenarioConfig:
    """One named experiment: a chain convected by a motion and probed by a
    (possibly time-dependent) polynomial cochain.

    `chain` is either {"builtin": name} or {"file": path}; `cochain` maps
    comma-joined spatial multi-indices to polynomial term lists in the
    variables (t, x_1, ..., x_n).
    """

    name: str
    ambient: int = 2
    chain: dict = field(default_factory=lambda: {"builtin": "square"})
    motion: dict = field(default_factory=lambda: {"family": "identity"})
    cochain: dict = None
    density: dict = None          # 0-form coefficient for classical transport
    tau: float = 0.2
    eps_ladder: tuple = (1e-2, 1e-3, 1e-4)
    levels: int = 0
    panels: int = 8
    resolution: int = 4
    box: dict = None
    seed: int = 42

    @classmethod
    def from_obj(cls, obj: dict) -> "ScenarioConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown scenario fields: {sorted(extra)}")
        if "name" not in obj:
            raise ValueError("scenario missing required field 'name'")
        cfg = cls(**{k: obj[k] for k in obj})
        cfg.eps_ladder = tuple(float(e) for e in cfg.eps_ladder)
        return cfg

    # -- builders ------------------------------------------------------

    def build_chain(self) -> Chain:
        spec = self.chain
        if "builtin" in spec:
            name = spec["builtin"]
            if name not in _BUILTIN_CHAINS:
                raise ValueError(f"unknown builtin chain: {name}")
            T = _BUILTIN_CHAINS[name]()
        elif "file" in spec:
            T = Chain.load(spec["file"])
        else:
            raise ValueError("chain spec needs 'builtin' or 'file'")
        mult = spec.get("multiplier", 1.0)
        return T * mult if mult != 1.0 else T

    def build_motion(self) -> Motion:
        spec = dict(self.motion)
        family = spec.pop("family")
        interval = tuple(spec.pop("interval", (-1.0, 1.0)))
        return make_motion(family, ambient=self.ambient, interval=interval,
                           k_m=self.build_box(), **spec)

    def build_cochain(self) -> Cochain:
        if self.cochain is None:
            raise ValueError(f"scenario {self.name} has no cochain")
        degree = int(self.cochain["degree"])
        comps = {}
        for key, body in self.cochain["components"].items():
            idx = tuple(int(s) for s in key.split(",")) if key else ()
            comps[idx] = Polynomial.from_json_obj(self.ambient + 1, body)
        return Cochain(TimePolynomialForm(self.ambient, degree, comps),
                       name=self.name)

    def build_density(self) -> TimePolynomialForm:
        if self.density is None:
            raise ValueError(f"scenario {self.name} has no density")
        poly = Polynomial.from_json_obj(self.ambient + 1, self.density)
        return TimePolynomialForm(self.ambient, 0, {(): poly})

    def build_box(self) -> Box:
        if self.box is None:
            return Box.unit(self.ambient, resolution=self.resolution)
        lo = tuple(float(v) for v in self.box["lower"])
        hi = tuple(float(v) for v in self.box["upper"])
        pad = float(self.box.get("pad", 0.5))
        res = int(self.box.get("resolution", self.resolution))
        return Box(tuple(v - pad for v in lo), tuple(v + pad for v in hi),
                   lo, hi, resolution=res)


def load_config(path) -> list:
    """Scenario list from a JSON file: either a single scenario object or
    {"scenarios": [...]}. Raises ValueError with field diagnostics."""
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config parse error in {path}: {exc}") from None
    items = obj["scenarios"] if isinstance(obj, dict) and "scenarios" in obj \
        else [obj]
    out = []
    for item in items:
        try:
            out.append(ScenarioConfig.from_obj(item))
        except (TypeError, ValueError, KeyError) as exc:
            raise ValueError(f"bad scenario in {path}: {exc}") from None
    return out


def _poly_terms(*terms):
    """[(exponents, coeff), ...] -> polynomial JSON body."""
    return [{"exponents": list(e), "coefficient": float(c)} for e, c in terms]


def builtin_scenarios() -> list:
    """The bundled scenario library exercised by the default commands."""
    # psi = (x^2 + t*y + 1) dx^dy, a smooth time-dependent area cochain
    area_cochain = {
        "degree": 2,
        "components": {"0,1": _poly_terms(((0, 2, 0), 1.0), ((1, 0, 1), 1.0),
                                          ((0, 0, 0), 1.0))},
    }
    # psi = (x*y + t) dx + y^2 dy on curves
    line_cochain = {
        "degree": 1,
        "components": {"0": _poly_terms(((0, 1, 1), 1.0), ((1, 0, 0), 1.0)),
                       "1": _poly_terms(((0, 0, 2), 1.0))},
    }
    return [
        ScenarioConfig(
            name="rotating_square",
            motion={"family": "rotation", "rate": 0.7},
            cochain=area_cochain),
        ScenarioConfig(
            name="static_square",
            motion={"family": "identity"},
            cochain={"degree": 2,
                     "components": {"0,1": _poly_terms(((0, 2, 0), 1.0),
                                                       ((0, 0, 0), 1.0))}}),
        ScenarioConfig(
            name="translating_square",
            motion={"family": "translation", "velocity": [0.3, 0.1]},
            cochain=area_cochain),
        ScenarioConfig(
            name="shearing_boundary",
            chain={"builtin": "boundary_square"},
            motion={"family": "shear", "rate": 0.4},
            cochain=line_cochain),
        ScenarioConfig(
            name="tent_square",
            motion={"family": "tent", "amplitude": 0.3},
            cochain=area_cochain,
            levels=3),
        ScenarioConfig(
            name="expanding_box",
            motion={"family": "expansion", "interval": [-0.5, 1.0]},
            cochain=area_cochain,
            density=_poly_terms(((0, 0, 0), 1.0)),
            tau=0.0),
    ]
