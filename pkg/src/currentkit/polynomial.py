"""Sparse multivariate polynomials with float coefficients.

Monomials are exponent tuples; arithmetic is exact up to float rounding,
which makes identities like d(d(phi)) = 0 hold coefficient-wise for
integer-coefficient data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Polynomial"]

_DROP = 0.0  # coefficients exactly zero are dropped; no epsilon pruning


@dataclass(frozen=True)
class Polynomial:
    """Polynomial in `nvars` variables, stored as {exponents: coefficient}."""

    nvars: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for expo, c in self.terms.items():
            expo = tuple(int(e) for e in expo)
            if len(expo) != self.nvars:
                raise ValueError(f"exponent {expo} has wrong arity")
            if any(e < 0 for e in expo):
                raise ValueError(f"negative exponent in {expo}")
            c = float(c)
            if c != _DROP:
                clean[expo] = clean.get(expo, 0.0) + c
        object.__setattr__(self, "terms", clean)

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c: float) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, i: int, nvars: int) -> "Polynomial":
        expo = [0] * nvars
        expo[i] = 1
        return cls(nvars, {tuple(expo): 1.0})

    @classmethod
    def random(cls, nvars: int, max_degree: int, rng: np.random.Generator,
               n_terms: int = 4, coeff_range: int = 3) -> "Polynomial":
        """Random polynomial with small integer coefficients (exact in floats)."""
        terms = {}
        for _ in range(n_terms):
            expo = tuple(int(rng.integers(0, max_degree + 1))
                         for _ in range(nvars))
            if sum(expo) > max_degree:
                continue
            c = int(rng.integers(-coeff_range, coeff_range + 1))
            if c:
                terms[expo] = terms.get(expo, 0.0) + c
        return cls(nvars, terms)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial(self.nvars, out)

    def __sub__(self, other):
        return self + (self._coerce(other) * -1.0)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(self.nvars,
                              {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("variable-count mismatch")
            return other
        return Polynomial.constant(self.nvars, float(other))

    # -- calculus -----------------------------------------------------
    def diff(self, i: int) -> "Polynomial":
        out = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            de = list(e)
            de[i] -= 1
            out[tuple(de)] = out.get(tuple(de), 0.0) + c * e[i]
        return Polynomial(self.nvars, out)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        total = 0.0
        for e, c in self.terms.items():
            term = c
            for xi, ei in zip(x, e):
                if ei:
                    term *= xi ** ei
            total += term
        return total

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate at an array of points, shape (m, nvars)."""
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[0])
        for e, c in self.terms.items():
            term = np.full(pts.shape[0], c)
            for i, ei in enumerate(e):
                if ei:
                    term *= pts[:, i] ** ei
            out += term
        return out

    def compose_affine(self, mat: np.ndarray, shift: np.ndarray) -> "Polynomial":
        """Substitute x_i = sum_j mat[i, j] y_j + shift[i]."""
        mat = np.asarray(mat, dtype=float)
        shift = np.asarray(shift, dtype=float)
        m = mat.shape[1]
        subs = [
            Polynomial(m, {tuple(int(k == j) for k in range(m)): mat[i, j]
                           for j in range(m) if mat[i, j] != 0.0})
            + Polynomial.constant(m, shift[i])
            for i in range(self.nvars)
        ]
        out = Polynomial.zero(m)
        for e, c in self.terms.items():
            term = Polynomial.constant(m, c)
            for i, ei in enumerate(e):
                for _ in range(ei):
                    term = term * subs[i]
            out = out + term
        return out

    def substitute_first(self, value: float) -> "Polynomial":
        """Fix the first variable to a number, returning a polynomial in the rest."""
        out = {}
        for e, c in self.terms.items():
            rest = e[1:]
            out[rest] = out.get(rest, 0.0) + c * value ** e[0]
        return Polynomial(self.nvars - 1, out)

    def prepend_variable(self) -> "Polynomial":
        """View as a polynomial in one extra (leading, unused) variable."""
        return Polynomial(self.nvars + 1,
                          {(0,) + e: c for e, c in self.terms.items()})

    # -- misc ---------------------------------------------------------
    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def to_json_obj(self):
        return [{"exponents": list(e), "coefficient": c}
                for e, c in sorted(self.terms.items())]

    @classmethod
    def from_json_obj(cls, nvars: int, obj) -> "Polynomial":
        return cls(nvars, {tuple(t["exponents"]): t["coefficient"]
                           for t in obj})

    def __repr__(self):
        if not self.terms:
            return "Polynomial(0)"
        bits = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(f"x{i}^{ei}" for i, ei in enumerate(e) if ei)
            bits.append(f"{c:g}{'*' + mono if mono else ''}")
        return "Polynomial(" + " + ".join(bits) + ")"
