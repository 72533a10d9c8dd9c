"""Finite-dimensional exterior algebra over R^n.

r-vectors and r-covectors are stored densely, indexed by the lexicographic
rank of strictly increasing multi-indices.  All values are immutable and
every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

__all__ = [
    "MultiIndex",
    "MultiVector",
    "CoVector",
    "multi_indices",
    "basis_rank",
    "wedge",
    "interior_product",
    "pair",
    "mass",
    "comass",
    "random_simple_unit",
    "frame_to_multivector",
]


@lru_cache(maxsize=None)
def multi_indices(r: int, n: int) -> tuple[tuple[int, ...], ...]:
    """All strictly increasing r-tuples over {0, ..., n-1}, lexicographic."""
    if not 0 <= r <= n:
        raise ValueError(f"degree {r} out of range for ambient {n}")
    return tuple(combinations(range(n), r))


@lru_cache(maxsize=None)
def _rank_table(r: int, n: int) -> dict[tuple[int, ...], int]:
    return {idx: k for k, idx in enumerate(multi_indices(r, n))}


def basis_rank(index: tuple[int, ...], n: int) -> int:
    """Lexicographic rank of a strictly increasing multi-index."""
    return _rank_table(len(index), n)[tuple(index)]


@dataclass(frozen=True)
class MultiIndex:
    """A strictly increasing multi-index with its ambient dimension."""

    entries: tuple[int, ...]
    ambient: int

    def __post_init__(self):
        e = self.entries
        if any(e[i] >= e[i + 1] for i in range(len(e) - 1)):
            raise ValueError(f"entries not strictly increasing: {e}")
        if e and (e[0] < 0 or e[-1] >= self.ambient):
            raise ValueError(f"entries {e} escape ambient {self.ambient}")

    @property
    def degree(self) -> int:
        return len(self.entries)

    @property
    def rank(self) -> int:
        return basis_rank(self.entries, self.ambient)


def _merge_sign(a: tuple[int, ...], b: tuple[int, ...]):
    """Sorted union of two disjoint increasing tuples and the merge sign.

    Returns (None, 0) when the tuples intersect (alternation kills the term).
    """
    if set(a) & set(b):
        return None, 0
    merged = sorted(a + b)
    # Count inversions of the concatenation a+b: each element of b passes
    # the elements of a that exceed it.
    inversions = sum(1 for x in a for y in b if x > y)
    return tuple(merged), -1 if inversions % 2 else 1


@dataclass(frozen=True)
class MultiVector:
    """Degree-r exterior vector over R^n with dense coefficients."""

    degree: int
    ambient: int
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (comb(self.ambient, self.degree),):
            raise ValueError(
                f"expected {comb(self.ambient, self.degree)} coefficients, "
                f"got shape {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficient")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def zero(cls, degree: int, ambient: int) -> "MultiVector":
        return cls(degree, ambient, np.zeros(comb(ambient, degree)))

    @classmethod
    def basis(cls, index: tuple[int, ...], ambient: int) -> "MultiVector":
        c = np.zeros(comb(ambient, len(index)))
        c[basis_rank(tuple(index), ambient)] = 1.0
        return cls(len(index), ambient, c)

    @classmethod
    def from_vector(cls, v) -> "MultiVector":
        v = np.asarray(v, dtype=float)
        return cls(1, v.size, v.copy())

    def __add__(self, other: "MultiVector") -> "MultiVector":
        self._check_compatible(other)
        return type(self)(self.degree, self.ambient,
                          self.coefficients + other.coefficients)

    def __sub__(self, other: "MultiVector") -> "MultiVector":
        self._check_compatible(other)
        return type(self)(self.degree, self.ambient,
                          self.coefficients - other.coefficients)

    def __mul__(self, c: float) -> "MultiVector":
        return type(self)(self.degree, self.ambient, self.coefficients * c)

    __rmul__ = __mul__

    def __neg__(self) -> "MultiVector":
        return self * -1.0

    def _check_compatible(self, other):
        if (self.degree, self.ambient) != (other.degree, other.ambient):
            raise ValueError(
                f"degree/ambient mismatch: ({self.degree},{self.ambient}) "
                f"vs ({other.degree},{other.ambient})"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))


class CoVector(MultiVector):
    """Degree-r covector; same layout as MultiVector, dual interpretation."""

    @classmethod
    def dx(cls, index: tuple[int, ...], ambient: int) -> "CoVector":
        c = np.zeros(comb(ambient, len(index)))
        c[basis_rank(tuple(index), ambient)] = 1.0
        return cls(len(index), ambient, c)


def wedge(a: MultiVector, b: MultiVector) -> MultiVector:
    """Exterior product; bilinear, associative, graded-anticommutative."""
    if a.ambient != b.ambient:
        raise ValueError("ambient mismatch")
    p, q, n = a.degree, b.degree, a.ambient
    if p + q > n:
        raise ValueError(f"degree overflow: {p}+{q} > ambient {n}")
    out = np.zeros(comb(n, p + q))
    idx_a = multi_indices(p, n)
    idx_b = multi_indices(q, n)
    ranks = _rank_table(p + q, n)
    ca, cb = a.coefficients, b.coefficients
    for i, la in enumerate(idx_a):
        if ca[i] == 0.0:
            continue
        for j, lb in enumerate(idx_b):
            if cb[j] == 0.0:
                continue
            merged, sign = _merge_sign(la, lb)
            if sign:
                out[ranks[merged]] += sign * ca[i] * cb[j]
    cls = CoVector if isinstance(a, CoVector) else MultiVector
    return cls(p + q, n, out)


def interior_product(omega: CoVector, v) -> CoVector:
    """Contraction omega -| v, inserting v in the front slot.

    Convention: (dx^i wedge dx^j) -| e_i = dx^j, so that
    (omega -| v)(xi) = omega(v wedge xi).
    """
    if omega.degree < 1:
        raise ValueError("cannot contract a 0-covector")
    v = np.asarray(v, dtype=float)
    n, r = omega.ambient, omega.degree
    if v.shape != (n,):
        raise ValueError(f"vector shape {v.shape} does not match ambient {n}")
    out = np.zeros(comb(n, r - 1))
    ranks = _rank_table(r - 1, n)
    for k, lam in enumerate(multi_indices(r, n)):
        c = omega.coefficients[k]
        if c == 0.0:
            continue
        for pos, i in enumerate(lam):
            if v[i] == 0.0:
                continue
            rest = lam[:pos] + lam[pos + 1:]
            sign = -1.0 if pos % 2 else 1.0
            out[ranks[rest]] += sign * c * v[i]
    return CoVector(r - 1, n, out)


def pair(omega: CoVector, xi: MultiVector) -> float:
    """Duality pairing; dot product in the orthonormal lexicographic basis."""
    if (omega.degree, omega.ambient) != (xi.degree, xi.ambient):
        raise ValueError("degree/ambient mismatch in pairing")
    return float(np.dot(omega.coefficients, xi.coefficients))


def mass(xi: MultiVector) -> float:
    """Euclidean norm of the coefficient vector."""
    return xi.norm()


def frame_to_multivector(frame: np.ndarray) -> MultiVector:
    """Wedge of the columns of an n-by-r matrix (a simple r-vector)."""
    n, r = frame.shape
    if r == 0:
        return MultiVector(0, n, np.ones(1))
    out = MultiVector.from_vector(frame[:, 0])
    for j in range(1, r):
        out = wedge(out, MultiVector.from_vector(frame[:, j]))
    return out


def random_simple_unit(r: int, n: int, rng: np.random.Generator) -> MultiVector:
    """Random simple unit r-vector from a Haar-ish orthonormal frame."""
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return frame_to_multivector(q)


def _ascent_from(omega: CoVector, frame: np.ndarray,
                 tol: float, max_iter: int):
    """Projected gradient ascent of <omega, wedge(columns)> on the Stiefel
    manifold of orthonormal r-frames; projection by QR."""
    n, r = frame.shape
    q = np.linalg.qr(frame)[0]
    val = pair(omega, frame_to_multivector(q))
    if val < 0:
        q[:, 0] = -q[:, 0]
        val = -val
    step = 0.5
    for _ in range(max_iter):
        grad = np.empty((n, r))
        for j in range(r):
            cols = [q[:, k] for k in range(r)]
            for i in range(n):
                e = np.zeros(n)
                e[i] = 1.0
                cols[j] = e
                grad[i, j] = pair(omega, frame_to_multivector(
                    np.column_stack(cols)))
        gnorm = np.linalg.norm(grad)
        if gnorm < tol:
            break
        improved = False
        while step > 1e-12:
            cand = np.linalg.qr(q + step * grad / max(gnorm, 1e-300))[0]
            cval = pair(omega, frame_to_multivector(cand))
            if cval < 0:
                cand[:, 0] = -cand[:, 0]
                cval = -cval
            if cval > val + 1e-16:
                q, val = cand, cval
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        step = min(step * 2.0, 1.0)
    return val, q


def comass(omega: CoVector, restarts: int = 100, tol: float = 1e-8,
           seed: int = 0):
    """Comass of a covector: sup of the pairing over simple unit r-vectors.

    Exact (Euclidean norm) for r in {0, 1, n-1, n}; projected gradient
    ascent over orthonormal r-frames with random restarts otherwise.
    Returns (value, witness) where witness is a maximizing simple r-vector.
    """
    r, n = omega.degree, omega.ambient
    if r in (0, 1, n - 1, n):
        val = float(np.linalg.norm(omega.coefficients))
        if val == 0.0:
            return 0.0, MultiVector.zero(r, n)
        if r in (0, n):
            witness = MultiVector(r, n, omega.coefficients / val)
        elif r == 1:
            witness = MultiVector(1, n, omega.coefficients / val)
        else:
            # every (n-1)-vector in R^n is simple
            witness = MultiVector(r, n, omega.coefficients / val)
        return val, witness
    if np.allclose(omega.coefficients, 0.0):
        return 0.0, MultiVector.zero(r, n)
    rng = np.random.default_rng(seed)
    best_val, best_q = -np.inf, None
    for _ in range(restarts):
        frame = rng.standard_normal((n, r))
        val, q = _ascent_from(omega, frame, tol, max_iter=200)
        if val > best_val:
            best_val, best_q = val, q
    return best_val, frame_to_multivector(best_q)
