"""Flat norm of simplicial chains by linear programming, plus dual-pairing
lower-bound estimators for the flat and sharp norms of general currents.

The LP minimizes  sum_i vol_i |t_i - (B s)_i| + sum_j vol_j |s_j|  over the
(r+1)-coefficients s of the hosting complex, with the L1 terms split into
nonnegative pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chains import Chain, Current, evaluate, mass_chain
from .complexes import SimplicialComplex
from .forms import Box, FormField, seminorm_flat, seminorm_sharp

__all__ = [
    "LPProblem",
    "LPSolution",
    "lp_solve",
    "flat_norm_lp",
    "dual_flat_lower_bound",
    "sharp_lower_bound",
    "export_lp_text",
]

_FEAS_TOL = 1e-8
_PIVOT_TOL = 1e-10


@dataclass
class LPProblem:
    """min c.x  s.t.  A_eq x = b_eq, x >= 0."""

    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.a_eq = np.atleast_2d(np.asarray(self.a_eq, dtype=float))
        self.b_eq = np.asarray(self.b_eq, dtype=float)
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.a_eq))
                and np.all(np.isfinite(self.b_eq))):
            raise ValueError("LP data must be finite")
        m, n = self.a_eq.shape
        if self.c.shape != (n,) or self.b_eq.shape != (m,):
            raise ValueError("LP dimension mismatch")


@dataclass
class LPSolution:
    status: str  # OPTIMAL | INFEASIBLE | UNBOUNDED
    objective: float = np.nan
    x: np.ndarray = None
    basis: list = field(default_factory=list)
    iterations: int = 0


def _simplex_phase(tableau, basis, n_real, max_iter=200_000):
    """Primal simplex on a dense tableau with Bland's anti-cycling rule.

    tableau rows: m constraint rows then the objective row (reduced costs,
    negated objective value in the last column).  Returns iteration count
    or raises on unboundedness.
    """
    m = tableau.shape[0] - 1
    it = 0
    while it < max_iter:
        costs = tableau[-1, :-1]
        entering = -1
        for j in range(len(costs)):
            if costs[j] < -_PIVOT_TOL:
                entering = j  # Bland: smallest eligible index
                break
        if entering < 0:
            return it
        col = tableau[:m, entering]
        best_ratio, leaving = np.inf, -1
        for i in range(m):
            if col[i] > _PIVOT_TOL:
                ratio = tableau[i, -1] / col[i]
                if (ratio < best_ratio - 1e-12
                        or (abs(ratio - best_ratio) <= 1e-12
                            and (leaving < 0 or basis[i] < basis[leaving]))):
                    best_ratio, leaving = ratio, i
        if leaving < 0:
            raise _Unbounded
        _pivot(tableau, leaving, entering)
        basis[leaving] = entering
        it += 1
    raise RuntimeError("simplex iteration limit reached")


class _Unbounded(Exception):
    pass


def _pivot(tableau, row, col):
    tableau[row] /= tableau[row, col]
    for i in range(tableau.shape[0]):
        if i != row and tableau[i, col] != 0.0:
            tableau[i] -= tableau[i, col] * tableau[row]


def lp_solve(problem: LPProblem, basis_hint=None) -> LPSolution:
    """Two-phase primal simplex with Bland's rule.

    `basis_hint`: optional starting basis (column indices, one per row)
    that is already primal feasible; skips phase 1.
    """
    a = problem.a_eq.copy()
    b = problem.b_eq.copy()
    c = problem.c.copy()
    m, n = a.shape
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    iterations = 0
    if basis_hint is not None:
        basis = list(basis_hint)
        tableau = np.zeros((m + 1, n + 1))
        tableau[:m, :n] = a
        tableau[:m, -1] = b
        # reduce so basis columns are the identity
        for i, j in enumerate(basis):
            tableau[i] /= tableau[i, j]
            for k in range(m):
                if k != i and tableau[k, j] != 0.0:
                    tableau[k] -= tableau[k, j] * tableau[i]
        if np.any(tableau[:m, -1] < -_FEAS_TOL):
            return lp_solve(problem)  # hint not feasible; fall back
        tableau[-1, :n] = c
        for i, j in enumerate(basis):
            tableau[-1] -= c[j] * tableau[i]
    else:
        # phase 1 with artificial variables
        tableau = np.zeros((m + 1, n + m + 1))
        tableau[:m, :n] = a
        tableau[:m, n:n + m] = np.eye(m)
        tableau[:m, -1] = b
        basis = list(range(n, n + m))
        tableau[-1, n:n + m] = 1.0
        for i in range(m):
            tableau[-1] -= tableau[i]
        try:
            iterations += _simplex_phase(tableau, basis, n)
        except _Unbounded:
            raise RuntimeError("phase-1 LP cannot be unbounded")
        if tableau[-1, -1] < -_FEAS_TOL:
            return LPSolution("INFEASIBLE", iterations=iterations)
        # drive remaining artificials out of the basis where possible
        for i in range(m):
            if basis[i] >= n:
                for j in range(n):
                    if abs(tableau[i, j]) > _PIVOT_TOL:
                        _pivot(tableau, i, j)
                        basis[i] = j
                        break
        keep = [i for i in range(m) if basis[i] < n]
        tableau = np.vstack([
            np.hstack([tableau[keep][:, :n], tableau[keep][:, -1:]]),
            np.zeros((1, n + 1)),
        ])
        basis = [basis[i] for i in keep]
        m = len(basis)
        tableau[-1, :n] = c
        for i, j in enumerate(basis):
            tableau[-1] -= c[j] * tableau[i]

    try:
        iterations += _simplex_phase(tableau, basis, n)
    except _Unbounded:
        return LPSolution("UNBOUNDED", iterations=iterations)

    x = np.zeros(n)
    for i, j in enumerate(basis):
        x[j] = tableau[i, -1]
    residual = np.linalg.norm(problem.a_eq @ x - problem.b_eq, np.inf)
    obj = float(problem.c @ x)
    if residual > _FEAS_TOL or not np.isfinite(obj):
        return LPSolution("INFEASIBLE", iterations=iterations)
    return LPSolution("OPTIMAL", obj, x, list(basis), iterations)


def flat_norm_lp(T: Chain, complex_: SimplicialComplex):
    """Simplicial flat norm of T on the hosting complex.

    Returns (value, S, R, info): the optimal decomposition T = R + bnd(S)
    with value = M(R) + M(S), plus solver metadata.
    """
    r = T.degree
    t = complex_.chain_vector(T)
    n_r = complex_.n_simplices(r)
    vol_r = complex_.volumes(r)
    if r + 1 in complex_.simplices and complex_.n_simplices(r + 1) > 0:
        bmat = complex_.boundary_matrix(r + 1)
        n_s = complex_.n_simplices(r + 1)
        vol_s = complex_.volumes(r + 1)
    else:
        bmat = np.zeros((n_r, 0))
        n_s = 0
        vol_s = np.zeros(0)
    # variables: [R+, R-, S+, S-]
    c = np.concatenate([vol_r, vol_r, vol_s, vol_s])
    a = np.hstack([np.eye(n_r), -np.eye(n_r), bmat, -bmat])
    problem = LPProblem(c, a, t)
    # R = t, S = 0 is feasible: basis of R+ or R- picked by sign of t
    hint = [i if t[i] >= 0 else n_r + i for i in range(n_r)]
    sol = lp_solve(problem, basis_hint=hint)
    if sol.status != "OPTIMAL":
        raise RuntimeError(f"flat-norm LP terminated with {sol.status}")
    x = sol.x
    r_coeff = x[:n_r] - x[n_r:2 * n_r]
    s_coeff = x[2 * n_r:2 * n_r + n_s] - x[2 * n_r + n_s:]
    r_chain = complex_.simplex_chain(r, r_coeff)
    s_chain = (complex_.simplex_chain(r + 1, s_coeff) if n_s
               else Chain([], r + 1, complex_.vertices.shape[1]))
    info = {
        "mass_R": float(vol_r @ np.abs(r_coeff)),
        "mass_S": float(vol_s @ np.abs(s_coeff)) if n_s else 0.0,
        "iterations": sol.iterations,
    }
    return sol.objective, s_chain, r_chain, info


def dual_flat_lower_bound(T: Current, family, box: Box, **kw) -> float:
    """max over the test family of T(phi) / F_K(phi); a certified lower
    bound for the K-flat norm of T."""
    if not family:
        raise ValueError("empty test family")
    best = 0.0
    for phi in family:
        denom = seminorm_flat(phi, box, **kw)
        if denom <= 0.0:
            raise ValueError("test form with vanishing flat seminorm")
        best = max(best, evaluate(T, phi) / denom)
    return best


def sharp_lower_bound(T: Current, family, box: Box, **kw) -> float:
    """max over the test family of T(phi) / S_K(phi); lower bound for the
    sharp norm, never exceeding the flat lower bound on the same family."""
    if not family:
        raise ValueError("empty test family")
    best = 0.0
    for phi in family:
        denom = seminorm_sharp(phi, box, **kw)
        if denom <= 0.0:
            raise ValueError("test form with vanishing sharp seminorm")
        best = max(best, evaluate(T, phi) / denom)
    return best


def export_lp_text(problem: LPProblem) -> str:
    """Plain-text LP listing for cross-checking with external solvers."""
    lines = ["MINIMIZE"]
    lines.append("  " + " + ".join(
        f"{ci:.12g} x{j}" for j, ci in enumerate(problem.c) if ci != 0.0))
    lines.append("SUBJECT TO")
    for i, row in enumerate(problem.a_eq):
        terms = " + ".join(f"{v:.12g} x{j}"
                           for j, v in enumerate(row) if v != 0.0)
        lines.append(f"  eq{i}: {terms or '0'} = {problem.b_eq[i]:.12g}")
    lines.append("BOUNDS")
    lines.append("  x >= 0 (all variables)")
    return "\n".join(lines) + "\n"
