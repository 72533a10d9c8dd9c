"""Motions as curves of Lipschitz embeddings: Eulerian velocity fields,
flows, deformation chains, the Reynolds operator, and the transport
derivative with its finite-difference oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chains import (Boundary, Chain, Current, Leaf, Sum, VWedge, boundary,
                     evaluate, v_wedge)
from .forms import (Box, FormField, TimePolynomialForm, VectorField, contract,
                    exterior_derivative, lie_derivative, pullback,
                    seminorm_comass)
from .lipschitz import LipMap, pushforward_chain
from .polynomial import Polynomial
from .quadrature import integrate_interval, simplex_rule

__all__ = [
    "Motion",
    "Cochain",
    "make_motion",
    "velocity_field",
    "flow",
    "reynolds_operator",
    "deformation_chain",
    "homotopy_residual",
    "transport_derivative",
    "transport_derivative_fd",
    "transport_derivative_lagrangian_fd",
    "classical_reynolds",
    "continuity_modulus",
    "balance_transport",
]

_NEWTON_TOL = 1e-12
_NEWTON_MAX = 60


@dataclass(frozen=True)
class Motion:
    """Time-indexed Lipschitz embedding kappa_t with its material velocity.

    `velocity_factory`, `inverse` and `map_factory` are optional exact
    backends; anything missing is recovered numerically.
    """

    interval: tuple
    kappa: object                 # (t, x) -> point
    kappa_dot: object             # (t, x) -> velocity of the material point
    k_m: Box                      # compact set carrying the motion
    inverse: object = None        # (t, y) -> x with kappa(t, x) = y
    velocity_factory: object = None   # t -> VectorField (Eulerian, exact)
    map_factory: object = None        # t -> LipMap for kappa_t
    name: str = ""

    def check_time(self, t: float):
        a, b = self.interval
        if not a <= t <= b:
            raise ValueError(f"time {t} outside the motion interval {self.interval}")

    def map_at(self, t: float) -> LipMap:
        self.check_time(t)
        if self.map_factory is not None:
            return self.map_factory(t)
        return LipMap(self.k_m.dim, lambda x, t=t: self.kappa(t, x),
                      name=f"{self.name}@{t:g}")

    def push(self, T: Chain, t: float, levels: int = 0) -> Chain:
        return pushforward_chain(self.map_at(t), T, levels=levels)


def _invert_newton(m: Motion, t: float, y: np.ndarray) -> np.ndarray:
    if m.inverse is not None:
        return np.asarray(m.inverse(t, y), dtype=float)
    y = np.asarray(y, dtype=float)
    x = y.copy()
    n = y.size
    h = 1e-6
    for _ in range(_NEWTON_MAX):
        fx = np.asarray(m.kappa(t, x), dtype=float)
        res = y - fx
        if np.linalg.norm(res) < _NEWTON_TOL:
            return x
        jac = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            jac[:, j] = (np.asarray(m.kappa(t, x + e), float)
                         - np.asarray(m.kappa(t, x - e), float)) / (2 * h)
        try:
            step = np.linalg.solve(jac, res)
        except np.linalg.LinAlgError:
            raise ValueError("motion inversion failed: singular Jacobian")
        lam = 1.0
        base = np.linalg.norm(res)
        while lam > 1e-6:
            cand = x + lam * step
            if np.linalg.norm(y - np.asarray(m.kappa(t, cand), float)) < base:
                x = cand
                break
            lam *= 0.5
        else:
            raise ValueError("motion inversion failed: no descent")
    raise ValueError("motion inversion did not converge")


def velocity_field(m: Motion, t: float) -> VectorField:
    """Eulerian velocity v_t = kappa_dot_t o (kappa_t)^-1, extended by zero
    outside the moving support."""
    m.check_time(t)
    if m.velocity_factory is not None:
        return m.velocity_factory(t)

    def v(y, m=m, t=t):
        x = _invert_newton(m, t, y)
        return np.asarray(m.kappa_dot(t, x), dtype=float)

    return VectorField(m.k_m.dim, func=v)


def flow(v, s: float, t: float, x, steps: int = 64) -> np.ndarray:
    """Flow map J_{s,t}(x) of a time-dependent vector field by fixed-step
    classical RK4; `v` is a callable tau -> VectorField (or (tau, y) -> vec)."""
    x = np.array(x, dtype=float)
    if s == t:
        return x
    if callable(v) and not isinstance(v, VectorField):
        def rhs(tau, y):
            vf = v(tau)
            return vf(y) if isinstance(vf, VectorField) else np.asarray(
                v(tau, y), dtype=float)
    else:
        def rhs(tau, y, vf=v):
            return vf(y)
    h = (s - t) / steps
    tau = t
    for _ in range(steps):
        k1 = rhs(tau, x)
        k2 = rhs(tau + h / 2, x + h / 2 * k1)
        k3 = rhs(tau + h / 2, x + h / 2 * k2)
        k4 = rhs(tau + h, x + h * k3)
        x = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        tau += h
    return x


# ----------------------------------------------------------------------
# cochains
# ----------------------------------------------------------------------

class Cochain:
    """Sharp r-cochain represented by a (time-dependent) form field.

    Action on a current is evaluation against the representing form.
    """

    def __init__(self, rep: TimePolynomialForm, name: str = ""):
        self.rep = rep
        self.degree = rep.degree
        self.ambient = rep.ambient
        self.name = name

    @classmethod
    def static(cls, phi: FormField, name: str = "") -> "Cochain":
        return cls(TimePolynomialForm.static(phi), name)

    def form_at(self, t: float) -> FormField:
        return self.rep.at_time(t)

    def dot_at(self, t: float) -> FormField:
        return self.rep.time_derivative().at_time(t)

    def __call__(self, t: float, T) -> float:
        return evaluate(T, self.form_at(t))


# ----------------------------------------------------------------------
# current-level kinematic operators
# ----------------------------------------------------------------------

def reynolds_operator(v: VectorField, T: Current) -> Current:
    """R_v(T) = v wedge bnd(T) + bnd(v wedge T), the dual of the Lie
    derivative: evaluate(R_v(T), phi) = evaluate(T, L_v phi)."""
    if isinstance(T, Chain):
        T = Leaf(T)
    parts = []
    if T.degree >= 1:
        parts.append(VWedge(v, Boundary(T)))
    if T.degree + 1 <= T.ambient:
        parts.append(Boundary(VWedge(v, T)))
    if not parts:
        raise ValueError("Reynolds operator vanishes identically here")
    return Sum(parts)


@dataclass
class Deformation(Current):
    """The (r+1)-current swept by a chain under a motion over [a, b],
    evaluated as the time integral of (v_tau wedge kappa_tau# T)."""

    motion: Motion
    interval: tuple
    chain: Chain
    levels: int = 0
    panels: int = 8
    gauss_order: int = 5

    def __post_init__(self):
        a, b = self.interval
        self.motion.check_time(a)
        self.motion.check_time(b)
        if self.chain.degree + 1 > self.chain.ambient:
            raise ValueError("deformation chain overflows the ambient degree")
        self.degree = self.chain.degree + 1
        self.ambient = self.chain.ambient

    def _evaluate(self, phi: FormField, s_order: int, subdivision: int):
        a, b = self.interval
        if a == b:
            return 0.0

        def integrand(tau):
            pushed = self.motion.push(self.chain, tau, self.levels)
            v = velocity_field(self.motion, tau)
            return evaluate(pushed, contract(phi, v), s_order, subdivision)

        return integrate_interval(integrand, a, b, panels=self.panels,
                                  order=self.gauss_order)


def deformation_chain(m: Motion, interval, T: Chain, levels: int = 0,
                      panels: int = 8, gauss_order: int = 5) -> Current:
    return Deformation(m, tuple(interval), T, levels, panels, gauss_order)


def homotopy_residual(m: Motion, interval, T: Chain, phi: FormField,
                      levels: int = 0, panels: int = 8,
                      gauss_order: int = 5) -> float:
    """Residual of the homotopy formula
    (kappa_b# T - kappa_a# T) = bnd(deformation) + deformation of bnd(T)."""
    a, b = interval
    lhs = (evaluate(m.push(T, b, levels), phi)
           - evaluate(m.push(T, a, levels), phi))
    rhs = 0.0
    if T.degree + 1 <= T.ambient:
        deform = deformation_chain(m, interval, T, levels, panels,
                                   gauss_order)
        rhs += evaluate(Boundary(deform), phi)
    if T.degree >= 1:
        bt = boundary(T)
        if len(bt):
            rhs += evaluate(deformation_chain(m, interval, bt, levels,
                                              panels, gauss_order), phi)
    return abs(lhs - rhs)


# ----------------------------------------------------------------------
# the transport derivative and its oracles
# ----------------------------------------------------------------------

def transport_derivative(m: Motion, T: Chain, psi: Cochain, tau: float,
                         levels: int = 0) -> float:
    """d/dt of psi(t)(kappa_t# T) at tau:
    psi_dot(kappa_tau# T) + psi(bnd(v wedge kappa_tau# T)
                                + v wedge kappa_tau#(bnd T))."""
    m.check_time(tau)
    pushed = m.push(T, tau, levels)
    total = evaluate(pushed, psi.dot_at(tau))
    v = velocity_field(m, tau)
    phi = psi.form_at(tau)
    # bnd(v wedge pushed) acts on phi through d(phi) -| v; the wedge term
    # vanishes identically when T already has top degree
    if T.degree + 1 <= T.ambient:
        total += evaluate(pushed, contract(exterior_derivative(phi), v))
    if T.degree >= 1:
        bt = boundary(T)
        if len(bt):
            pushed_b = m.push(bt, tau, levels)
            total += evaluate(pushed_b, contract(phi, v))
    return total


def transport_derivative_betounes(m: Motion, T: Chain, psi: Cochain,
                                  tau: float, levels: int = 0) -> float:
    """Equivalent smooth-data form: evaluate(kappa_tau# T,
    psi_dot + L_v psi); used as an independent pipeline."""
    pushed = m.push(T, tau, levels)
    v = velocity_field(m, tau)
    form = psi.dot_at(tau) + lie_derivative(psi.form_at(tau), v)
    return evaluate(pushed, form)


def transport_derivative_fd(m: Motion, T: Chain, psi: Cochain, tau: float,
                            eps: float, levels: int = 0,
                            one_sided: bool = False) -> float:
    """Finite-difference oracle for the transport derivative."""
    def total(t):
        return psi(t, m.push(T, t, levels))

    if one_sided:
        return (total(tau + eps) - total(tau)) / eps
    return (total(tau + eps) - total(tau - eps)) / (2 * eps)


def transport_derivative_lagrangian_fd(m: Motion, T: Chain, psi: Cochain,
                                       tau: float, eps: float) -> float:
    """Lagrangian pipeline: FD of t -> T(kappa_t^# psi(t)) using exact
    affine pullbacks of the representing form."""
    def pulled(t):
        lm = m.map_at(t)
        amap = getattr(lm, "func", None)
        from .forms import AffineMap
        if isinstance(amap, AffineMap):
            return evaluate(T, pullback(psi.form_at(t), amap))
        return evaluate(T, pullback(psi.form_at(t), lm,
                                    source_dim=T.ambient))

    return (pulled(tau + eps) - pulled(tau - eps)) / (2 * eps)


def classical_reynolds(m: Motion, T: Chain, density: TimePolynomialForm,
                       tau: float, levels: int = 0):
    """Classical transport theorem for a full-dimensional chain.

    `density` is a time-dependent 0-form; the transported property is
    density times the volume form.  Returns (lhs, volume_term, flux_term)
    with lhs the transport derivative and the right side split into the
    local-rate volume integral and the boundary flux of density * (v . nu).
    """
    n = T.ambient
    if T.degree != n:
        raise ValueError("classical transport needs a full-dimensional chain")
    if n != 2:
        raise ValueError("flux normals implemented for the planar case")
    if density.degree != 0:
        raise ValueError("density must be a 0-form")
    vol_index = tuple(range(n))
    psi = Cochain(TimePolynomialForm(
        n, n, {vol_index: density.polys[0]}), name="density.volume")
    lhs = transport_derivative(m, T, psi, tau, levels)

    pushed = m.push(T, tau, levels)
    ddt = density.time_derivative().at_time(tau)
    volume_term = evaluate(pushed, FormField.from_polynomials(
        n, n, {vol_index: ddt.polys[0]}))

    v = velocity_field(m, tau)
    rho = density.at_time(tau)
    flux_term = 0.0
    for s, mult in boundary(pushed):
        a, b = s.vertices
        tangent = (b - a)
        ln = np.linalg.norm(tangent)
        if ln < 1e-15:
            continue
        tangent = tangent / ln * s.sign
        nu = np.array([tangent[1], -tangent[0]])  # outward for ccw boundaries
        pts, wts = simplex_rule(s.vertices, s=2)
        for p, w in zip(pts, wts):
            flux_term += (mult * w * float(rho(p).coefficients[0])
                          * float(nu @ v(p)))
    return lhs, volume_term, flux_term


def continuity_modulus(m: Motion, T: Chain, t: float, eps_list, family,
                       box: Box, levels: int = 0):
    """Dual M-norm estimates of kappa_{t+eps}# T - kappa_t# T over a test
    family, one per epsilon."""
    base = m.push(T, t, levels)
    norms = [seminorm_comass(phi, box) for phi in family]
    out = []
    for eps in eps_list:
        moved = m.push(T, t + eps, levels)
        est = max(abs(evaluate(moved, phi) - evaluate(base, phi)) / nn
                  for phi, nn in zip(family, norms) if nn > 0)
        out.append(est)
    return out


def balance_transport(m: Motion, T: Chain, psi: Cochain, xi: Cochain,
                      tau: float, source: Cochain = None, levels: int = 0,
                      balance_tol: float = 1e-8, box: Box = None):
    """Transport derivative re-expressed through a differential balance law
    psi_dot + d(xi) = phi with source phi and flux xi.

    Returns a report dict with both pipelines and their agreement.
    """
    if source is None:
        rep = psi.rep.time_derivative()
        dxi = xi.rep.exterior_derivative()
        merged = TimePolynomialForm(psi.ambient, psi.degree, {})
        merged.polys = [a + b for a, b in zip(rep.polys, dxi.polys)]
        source = Cochain(merged, name="manufactured-source")
    else:
        # verify the balance residual on the grid
        if box is None:
            box = Box.unit(T.ambient)
        resid_form = (psi.dot_at(tau) + exterior_derivative(xi.form_at(tau))
                      - source.form_at(tau))
        resid = seminorm_comass(resid_form, box)
        if resid > balance_tol:
            raise ValueError(f"balance residual {resid:g} exceeds "
                             f"{balance_tol:g}")
    direct = transport_derivative(m, T, psi, tau, levels)
    pushed = m.push(T, tau, levels)
    v = velocity_field(m, tau)
    phi = psi.form_at(tau)
    rewritten = evaluate(pushed, source.form_at(tau))
    if T.degree + 1 <= T.ambient:
        rewritten += evaluate(pushed, contract(exterior_derivative(phi), v))
    if T.degree >= 1:
        bt = boundary(T)
        if len(bt):
            pushed_b = m.push(bt, tau, levels)
            rewritten += evaluate(pushed_b,
                                  contract(phi, v) - xi.form_at(tau))
    return {
        "transport_derivative": direct,
        "balance_form": rewritten,
        "difference": abs(direct - rewritten),
    }


# ----------------------------------------------------------------------
# built-in motion families
# ----------------------------------------------------------------------

def _planar_rotation(theta: float) -> np.ndarray:
    return np.array([[np.cos(theta), -np.sin(theta)],
                     [np.sin(theta), np.cos(theta)]])


def make_motion(name: str, ambient: int = 2, interval=(-1.0, 1.0),
                k_m: Box = None, **params) -> Motion:
    """Named motion families: identity, translation, rotation, expansion,
    shear, tent."""
    if k_m is None:
        k_m = Box.unit(ambient)
    iv = tuple(float(t) for t in interval)

    if name == "identity":
        zero = VectorField.constant(np.zeros(ambient))
        return Motion(iv, lambda t, x: np.asarray(x, float),
                      lambda t, x: np.zeros(ambient), k_m,
                      inverse=lambda t, y: np.asarray(y, float),
                      velocity_factory=lambda t: zero,
                      map_factory=lambda t: LipMap.identity(ambient),
                      name="identity")

    if name == "translation":
        c = np.asarray(params.get("velocity", [0.25] + [0.0] * (ambient - 1)),
                       dtype=float)
        vf = VectorField.constant(c)
        return Motion(iv, lambda t, x: np.asarray(x, float) + t * c,
                      lambda t, x: c, k_m,
                      inverse=lambda t, y: np.asarray(y, float) - t * c,
                      velocity_factory=lambda t: vf,
                      map_factory=lambda t: LipMap.affine(
                          np.eye(ambient), t * c, name="translation"),
                      name="translation")

    if name == "rotation":
        if ambient != 2:
            raise ValueError("rotation family is planar")
        w = float(params.get("rate", 1.0))
        x0, x1 = (Polynomial.variable(i, 2) for i in (0, 1))
        vf = VectorField.from_polynomials([(-w) * x1, w * x0])
        return Motion(iv, lambda t, x: _planar_rotation(w * t) @ np.asarray(x, float),
                      lambda t, x: w * np.array([
                          -np.sin(w * t) * x[0] - np.cos(w * t) * x[1],
                          np.cos(w * t) * x[0] - np.sin(w * t) * x[1]]),
                      k_m,
                      inverse=lambda t, y: _planar_rotation(-w * t) @ np.asarray(y, float),
                      velocity_factory=lambda t: vf,
                      map_factory=lambda t: LipMap.affine(
                          _planar_rotation(w * t), name="rotation"),
                      name="rotation")

    if name == "expansion":
        # kappa_t(x) = (1 + t) x; Eulerian velocity y / (1 + t)
        def vfac(t, ambient=ambient):
            return VectorField.from_polynomials(
                [Polynomial.variable(i, ambient) * (1.0 / (1.0 + t))
                 for i in range(ambient)])
        return Motion(iv, lambda t, x: (1.0 + t) * np.asarray(x, float),
                      lambda t, x: np.asarray(x, float), k_m,
                      inverse=lambda t, y: np.asarray(y, float) / (1.0 + t),
                      velocity_factory=vfac,
                      map_factory=lambda t: LipMap.affine(
                          (1.0 + t) * np.eye(ambient), name="expansion"),
                      name="expansion")

    if name == "shear":
        s = float(params.get("rate", 0.5))
        x1 = Polynomial.variable(1, ambient)
        comps = [Polynomial.zero(ambient) for _ in range(ambient)]
        comps[0] = s * x1
        vf = VectorField.from_polynomials(comps)

        def mat(t, s=s, ambient=ambient):
            out = np.eye(ambient)
            out[0, 1] = s * t
            return out

        def inv_mat(t, s=s, ambient=ambient):
            out = np.eye(ambient)
            out[0, 1] = -s * t
            return out

        return Motion(iv, lambda t, x: mat(t) @ np.asarray(x, float),
                      lambda t, x: np.array(
                          [s * np.asarray(x, float)[1]] + [0.0] * (ambient - 1)),
                      k_m,
                      inverse=lambda t, y: inv_mat(t) @ np.asarray(y, float),
                      velocity_factory=lambda t: vf,
                      map_factory=lambda t: LipMap.affine(mat(t), name="shear"),
                      name="shear")

    if name == "tent":
        # piecewise-linear vertical lift growing linearly in time;
        # genuinely non-smooth Lipschitz motion
        c = float(params.get("center", 0.5))
        w = float(params.get("width", 0.5))
        amp = float(params.get("amplitude", 0.3))
        axis = int(params.get("axis", 1))

        def tent(u, c=c, w=w):
            return max(0.0, 1.0 - abs(u - c) / w)

        def kap(t, x):
            y = np.array(x, dtype=float)
            y[axis] += t * amp * tent(x[0])
            return y

        def kap_dot(t, x):
            out = np.zeros(ambient)
            out[axis] = amp * tent(np.asarray(x, float)[0])
            return out

        def inv(t, y):
            x = np.array(y, dtype=float)
            x[axis] -= t * amp * tent(y[0])  # first axis is unchanged
            return x

        def vfac(t):
            def v(y):
                out = np.zeros(ambient)
                out[axis] = amp * tent(np.asarray(y, float)[0])
                return out
            return VectorField(ambient, func=v, lipschitz=amp / w)

        return Motion(iv, kap, kap_dot, k_m, inverse=inv,
                      velocity_factory=vfac, name="tent")

    raise ValueError(f"unknown motion family: {name}")
