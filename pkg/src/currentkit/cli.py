"""Command-line driver: invariant verification, transport experiments,
flat-norm computations, and convergence studies, all reported as CSV.

Exit codes: 0 success, 1 failing check, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .chains import boundary, evaluate, mass_chain, triangle_chain
from .complexes import freudenthal_complex
from .flatnorm import dual_flat_lower_bound, flat_norm_lp, sharp_lower_bound
from .forms import (FormField, VectorField, exterior_derivative,
                    lie_derivative, lie_derivative_components)
from .lipschitz import (LipMap, lipschitz_constant, pushforward_chain)
from .motion import (classical_reynolds, continuity_modulus,
                     homotopy_residual, reynolds_operator,
                     transport_derivative, transport_derivative_fd)
from .scenarios import builtin_scenarios, load_config

log = logging.getLogger("currentkit")


def _fmt(x) -> str:
    """CSV number format: '.' decimal, scientific for small magnitudes."""
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    x = float(x)
    if x != 0.0 and abs(x) < 1e-3:
        return f"{x:.12e}"
    return f"{x:.12g}"


HEADER = ["scenario", "quantity", "value", "oracle", "abs_error",
          "rel_error", "level", "runtime"]


def _row(scenario, quantity, value, oracle=None, level=None, runtime=None):
    if oracle is None:
        abs_err = rel_err = None
    else:
        abs_err = abs(float(value) - float(oracle))
        scale = max(abs(float(oracle)), 1.0)
        rel_err = abs_err / scale
    return [scenario, quantity, _fmt(value), _fmt(oracle), _fmt(abs_err),
            _fmt(rel_err), _fmt(level), _fmt(runtime)]


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        writer.writerows(rows)
    log.info("wrote %s (%d rows)", path, len(rows))


def _timed(enabled):
    return time.perf_counter() if enabled else None


def _elapsed(t0):
    return None if t0 is None else time.perf_counter() - t0


def _fit_order(xs, ys):
    """Least-squares slope of log|y| against log(x), ignoring exact zeros."""
    pts = [(np.log(x), np.log(abs(y))) for x, y in zip(xs, ys) if y != 0]
    if len(pts) < 2:
        return 0.0
    lx, ly = np.array(pts).T
    return float(np.polyfit(lx, ly, 1)[0])


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------

def _verify_checks(cfg, tol_scale, timings):
    """Per-scenario invariant suite; yields (row, passed)."""
    rng = np.random.default_rng(cfg.seed)
    T = cfg.build_chain()
    box = cfg.build_box()
    out = []

    def check(quantity, value, oracle, tol, level=None, runtime=None):
        ok = abs(float(value) - float(oracle)) <= tol * tol_scale
        out.append((_row(cfg.name, quantity, value, oracle, level, runtime),
                    ok))

    n = cfg.ambient
    # exterior identities on random polynomial data
    t0 = _timed(timings)
    worst_dd = worst_cartan = 0.0
    for _ in range(10):
        r = int(rng.integers(0, n))
        phi = FormField.random_polynomial(n, r, rng, max_degree=2)
        v = VectorField.random_polynomial(n, rng, max_degree=2)
        if r + 2 <= n:
            ddp = exterior_derivative(exterior_derivative(phi))
            worst_dd = max(worst_dd, max(p.max_abs_coeff()
                                         for p in ddp.polys))
        diff = lie_derivative(phi, v) - lie_derivative_components(phi, v)
        worst_cartan = max(worst_cartan,
                           max(p.max_abs_coeff() for p in diff.polys))
    check("dd_zero_residual", worst_dd, 0.0, 0.0, runtime=_elapsed(t0))
    check("cartan_residual", worst_cartan, 0.0, 0.0)

    # boundary adjointness and del o del = 0 on the scenario chain
    t0 = _timed(timings)
    if T.degree >= 1:
        phi = FormField.random_polynomial(n, T.degree - 1, rng, max_degree=3)
        resid = abs(evaluate(boundary(T), phi)
                    - evaluate(T, exterior_derivative(phi)))
        check("adjointness_residual", resid, 0.0, 1e-8,
              runtime=_elapsed(t0))
    if T.degree >= 2:
        check("boundary_squared_terms", len(boundary(boundary(T))), 0, 0)

    # Reynolds duality
    t0 = _timed(timings)
    worst = 0.0
    for _ in range(5):
        v = VectorField.random_polynomial(n, rng, max_degree=2)
        phi = FormField.random_polynomial(n, T.degree, rng, max_degree=2)
        worst = max(worst, abs(evaluate(reynolds_operator(v, T), phi)
                               - evaluate(T, lie_derivative(phi, v))))
    check("reynolds_duality_residual", worst, 0.0, 1e-8,
          runtime=_elapsed(t0))

    # pushforward mass bound under a random affine map
    t0 = _timed(timings)
    mat = rng.standard_normal((n, n)) + n * np.eye(n)
    f = LipMap.affine(mat, rng.standard_normal(n))
    lip, _ = lipschitz_constant(f, box, n_pairs=2000, seed=cfg.seed)
    bound = lip ** T.degree * mass_chain(T)
    pushed_mass = mass_chain(pushforward_chain(f, T))
    check("pushforward_mass_within_bound",
          max(pushed_mass - bound - 1e-6, 0.0), 0.0, 0.0,
          runtime=_elapsed(t0))

    # homotopy formula for the scenario motion
    if cfg.motion.get("family") != "tent":
        t0 = _timed(timings)
        m = cfg.build_motion()
        phi = FormField.random_polynomial(n, T.degree, rng, max_degree=2)
        resid = homotopy_residual(m, (0.0, 0.4), T, phi,
                                  levels=cfg.levels, panels=cfg.panels)
        check("homotopy_residual", resid, 0.0, 1e-6, runtime=_elapsed(t0))
    return out


def cmd_verify(args, scenarios):
    rows, failures = [], 0
    timings = os.environ.get("CURRENTKIT_TIMINGS") == "1"

    def run(cfg):
        return _verify_checks(cfg, args.tolerance_scale, timings)

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(run, scenarios))
    for cfg, checks in zip(scenarios, results):
        for row, ok in checks:
            row[1] += "" if ok else " [FAIL]"
            rows.append(row)
            if not ok:
                failures += 1
                log.warning("FAIL %s / %s", cfg.name, row[1])
    _write_csv(os.path.join(args.out, "verify.csv"), rows)
    return 1 if failures else 0


# ----------------------------------------------------------------------
# transport
# ----------------------------------------------------------------------

def _transport_rows(cfg, timings):
    rows = []
    T = cfg.build_chain()
    m = cfg.build_motion()
    psi = cfg.build_cochain()
    tent = cfg.motion.get("family") == "tent"
    t0 = _timed(timings)
    an = transport_derivative(m, T, psi, cfg.tau, cfg.levels)
    rows.append(_row(cfg.name, "transport_derivative", an,
                     runtime=_elapsed(t0)))
    errs = []
    for eps in cfg.eps_ladder:
        fd = transport_derivative_fd(m, T, psi, cfg.tau, eps,
                                     levels=cfg.levels, one_sided=tent)
        err = abs(an - fd)
        errs.append((eps, err))
        rows.append(_row(cfg.name, f"fd_abs_error_eps={eps:g}", fd, an,
                         level=eps))
    orders = [np.log(e1 / e2) / np.log(x1 / x2)
              for (x1, e1), (x2, e2) in zip(errs, errs[1:])
              if e1 > 1e-12 and e2 > 1e-12]
    rows.append(_row(cfg.name, "fd_observed_order",
                     min(orders) if orders else float("inf")))
    if cfg.density is not None:
        t0 = _timed(timings)
        lhs, vol, flux = classical_reynolds(m, T, cfg.build_density(),
                                            cfg.tau, cfg.levels)
        rows.append(_row(cfg.name, "classical_lhs", lhs, vol + flux,
                         runtime=_elapsed(t0)))
        rows.append(_row(cfg.name, "classical_volume_term", vol))
        rows.append(_row(cfg.name, "classical_flux_term", flux))
    return rows


def cmd_transport(args, scenarios):
    timings = os.environ.get("CURRENTKIT_TIMINGS") == "1"
    usable = [c for c in scenarios if c.cochain is not None]
    for cfg in scenarios:
        if cfg.cochain is None:
            log.warning("skipping %s: no cochain", cfg.name)
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        blocks = list(pool.map(lambda c: _transport_rows(c, timings), usable))
    rows = [r for block in blocks for r in block]
    _write_csv(os.path.join(args.out, "transport.csv"), rows)
    return 0


# ----------------------------------------------------------------------
# flat norm
# ----------------------------------------------------------------------

def _align_chain(T, comp, max_levels=5):
    """Subdivide T until its simplices live on the complex."""
    for lv in range(max_levels + 1):
        work = T.subdivided(lv) if lv else T
        try:
            comp.chain_vector(work)
            return work
        except ValueError:
            continue
    raise ValueError("chain cannot be aligned with the hosting complex")


def cmd_flatnorm(args, scenarios):
    rows = []
    timings = os.environ.get("CURRENTKIT_TIMINGS") == "1"
    for cfg in scenarios:
        box = cfg.build_box()
        comp = freudenthal_complex(box.k_lower, box.k_upper, cfg.resolution)
        T = _align_chain(cfg.build_chain(), comp)
        t0 = _timed(timings)
        value, s_chain, r_chain, info = flat_norm_lp(T, comp)
        rows.append(_row(cfg.name, "flat_norm", value,
                         runtime=_elapsed(t0)))
        rows.append(_row(cfg.name, "mass_R", info["mass_R"]))
        rows.append(_row(cfg.name, "mass_S", info["mass_S"]))
        rows.append(_row(cfg.name, "lp_iterations", info["iterations"]))
        rows.append(_row(cfg.name, "mass", mass_chain(T)))
        # norm ladder on a fixed polynomial test family
        rng = np.random.default_rng(cfg.seed)
        family = [FormField.random_polynomial(cfg.ambient, T.degree, rng,
                                              max_degree=1) for _ in range(4)]
        dual = dual_flat_lower_bound(T, family, box)
        sharp = sharp_lower_bound(T, family, box)
        rows.append(_row(cfg.name, "dual_flat_lower_bound", dual))
        rows.append(_row(cfg.name, "sharp_lower_bound", sharp))
    _write_csv(os.path.join(args.out, "flatnorm.csv"), rows)
    return 0


# ----------------------------------------------------------------------
# convergence studies
# ----------------------------------------------------------------------

def cmd_converge(args, scenarios):
    rows = []
    rng = np.random.default_rng(args.seed)
    # adjointness residual vs subdivision on a triangle
    T = triangle_chain()
    phi = FormField.random_polynomial(2, 1, rng, max_degree=5)
    levels = [0, 1, 2, 3]
    resid = []
    for lv in levels:
        Tl = T.subdivided(lv)
        # centroid-rule evaluation so the quadrature error is visible
        r = abs(evaluate(boundary(Tl), phi, s_order=0)
                - evaluate(Tl, exterior_derivative(phi), s_order=0))
        resid.append(r)
        rows.append(_row("adjointness", "residual", r, 0.0, level=lv))
    rows.append(_row("adjointness", "observed_order",
                     _fit_order([2.0 ** -lv for lv in levels], resid)
                     if any(resid) else float("inf")))
    for cfg in scenarios:
        if cfg.cochain is None:
            continue
        Tc = cfg.build_chain()
        m = cfg.build_motion()
        box = cfg.build_box()
        family = [FormField.random_polynomial(cfg.ambient, Tc.degree, rng,
                                              max_degree=3) for _ in range(4)]
        eps = list(cfg.eps_ladder)
        lv = max(cfg.levels, 2)
        ests = continuity_modulus(m, Tc, 0.0, eps, family, box, levels=lv)
        for e, est in zip(eps, ests):
            rows.append(_row(cfg.name, "continuity_modulus", est, level=e))
        rows.append(_row(cfg.name, "continuity_slope",
                         _fit_order(eps, ests) if any(ests) else float("inf")))
        # homotopy residual vs time panels
        phi = FormField.random_polynomial(cfg.ambient, Tc.degree, rng,
                                          max_degree=3)
        panels = [2, 4, 8]
        # midpoint-rule time quadrature so the panel error is visible
        hres = [homotopy_residual(m, (0.0, 0.4), Tc, phi, levels=cfg.levels,
                                  panels=p, gauss_order=1) for p in panels]
        for p, r in zip(panels, hres):
            rows.append(_row(cfg.name, "homotopy_residual", r, 0.0, level=p))
        rows.append(_row(cfg.name, "homotopy_order",
                         _fit_order([1.0 / p for p in panels], hres)
                         if all(r > 1e-14 for r in hres) else float("inf")))
    _write_csv(os.path.join(args.out, "converge.csv"), rows)
    return 0


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="currentkit",
        description="currents, flat norms, and transport experiments")
    parser.add_argument("command",
                        choices=["verify", "transport", "flatnorm",
                                 "converge"])
    parser.add_argument("--config", help="scenario JSON file "
                        "(default: bundled scenario library)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--tolerance-scale", type=float, default=1.0)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    level = os.environ.get("CURRENTKIT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        scenarios = (load_config(args.config) if args.config
                     else builtin_scenarios())
        for cfg in scenarios:
            cfg.seed = cfg.seed if args.config else args.seed
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    try:
        handler = {"verify": cmd_verify, "transport": cmd_transport,
                   "flatnorm": cmd_flatnorm, "converge": cmd_converge}
        return handler[args.command](args, scenarios)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
