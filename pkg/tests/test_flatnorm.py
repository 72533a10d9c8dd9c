"""LP solver, simplicial complexes, and the flat norm."""

import numpy as np
import pytest

from currentkit.chains import (Chain, boundary, mass_chain,
                               unit_square_chain)
from currentkit.complexes import SimplicialComplex, freudenthal_complex
from currentkit.flatnorm import (LPProblem, dual_flat_lower_bound,
                                 export_lp_text, flat_norm_lp, lp_solve,
                                 sharp_lower_bound)
from currentkit.forms import Box, FormField


class TestLPSolver:
    def test_simple_equality(self):
        # min x + 2y  s.t.  x + y = 4
        sol = lp_solve(LPProblem([1.0, 2.0], [[1.0, 1.0]], [4.0]))
        assert sol.status == "OPTIMAL"
        assert sol.objective == pytest.approx(4.0)
        np.testing.assert_allclose(sol.x, [4.0, 0.0], atol=1e-10)

    def test_degenerate_constraints(self):
        # duplicated row must not break phase 1
        a = [[1.0, 1.0], [2.0, 2.0]]
        sol = lp_solve(LPProblem([1.0, 1.0], a, [3.0, 6.0]))
        assert sol.status == "OPTIMAL"
        assert sol.objective == pytest.approx(3.0)

    def test_infeasible(self):
        a = [[1.0, 1.0], [1.0, 1.0]]
        sol = lp_solve(LPProblem([1.0, 1.0], a, [1.0, 2.0]))
        assert sol.status == "INFEASIBLE"

    def test_unbounded(self):
        # min -x  s.t.  x - y = 0 : drive x with y
        sol = lp_solve(LPProblem([-1.0, 0.0], [[1.0, -1.0]], [0.0]))
        assert sol.status == "UNBOUNDED"

    def test_negative_rhs_normalized(self):
        sol = lp_solve(LPProblem([1.0, 1.0], [[-1.0, 0.0]], [-2.0]))
        assert sol.status == "OPTIMAL"
        assert sol.objective == pytest.approx(2.0)

    def test_basis_hint_agrees_with_cold_start(self):
        c = np.array([2.0, 3.0, 1.0, 1.0])
        a = np.array([[1.0, 0.0, 1.0, -1.0], [0.0, 1.0, -1.0, 2.0]])
        b = np.array([3.0, 2.0])
        cold = lp_solve(LPProblem(c, a, b))
        warm = lp_solve(LPProblem(c, a, b), basis_hint=[0, 1])
        assert cold.status == warm.status == "OPTIMAL"
        assert warm.objective == pytest.approx(cold.objective)

    def test_nonfinite_data_rejected(self):
        with pytest.raises(ValueError):
            LPProblem([np.inf], [[1.0]], [1.0])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            LPProblem([1.0, 1.0], [[1.0]], [1.0])


class TestComplex:
    def test_freudenthal_counts_2d(self):
        comp = freudenthal_complex((0, 0), (1, 1), 2)
        assert comp.n_simplices(2) == 8
        assert comp.n_simplices(0) == 9

    def test_boundary_matrix_squares_to_zero(self):
        comp = freudenthal_complex((0, 0), (1, 1), 2)
        b2 = comp.boundary_matrix(2)
        b1 = comp.boundary_matrix(1)
        np.testing.assert_allclose(b1 @ b2, 0.0, atol=1e-12)

    def test_full_chain_boundary_is_outer_square(self):
        comp = freudenthal_complex((0, 0), (1, 1), 3)
        full = comp.full_chain()
        assert mass_chain(full) == pytest.approx(1.0)
        assert mass_chain(boundary(full)) == pytest.approx(4.0)

    def test_chain_vector_round_trip(self):
        comp = freudenthal_complex((0, 0), (1, 1), 2)
        coeffs = np.arange(comp.n_simplices(1), dtype=float)
        T = comp.simplex_chain(1, coeffs)
        np.testing.assert_allclose(comp.chain_vector(T), coeffs, atol=1e-12)

    def test_foreign_chain_rejected(self):
        comp = freudenthal_complex((0, 0), (1, 1), 2)
        with pytest.raises(ValueError):
            comp.chain_vector(unit_square_chain())


class TestFlatNorm:
    def test_boundary_square_equals_one(self):
        comp = freudenthal_complex((0, 0), (1, 1), 4)
        T = boundary(unit_square_chain()).subdivided(2)
        value, s_chain, r_chain, info = flat_norm_lp(T, comp)
        # min(perimeter 4, area 1) = 1, with S the full square
        assert value == pytest.approx(1.0, abs=1e-8)
        assert info["mass_S"] == pytest.approx(1.0, abs=1e-8)
        assert info["mass_R"] == pytest.approx(0.0, abs=1e-8)

    def test_exhaustive_oracle_small_complex(self):
        # resolution-1 complex: 5 edges, 2 triangles; brute-force the
        # decomposition over integer S-coefficients
        comp = freudenthal_complex((0, 0), (1, 1), 1)
        T = boundary(comp.full_chain())
        t = comp.chain_vector(T)
        bmat = comp.boundary_matrix(2)
        vol1 = comp.volumes(1)
        vol2 = comp.volumes(2)
        best = np.inf
        for s0 in np.arange(-2, 2.5, 0.5):
            for s1 in np.arange(-2, 2.5, 0.5):
                s = np.array([s0, s1])
                best = min(best, vol1 @ np.abs(t - bmat @ s)
                           + vol2 @ np.abs(s))
        value, *_ = flat_norm_lp(T, comp)
        assert value == pytest.approx(best, abs=1e-10)

    def test_flat_norm_at_most_mass(self):
        rng = np.random.default_rng(0)
        comp = freudenthal_complex((0, 0), (1, 1), 3)
        for _ in range(5):
            coeffs = rng.integers(-2, 3, comp.n_simplices(1)).astype(float)
            T = comp.simplex_chain(1, coeffs)
            if not len(T):
                continue
            value, *_ = flat_norm_lp(T, comp)
            assert value <= mass_chain(T) + 1e-8

    def test_boundary_contraction(self):
        rng = np.random.default_rng(1)
        comp = freudenthal_complex((0, 0), (1, 1), 3)
        for _ in range(5):
            coeffs = rng.integers(-1, 2, comp.n_simplices(2)).astype(float)
            T = comp.simplex_chain(2, coeffs)
            if not len(T):
                continue
            f_t, *_ = flat_norm_lp(T, comp)
            bt = boundary(T)
            if not len(bt):
                continue
            f_bt, *_ = flat_norm_lp(bt, comp)
            assert f_bt <= f_t + 1e-8

    def test_top_degree_flat_equals_mass(self):
        comp = freudenthal_complex((0, 0), (1, 1), 2)
        T = comp.full_chain()
        value, _, _, info = flat_norm_lp(T, comp)
        assert value == pytest.approx(mass_chain(T), abs=1e-10)
        assert info["mass_S"] == 0.0

    def test_zero_chain(self):
        comp = freudenthal_complex((0, 0), (1, 1), 2)
        T = Chain([], 1, 2)
        value, *_ = flat_norm_lp(T, comp)
        assert value == pytest.approx(0.0, abs=1e-12)


class TestDualBounds:
    def setup_method(self):
        self.box = Box.unit(2, resolution=5)
        self.rng = np.random.default_rng(7)
        self.family = [FormField.random_polynomial(2, 1, self.rng,
                                                   max_degree=1)
                       for _ in range(5)]

    def test_ladder_ordering(self):
        T = boundary(unit_square_chain())
        sharp = sharp_lower_bound(T, self.family, self.box)
        flat = dual_flat_lower_bound(T, self.family, self.box)
        comp = freudenthal_complex((0, 0), (1, 1), 4)
        value, *_ = flat_norm_lp(T.subdivided(2), comp)
        assert sharp <= flat + 1e-9
        assert flat <= value + 1e-6
        assert value <= mass_chain(T) + 1e-9

    def test_empty_family_rejected(self):
        with pytest.raises(ValueError):
            dual_flat_lower_bound(boundary(unit_square_chain()), [], self.box)


class TestExport:
    def test_lp_text_round_trip_fields(self):
        prob = LPProblem([1.0, 0.0], [[1.0, 2.0]], [3.0])
        text = export_lp_text(prob)
        assert "MINIMIZE" in text
        assert "eq0" in text
        assert "= 3" in text
