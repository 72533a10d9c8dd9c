"""Polynomials, form fields, exterior derivative, pullback, Lie derivative,
and the seminorm family."""

import numpy as np
import pytest

from currentkit.exterior import multi_indices
from currentkit.forms import (AffineMap, Box, FormField, TimePolynomialForm,
                              VectorField, contract, exterior_derivative,
                              form_lipschitz, lie_derivative,
                              lie_derivative_components, pullback,
                              seminorm_comass, seminorm_flat, seminorm_sharp,
                              time_slice_contract)
from currentkit.polynomial import Polynomial


def _max_coeff(phi):
    return max(p.max_abs_coeff() for p in phi.polys)


class TestPolynomial:
    def test_eval_and_diff(self):
        x, y = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
        p = x * x * y + y * 3.0
        assert p([2.0, 5.0]) == pytest.approx(35.0)
        assert p.diff(0)([2.0, 5.0]) == pytest.approx(20.0)
        assert p.diff(1)([2.0, 5.0]) == pytest.approx(7.0)

    def test_compose_affine(self):
        x, y = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
        p = x * y
        mat = np.array([[0.0, 1.0], [1.0, 0.0]])
        shift = np.array([1.0, 0.0])
        q = p.compose_affine(mat, shift)
        pt = np.array([0.3, -0.7])
        assert q(pt) == pytest.approx(p(mat @ pt + shift))

    def test_substitute_and_prepend(self):
        t, x = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
        p = t * t * x
        q = p.substitute_first(3.0)
        assert q.nvars == 1
        assert q([2.0]) == pytest.approx(18.0)
        r = Polynomial.variable(0, 1).prepend_variable()
        assert r([9.0, 4.0]) == pytest.approx(4.0)

    def test_json_round_trip(self):
        rng = np.random.default_rng(0)
        p = Polynomial.random(3, 4, rng)
        q = Polynomial.from_json_obj(3, p.to_json_obj())
        assert q.terms == p.terms

    def test_eval_many_matches_scalar(self):
        rng = np.random.default_rng(1)
        p = Polynomial.random(2, 3, rng)
        pts = rng.standard_normal((10, 2))
        np.testing.assert_allclose(p.eval_many(pts),
                                   [p(pt) for pt in pts], atol=1e-12)


class TestExteriorDerivative:
    def test_explicit_one_form(self):
        # d(x dy) = dx^dy; d(y dx) = -dx^dy
        x = Polynomial.variable(0, 2)
        y = Polynomial.variable(1, 2)
        phi = FormField.from_polynomials(2, 1, {(1,): x})
        d = exterior_derivative(phi)
        assert d.polys[0].terms == {(0, 0): 1.0}
        psi = FormField.from_polynomials(2, 1, {(0,): y})
        d2 = exterior_derivative(psi)
        assert d2.polys[0].terms == {(0, 0): -1.0}

    @pytest.mark.parametrize("n,r", [(2, 0), (3, 0), (3, 1), (4, 1), (4, 2)])
    def test_dd_zero_exact(self, n, r):
        rng = np.random.default_rng(n * 10 + r)
        phi = FormField.random_polynomial(n, r, rng)
        dd = exterior_derivative(exterior_derivative(phi))
        assert _max_coeff(dd) == 0.0

    def test_finite_difference_backend(self):
        phi = FormField.from_callable(
            2, 1, lambda p: np.array([np.sin(p[1]), 0.0]))
        d = exterior_derivative(phi)
        pt = np.array([0.2, 0.4])
        # d(sin(y) dx) = -cos(y) dx^dy
        assert d(pt).coefficients[0] == pytest.approx(-np.cos(0.4), abs=1e-8)


class TestPullback:
    def test_affine_is_exact(self):
        rng = np.random.default_rng(4)
        phi = FormField.random_polynomial(2, 1, rng)
        f = AffineMap(rng.standard_normal((2, 2)), rng.standard_normal(2))
        pb = pullback(phi, f)
        pt = np.array([0.3, -0.2])
        jac = f.mat
        expected = phi(f(pt))
        got = pb(pt)
        # covariance: (f^* phi)(x) acts on vectors through Df
        for k, idx in enumerate(multi_indices(1, 2)):
            e = np.zeros(2)
            e[idx[0]] = 1.0
            lhs = got.coefficients[k]
            rhs = expected.coefficients @ (jac @ e)
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_commutes_with_d_affine(self):
        rng = np.random.default_rng(8)
        phi = FormField.random_polynomial(3, 1, rng, max_degree=2)
        f = AffineMap(rng.standard_normal((3, 3)), rng.standard_normal(3))
        lhs = pullback(exterior_derivative(phi), f)
        rhs = exterior_derivative(pullback(phi, f))
        diff = lhs - rhs
        assert _max_coeff(diff) < 1e-12

    def test_dimension_change(self):
        # pull a 1-form on R^3 back to the parameter square in R^2
        rng = np.random.default_rng(6)
        phi = FormField.random_polynomial(3, 1, rng, max_degree=2)
        mat = rng.standard_normal((3, 2))
        f = AffineMap(mat, np.zeros(3))
        pb = pullback(phi, f)
        assert pb.ambient == 2
        pt = np.array([0.1, 0.9])
        e0 = np.array([1.0, 0.0])
        assert pb(pt).coefficients[0] == pytest.approx(
            phi(f(pt)).coefficients @ (mat @ e0), abs=1e-12)


class TestLieDerivative:
    @pytest.mark.parametrize("n,r", [(2, 0), (2, 1), (2, 2), (3, 1), (3, 2),
                                     (4, 2)])
    def test_cartan_equals_component_formula(self, n, r):
        rng = np.random.default_rng(n * 7 + r)
        phi = FormField.random_polynomial(n, r, rng, max_degree=2)
        v = VectorField.random_polynomial(n, rng, max_degree=2)
        diff = lie_derivative(phi, v) - lie_derivative_components(phi, v)
        assert _max_coeff(diff) == 0.0

    def test_rotation_invariant_form(self):
        # the area form is invariant under rigid rotation
        x, y = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
        v = VectorField.from_polynomials([y * -1.0, x])
        area = FormField.from_polynomials(2, 2, {(0, 1): 1.0})
        lv = lie_derivative(area, v)
        assert _max_coeff(lv) == 0.0

    def test_contract_known_value(self):
        x, y = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
        phi = FormField.from_polynomials(2, 2, {(0, 1): x + y})
        v = VectorField.from_polynomials([x, y * 0.0])
        c = contract(phi, v)
        # (x+y) dx^dy -| (x, 0) = x(x+y) dy
        pt = np.array([2.0, 3.0])
        np.testing.assert_allclose(c(pt).coefficients, [0.0, 10.0])


class TestSeminorms:
    def setup_method(self):
        self.box = Box.unit(2, resolution=5)

    def test_comass_constant_area_form(self):
        phi = FormField.from_polynomials(2, 2, {(0, 1): 2.0})
        assert seminorm_comass(phi, self.box) == pytest.approx(2.0)

    def test_flat_dominates_comass(self):
        rng = np.random.default_rng(3)
        phi = FormField.random_polynomial(2, 1, rng, max_degree=2)
        assert seminorm_flat(phi, self.box) >= seminorm_comass(
            phi, self.box) - 1e-12

    def test_flat_equals_max_of_m_and_m_of_d(self):
        rng = np.random.default_rng(5)
        phi = FormField.random_polynomial(2, 1, rng, max_degree=2)
        expected = max(seminorm_comass(phi, self.box),
                       seminorm_comass(exterior_derivative(phi), self.box))
        assert seminorm_flat(phi, self.box) == pytest.approx(expected)

    def test_form_lipschitz_linear_coefficient(self):
        x = Polynomial.variable(0, 2)
        phi = FormField.from_polynomials(2, 1, {(0,): x})
        lip = form_lipschitz(phi, self.box)
        assert lip == pytest.approx(1.0, rel=1e-6)

    def test_sharp_scaling_with_degree(self):
        # constant form: S = comass; Lipschitz part vanishes
        phi = FormField.from_polynomials(2, 1, {(0,): 3.0})
        assert seminorm_sharp(phi, self.box) == pytest.approx(3.0)

    def test_sharp_uses_lip_weight(self):
        x = Polynomial.variable(0, 2)
        phi = FormField.from_polynomials(2, 1, {(0,): x})
        # sup comass = 1 on K = [0,1]^2; (r+1)*Lip = 2
        assert seminorm_sharp(phi, self.box) == pytest.approx(2.0, rel=1e-6)


class TestTimeForms:
    def test_at_time_and_derivative(self):
        t = Polynomial.variable(0, 3)
        x = Polynomial.variable(1, 3)
        omega = TimePolynomialForm(2, 1, {(0,): t * t * x})
        frozen = omega.at_time(2.0)
        assert frozen.polys[0]([3.0, 0.0]) == pytest.approx(12.0)
        dot = omega.time_derivative().at_time(2.0)
        assert dot.polys[0]([3.0, 0.0]) == pytest.approx(12.0)

    def test_static_lift_round_trip(self):
        rng = np.random.default_rng(2)
        phi = FormField.random_polynomial(2, 1, rng)
        lifted = TimePolynomialForm.static(phi)
        back = lifted.at_time(17.0)
        assert _max_coeff(back - phi) < 1e-12

    def test_spatial_exterior_derivative(self):
        t = Polynomial.variable(0, 3)
        x = Polynomial.variable(1, 3)
        y = Polynomial.variable(2, 3)
        omega = TimePolynomialForm(2, 1, {(0,): t * y})
        d = omega.exterior_derivative().at_time(3.0)
        # d(3y dx) = -3 dx^dy
        assert d.polys[0].terms == {(0, 0): -3.0}

    def test_time_slice_contract(self):
        # omega = x1 dt^dx1 + dx1^dx2 on R^(1+2); slice at any t keeps the
        # dt-paired part with the time variable substituted
        x1 = Polynomial.variable(1, 3)
        omega = FormField.from_polynomials(
            3, 2, {(0, 1): x1.compose_affine(np.eye(3), np.zeros(3)),
                   (1, 2): Polynomial.constant(3, 1.0)})
        sliced = time_slice_contract(omega, 0.5)
        assert sliced.ambient == 2
        assert sliced.degree == 1
        pt = np.array([2.0, 7.0])
        np.testing.assert_allclose(sliced(pt).coefficients, [2.0, 0.0])

    def test_degree_mismatch_raises(self):
        with pytest.raises(ValueError):
            TimePolynomialForm(2, 1, {(0, 1): Polynomial.zero(3)})
