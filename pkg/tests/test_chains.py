"""Simplicial chains as currents: evaluation, boundary, mass, the current
expression algebra, and serialization."""

import numpy as np
import pytest

from currentkit.chains import (Boundary, Chain, Leaf, Scale, Simplex, Sum,
                               VWedge, boundary, evaluate,
                               evaluate_with_error, interval_product_evaluate,
                               mass_chain, triangle_chain, unit_interval_chain,
                               unit_square_chain, v_wedge)
from currentkit.forms import (FormField, VectorField, contract,
                              exterior_derivative)
from currentkit.polynomial import Polynomial


def _tet():
    return Chain([(Simplex(np.vstack([np.zeros(3), np.eye(3)])), 1.0)])


class TestSimplex:
    def test_volume_and_tangent(self):
        s = Simplex(np.array([[0.0, 0.0], [2.0, 0.0]]))
        assert s.volume == pytest.approx(2.0)
        np.testing.assert_allclose(s.unit_tangent().coefficients, [1.0, 0.0])

    def test_orientation_sign_flips_tangent(self):
        s = Simplex(np.array([[0.0, 0.0], [2.0, 0.0]]), sign=-1)
        np.testing.assert_allclose(s.unit_tangent().coefficients, [-1.0, 0.0])

    def test_faces_alternate(self):
        s = Simplex(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
        faces = s.faces()
        assert len(faces) == 3
        assert [f.sign for f in faces] == [1, -1, 1]

    def test_canonical_key_orientation(self):
        a = Simplex(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
        b = Simplex(np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]))
        ka, sa = a.canonical_key()
        kb, sb = b.canonical_key()
        assert ka == kb
        assert sa == -sb


class TestEvaluation:
    def test_segment_against_dx(self):
        seg = unit_interval_chain(2)
        dx = FormField.from_polynomials(2, 1, {(0,): 1.0})
        assert evaluate(seg, dx) == pytest.approx(1.0)

    def test_segment_against_x_dx(self):
        seg = unit_interval_chain(1)
        x = Polynomial.variable(0, 1)
        phi = FormField.from_polynomials(1, 1, {(0,): x})
        assert evaluate(seg, phi) == pytest.approx(0.5)

    def test_square_area(self):
        sq = unit_square_chain()
        area = FormField.from_polynomials(2, 2, {(0, 1): 1.0})
        assert evaluate(sq, area) == pytest.approx(1.0)

    def test_orientation_reversal_negates(self):
        sq = unit_square_chain()
        area = FormField.from_polynomials(2, 2, {(0, 1): 1.0})
        assert evaluate(sq * -1.0, area) == pytest.approx(-1.0)

    def test_subdivision_preserves_value(self):
        rng = np.random.default_rng(0)
        sq = unit_square_chain()
        phi = FormField.random_polynomial(2, 2, rng, max_degree=3)
        v0 = evaluate(sq, phi)
        v2 = evaluate(sq.subdivided(2), phi)
        assert v2 == pytest.approx(v0, abs=1e-12)

    def test_degree_mismatch_raises(self):
        sq = unit_square_chain()
        phi = FormField.from_polynomials(2, 1, {(0,): 1.0})
        with pytest.raises(ValueError):
            evaluate(sq, phi)

    def test_richardson_error_estimate(self):
        sq = unit_square_chain()
        phi = FormField.from_callable(
            2, 2, lambda p: np.array([np.sin(3 * p[0]) * np.cos(2 * p[1])]))
        val, err = evaluate_with_error(sq, phi)
        exact = (1 - np.cos(3.0)) / 3.0 * np.sin(2.0) / 2.0
        assert val == pytest.approx(exact, abs=1e-4)
        assert abs(val - exact) <= 50 * err + 1e-12


class TestBoundary:
    def test_square_perimeter(self):
        b = boundary(unit_square_chain())
        assert mass_chain(b) == pytest.approx(4.0)
        # the interior diagonal must cancel
        assert len(b) == 4

    def test_boundary_of_boundary_triangle(self):
        bb = boundary(boundary(triangle_chain()))
        assert len(bb) == 0

    def test_boundary_of_boundary_tet(self):
        bb = boundary(boundary(_tet()))
        assert len(bb) == 0

    def test_adjointness(self):
        rng = np.random.default_rng(1)
        T = _tet()
        phi = FormField.random_polynomial(3, 2, rng, max_degree=3)
        lhs = evaluate(boundary(T), phi)
        rhs = evaluate(T, exterior_derivative(phi))
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_multiplicity_scales_boundary(self):
        T = triangle_chain() * 3.0
        b = boundary(T)
        assert mass_chain(b) == pytest.approx(3.0 * (2 + np.sqrt(2.0)))


class TestMass:
    def test_square_mass(self):
        assert mass_chain(unit_square_chain()) == pytest.approx(1.0)

    def test_mass_weighted_by_multiplicity(self):
        assert mass_chain(unit_square_chain() * -2.5) == pytest.approx(2.5)


class TestCurrentAlgebra:
    def test_vwedge_adjoint_to_contract(self):
        rng = np.random.default_rng(2)
        b = boundary(unit_square_chain())
        v = VectorField.random_polynomial(2, rng)
        phi = FormField.random_polynomial(2, 2, rng)
        lhs = evaluate(v_wedge(v, Leaf(b)), phi)
        rhs = evaluate(b, contract(phi, v))
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_sum_and_scale(self):
        sq = unit_square_chain()
        phi = FormField.from_polynomials(2, 2, {(0, 1): 1.0})
        expr = Sum([Scale(2.0, Leaf(sq)), Scale(-0.5, Leaf(sq))])
        assert evaluate(expr, phi) == pytest.approx(1.5)

    def test_boundary_node_matches_chain_boundary(self):
        rng = np.random.default_rng(3)
        sq = unit_square_chain()
        phi = FormField.random_polynomial(2, 1, rng, max_degree=2)
        assert evaluate(Boundary(Leaf(sq)), phi) == pytest.approx(
            evaluate(boundary(sq), phi), abs=1e-12)

    def test_vwedge_degree_overflow(self):
        v = VectorField.constant([1.0, 0.0])
        with pytest.raises(ValueError):
            VWedge(v, Leaf(unit_square_chain()))

    def test_mixed_degree_sum_raises(self):
        sq = unit_square_chain()
        with pytest.raises(ValueError):
            Sum([Leaf(sq), Boundary(Leaf(sq))])


class TestSerialization:
    def test_round_trip(self, tmp_path):
        T = unit_square_chain().subdivided(1) * 2.0
        path = tmp_path / "chain.json"
        T.save(path)
        back = Chain.load(path)
        rng = np.random.default_rng(4)
        phi = FormField.random_polynomial(2, 2, rng)
        assert evaluate(back, phi) == pytest.approx(evaluate(T, phi),
                                                    abs=1e-12)
        assert mass_chain(back) == pytest.approx(mass_chain(T))

    def test_vertex_table_is_deduplicated(self):
        obj = unit_square_chain().to_json_obj()
        assert len(obj["vertex_table"]) == 4


class TestIntervalProduct:
    def test_product_with_time_form(self):
        # omega = t dt^dx over [0,1] x (unit segment): integral = 1/2
        t = Polynomial.variable(0, 2)
        omega = FormField.from_polynomials(2, 2, {(0, 1): t})
        seg = unit_interval_chain(1)
        val = interval_product_evaluate((0.0, 1.0), seg, omega)
        assert val == pytest.approx(0.5, abs=1e-10)

    def test_purely_spatial_part_ignored(self):
        # omega = dx1^dx2 has no dt part; the product pairing vanishes
        omega = FormField.from_polynomials(3, 2, {(1, 2): 1.0})
        seg = unit_interval_chain(2)
        val = interval_product_evaluate((0.0, 1.0), seg, omega)
        assert val == pytest.approx(0.0, abs=1e-12)
