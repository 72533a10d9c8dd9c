"""Simplex quadrature, interval quadrature, and edgewise subdivision."""

from itertools import product
from math import factorial

import numpy as np
import pytest

from currentkit.quadrature import (adaptive_interval, grundmann_moller,
                                   integrate_interval, simplex_rule,
                                   simplex_volume, subdivide_barycentric)


def _monomial_integral_unit_simplex(exps):
    """Exact integral of prod x_i^e_i over the standard simplex."""
    num = np.prod([float(factorial(e)) for e in exps])
    return num / factorial(sum(exps) + len(exps))


class TestGrundmannMoller:
    @pytest.mark.parametrize("dim", [1, 2, 3])
    @pytest.mark.parametrize("s", [0, 1, 2])
    def test_weights_sum_to_one(self, dim, s):
        _, w = grundmann_moller(dim, s)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_polynomial_exactness(self, dim):
        s = 2  # degree-5 rule
        verts = np.vstack([np.zeros(dim), np.eye(dim)])
        pts, w = simplex_rule(verts, s)
        for exps in product(range(3), repeat=dim):
            if sum(exps) > 2 * s + 1:
                continue
            approx = sum(wk * np.prod(p ** np.array(exps))
                         for p, wk in zip(pts, w))
            exact = _monomial_integral_unit_simplex(exps)
            assert approx == pytest.approx(exact, abs=1e-14), exps

    def test_degree_zero_simplex(self):
        pts, w = simplex_rule(np.array([[2.0, 3.0]]))
        np.testing.assert_allclose(pts, [[2.0, 3.0]])
        np.testing.assert_allclose(w, [1.0])


class TestSimplexVolume:
    def test_unit_triangle(self):
        v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        assert simplex_volume(v) == pytest.approx(0.5)

    def test_embedded_segment(self):
        v = np.array([[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]])
        assert simplex_volume(v) == pytest.approx(5.0)

    def test_tetrahedron(self):
        v = np.vstack([np.zeros(3), np.eye(3)])
        assert simplex_volume(v) == pytest.approx(1.0 / 6.0)


class TestIntervalQuadrature:
    def test_polynomial_exact(self):
        val = integrate_interval(lambda t: t ** 7, 0.0, 1.0, panels=2)
        assert val == pytest.approx(1.0 / 8.0, abs=1e-14)

    def test_transcendental(self):
        val = integrate_interval(np.sin, 0.0, np.pi, panels=8)
        assert val == pytest.approx(2.0, abs=1e-12)

    def test_empty_interval(self):
        assert integrate_interval(np.exp, 1.0, 1.0) == 0.0

    def test_adaptive_reports_error(self):
        val, err = adaptive_interval(lambda t: np.abs(t), -1.0, 1.0,
                                     tol=1e-10)
        assert val == pytest.approx(1.0, abs=1e-9)
        assert err >= 0.0


class TestSubdivision:
    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_children_tile_parent_volume(self, dim):
        rng = np.random.default_rng(dim)
        verts = rng.standard_normal((dim + 1, dim + 1))
        parent = simplex_volume(verts)
        total = sum(simplex_volume(child)
                    for child, _ in subdivide_barycentric(verts))
        assert total == pytest.approx(parent, rel=1e-10)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_child_count(self, dim):
        verts = np.vstack([np.zeros(dim), np.eye(dim)])
        children = list(subdivide_barycentric(verts, k=2))
        assert len(children) == 2 ** dim

    def test_signed_volumes_tile_in_2d(self):
        # orientation signs must make the signed areas add up
        verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

        def signed_area(v):
            return 0.5 * np.linalg.det(np.array([v[1] - v[0], v[2] - v[0]]))

        parent = signed_area(verts)
        # each child's vertex-order orientation times its reported sign must
        # match the parent's orientation
        for child, sign in subdivide_barycentric(verts):
            assert np.sign(signed_area(child)) == sign * np.sign(parent)
