import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lete.bspline import (
    KnotVector,
    basis_eval,
    basis_eval_dx,
    basis_eval_with_dx,
    make_uniform_knots,
)

from oracles import uniform_basis


class TestMakeUniformKnots:
    def test_cubic_default_grid(self):
        kv = make_uniform_knots(-2.0, 2.0, grid_size=8, degree=3)
        assert kv.knots.size == 12
        np.testing.assert_allclose(np.diff(kv.knots), 0.8, atol=1e-12)
        assert kv.knots[0] == pytest.approx(-4.4, abs=1e-12)
        assert kv.knots[-1] == pytest.approx(4.4, abs=1e-12)
        assert kv.interior == (-2.0, 2.0)

    def test_single_cell_degree_zero(self):
        kv = make_uniform_knots(0.0, 1.0, grid_size=1, degree=0)
        np.testing.assert_array_equal(kv.knots, [0.0, 1.0])
        np.testing.assert_array_equal(basis_eval(kv, 0.5), [1.0])

    def test_width_point_four_supports(self):
        kv = make_uniform_knots(-2.2, 1.0, grid_size=8, degree=0)
        sup = kv.supports()
        assert len(sup) == 8
        expected = [(-2.2 + 0.4 * i, -1.8 + 0.4 * i) for i in range(8)]
        np.testing.assert_allclose(sup, expected, atol=1e-12)

    @pytest.mark.parametrize("lo,hi,g,p", [(1.0, 1.0, 4, 1), (2.0, 1.0, 4, 1), (0.0, 1.0, 2, 3), (0.0, 1.0, 4, -1)])
    def test_rejects_bad_arguments(self, lo, hi, g, p):
        with pytest.raises(ValueError):
            make_uniform_knots(lo, hi, g, p)


class TestKnotVector:
    def test_length_must_match(self):
        with pytest.raises(ValueError, match="knots"):
            KnotVector(np.arange(5.0), 1, 4)

    def test_non_decreasing(self):
        with pytest.raises(ValueError, match="non-decreasing"):
            KnotVector(np.array([0.0, 2.0, 1.0, 3.0]), 1, 2)

    def test_degenerate_interior(self):
        with pytest.raises(ValueError, match="degenerate"):
            KnotVector(np.array([0.0, 1.0, 1.0, 2.0]), 1, 2)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            KnotVector(np.array([0.0, np.nan, 2.0]), 0, 2)


class TestBasisEval:
    def test_degree_zero_indicator(self):
        kv = KnotVector(np.array([0.0, 1.0, 2.0]), 0, 2)
        np.testing.assert_array_equal(basis_eval(kv, 0.5), [1.0, 0.0])
        # half-open cells: an interior knot belongs to the cell on its right
        np.testing.assert_array_equal(basis_eval(kv, 1.0), [0.0, 1.0])
        # the last cell is closed on the right
        np.testing.assert_array_equal(basis_eval(kv, 2.0), [0.0, 1.0])

    def test_far_outside_is_zero(self):
        kv = make_uniform_knots(-2, 2)
        np.testing.assert_array_equal(basis_eval(kv, -100.0), np.zeros(8))
        np.testing.assert_array_equal(basis_eval(kv, 100.0), np.zeros(8))

    @pytest.mark.parametrize("degree", [0, 1, 2, 3])
    @pytest.mark.parametrize("grid", [4, 7, 16])
    def test_matches_truncated_power_formula(self, degree, grid):
        if grid < degree + 1:
            pytest.skip("grid too small")
        kv = make_uniform_knots(-1.5, 2.5, grid, degree)
        step = (2.5 + 1.5) / (grid - degree)
        xs = np.random.default_rng(degree * 31 + grid).uniform(kv.knots[0] - 0.5, kv.knots[-1] + 0.5, 200)
        got = basis_eval(kv, xs)
        ref = np.array([uniform_basis(x, kv.knots[0], step, degree, grid) for x in xs])
        np.testing.assert_allclose(got, ref, atol=1e-12)

    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_partition_of_unity_on_interior(self, degree):
        kv = make_uniform_knots(-2, 2, 10, degree)
        xs = np.concatenate([np.linspace(-2, 2, 1001), kv.knots[degree : kv.grid_size + 1]])
        np.testing.assert_allclose(basis_eval(kv, xs).sum(axis=-1), 1.0, atol=1e-10)

    def test_non_negative_and_local_support(self):
        kv = make_uniform_knots(-2, 2, 9, 3)
        xs = np.linspace(-6, 6, 2401)
        B = basis_eval(kv, xs)
        assert np.all(B >= 0)
        for i, (lo, hi) in enumerate(kv.supports()):
            outside = (xs < lo) | (xs >= hi)
            assert np.all(B[outside, i] == 0.0)
            inside = (xs > lo) & (xs < hi)
            assert np.all(B[inside, i] > 0.0)

    def test_shape_follows_input(self):
        kv = make_uniform_knots(-2, 2)
        assert basis_eval(kv, 0.3).shape == (8,)
        assert basis_eval(kv, np.zeros((4, 3))).shape == (4, 3, 8)

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(ValueError, match="finite"):
            basis_eval(make_uniform_knots(-2, 2), np.array([0.0, bad]))


class TestBasisDerivative:
    def test_degree_zero_is_zero(self):
        kv = make_uniform_knots(0, 1, 5, 0)
        xs = np.concatenate([np.linspace(-1, 2, 50), kv.knots])
        assert np.all(basis_eval_dx(kv, xs) == 0.0)

    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_central_difference(self, degree):
        kv = make_uniform_knots(-2, 2, 8, degree)
        rng = np.random.default_rng(degree)
        xs = rng.uniform(-2, 2, 1000)
        h = 1e-6
        fd = (basis_eval(kv, xs + h) - basis_eval(kv, xs - h)) / (2 * h)
        err = np.abs(basis_eval_dx(kv, xs) - fd)
        if degree == 1:
            # hat functions have kinks at knots; skip points straddling one
            near = np.min(np.abs(xs[:, None] - kv.knots[None, :]), axis=1) < 2 * h
            err = err[~near]
        assert err.max() < 1e-6

    def test_derivatives_sum_to_zero(self):
        kv = make_uniform_knots(-2, 2, 12, 3)
        xs = np.linspace(-2, 2, 777)
        np.testing.assert_allclose(basis_eval_dx(kv, xs).sum(axis=-1), 0.0, atol=1e-10)

    def test_with_dx_consistent(self):
        kv = make_uniform_knots(-2, 2, 8, 2)
        xs = np.linspace(-3, 3, 91)
        B, dB = basis_eval_with_dx(kv, xs)
        np.testing.assert_array_equal(B, basis_eval(kv, xs))
        np.testing.assert_array_equal(dB, basis_eval_dx(kv, xs))


@settings(max_examples=60, deadline=None)
@given(
    degree=st.integers(0, 3),
    extra=st.integers(0, 12),
    lo=st.floats(-50, 50),
    width=st.floats(0.1, 100),
    frac=st.floats(0, 1),
)
def test_partition_of_unity_property(degree, extra, lo, width, frac):
    kv = make_uniform_knots(lo, lo + width, degree + 1 + extra, degree)
    x = lo + frac * width
    B = basis_eval(kv, x)
    assert abs(B.sum() - 1.0) < 1e-10
    assert np.count_nonzero(B) <= degree + 1
