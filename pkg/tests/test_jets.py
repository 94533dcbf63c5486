"""Unit and property tests for truncated Taylor (jet) arithmetic."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solitonlab.jets import (
    DIV_THRESHOLD,
    Jet,
    JetMismatchError,
    SingularJetError,
    jet_det,
    jet_exp,
    jet_log_d2,
)


def poly_jet(coeffs, center, order):
    """Jet of the polynomial sum c_i x^i at an arbitrary center."""
    out = np.zeros(order + 1)
    for i, c in enumerate(coeffs):
        for n in range(min(i, order) + 1):
            out[n] += c * math.comb(i, n) * center ** (i - n)
    return Jet(center, out)


finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
coeff_lists = st.lists(finite, min_size=1, max_size=5)


class TestArithmetic:
    def test_difference_of_squares(self):
        one_plus = Jet(0.0, np.array([1.0, 1.0, 0.0]))
        one_minus = Jet(0.0, np.array([1.0, -1.0, 0.0]))
        prod = one_plus * one_minus
        assert np.allclose(prod.coeffs, [1.0, 0.0, -1.0])

    def test_additive_identity(self):
        f = Jet(0.5, np.array([2.0, -1.0, 3.0]))
        zero = Jet.constant(0.0, 0.5, 2)
        assert np.array_equal((f + zero).coeffs, f.coeffs)

    def test_hand_cauchy_product(self):
        a = Jet(0.0, np.array([1.0, 2.0, 1.0]))
        b = Jet(0.0, np.array([1.0, 1.0, 0.0]))
        assert np.allclose((a * b).coeffs, [1.0, 3.0, 3.0])

    def test_mismatched_center_raises(self):
        a = Jet.constant(1.0, 0.0, 2)
        b = Jet.constant(1.0, 1.0, 2)
        with pytest.raises(JetMismatchError):
            a + b

    def test_mismatched_order_raises(self):
        a = Jet.constant(1.0, 0.0, 2)
        b = Jet.constant(1.0, 0.0, 3)
        with pytest.raises(JetMismatchError):
            a * b

    @given(coeff_lists, coeff_lists, finite)
    @settings(max_examples=100)
    def test_polynomial_product_exact(self, p, q, center):
        order = len(p) + len(q) - 2
        jp = poly_jet(p, center, order)
        jq = poly_jet(q, center, order)
        full = np.convolve(p, q)
        expected = poly_jet(full, center, order)
        scale = max(1.0, float(np.max(np.abs(expected.coeffs))))
        assert np.max(np.abs((jp * jq).coeffs - expected.coeffs)) / scale < 1e-13

    @given(coeff_lists, coeff_lists, finite)
    @settings(max_examples=100)
    def test_polynomial_sum_exact(self, p, q, center):
        order = max(len(p), len(q)) - 1
        jp = poly_jet(p, center, order)
        jq = poly_jet(q, center, order)
        full = np.zeros(order + 1)
        full[: len(p)] += p
        full[: len(q)] += q
        expected = poly_jet(full, center, order)
        scale = max(1.0, float(np.max(np.abs(expected.coeffs))))
        assert np.max(np.abs((jp + jq).coeffs - expected.coeffs)) / scale < 1e-13


class TestDivision:
    def test_self_division(self):
        f = Jet(0.0, np.array([2.0, -1.0, 0.5]))
        assert np.allclose((f / f).coeffs, [1.0, 0.0, 0.0])

    def test_geometric_series(self):
        one = Jet.constant(1.0, 0.0, 2)
        denom = Jet(0.0, np.array([1.0, 1.0, 0.0]))
        assert np.allclose((one / denom).coeffs, [1.0, -1.0, 1.0])

    @given(
        st.lists(st.floats(min_value=-2.0, max_value=2.0), min_size=3, max_size=3),
        st.lists(st.floats(min_value=-2.0, max_value=2.0), min_size=3, max_size=3),
    )
    @settings(max_examples=100)
    def test_div_mul_round_trip(self, ac, bc):
        ac[0] = ac[0] if abs(ac[0]) >= 0.1 else 0.7
        bc[0] = bc[0] if abs(bc[0]) >= 0.1 else 1.3
        a = Jet(0.0, np.array(ac))
        b = Jet(0.0, np.array(bc))
        back = (a * b) / b
        scale = max(1.0, float(np.max(np.abs(a.coeffs))))
        assert np.max(np.abs(back.coeffs - a.coeffs)) / scale < 1e-12

    def test_singular_divisor_raises(self):
        a = Jet.constant(1.0, 0.0, 2)
        b = Jet(0.0, np.array([DIV_THRESHOLD / 10.0, 1.0, 0.0]))
        with pytest.raises(SingularJetError):
            a / b


class TestExp:
    def test_rate_zero(self):
        j = jet_exp(0.0, 1.7, 3)
        assert np.allclose(j.coeffs, [1.0, 0.0, 0.0, 0.0])

    def test_maclaurin(self):
        j = jet_exp(1.0, 0.0, 3)
        assert np.allclose(j.coeffs, [1.0, 1.0, 0.5, 1.0 / 6.0])

    def test_hand_differentiation(self):
        j = jet_exp(-2.0, 0.5, 2)
        e = math.exp(-1.0)
        assert np.allclose(j.coeffs, [e, -2.0 * e, 2.0 * e])

    @given(st.floats(min_value=-4.0, max_value=4.0), st.floats(min_value=-2.0, max_value=2.0))
    @settings(max_examples=100)
    def test_ode_identity(self, rate, x0):
        j = jet_exp(rate, x0, 5)
        for n in range(5):
            assert (n + 1) * j.coeffs[n + 1] == pytest.approx(rate * j.coeffs[n], abs=1e-300, rel=1e-15)


class TestLogD2:
    def test_affine_log(self):
        assert jet_log_d2(jet_exp(3.0, 0.7, 2)) == pytest.approx(0.0, abs=1e-14)

    def test_cosh(self):
        j = Jet(0.0, np.array([1.0, 0.0, 0.5]))
        assert jet_log_d2(j) == pytest.approx(1.0)

    def test_constant(self):
        assert jet_log_d2(Jet.constant(4.0, 0.0, 2)) == 0.0

    def test_nonpositive_raises(self):
        with pytest.raises(ValueError):
            jet_log_d2(Jet.constant(-1.0, 0.0, 2))


class TestDeterminant:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
    def test_constant_matrix_matches_numpy(self, n):
        rng = np.random.default_rng(n)
        mat = rng.normal(size=(n, n))
        jets = [[Jet.constant(mat[i, j], 0.0, 2) for j in range(n)] for i in range(n)]
        det = jet_det(jets)
        assert det.coeffs[0] == pytest.approx(np.linalg.det(mat), rel=1e-10)
        assert np.allclose(det.coeffs[1:], 0.0)

    def test_exponential_matrix_derivative(self):
        # det [[e^x, 1], [1, e^-x]] = 1 at every x: all jet coefficients vanish
        x0 = 0.3
        m = [
            [jet_exp(1.0, x0, 3), Jet.constant(1.0, x0, 3)],
            [Jet.constant(1.0, x0, 3), jet_exp(-1.0, x0, 3)],
        ]
        det = jet_det(m)
        assert det.coeffs[0] == pytest.approx(0.0, abs=1e-15)


class TestDerivativeAndTruncate:
    def test_derivative_of_exp(self):
        j = jet_exp(2.0, 0.0, 4)
        d = j.derivative()
        assert np.allclose(d.coeffs, 2.0 * j.coeffs[:4])

    def test_deriv_accessor(self):
        j = jet_exp(3.0, 0.0, 3)
        assert j.deriv(2) == pytest.approx(9.0)

    def test_truncate(self):
        j = jet_exp(1.0, 0.0, 4)
        assert j.truncate(2).order == 2
        with pytest.raises(ValueError):
            j.truncate(5)
