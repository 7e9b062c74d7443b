"""Basis evaluation and representer coefficients against quadrature oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ivfun import (ConfigurationError, DomainError, average, custom, eval_basis,
                   functional_of, point_eval, representer_coeffs,
                   weighted_avg_deriv)


def gauss_quad(f, lo, hi, nodes=400):
    """Gauss-Legendre quadrature on [lo, hi]; exact to machine precision
    for the smooth trigonometric integrands used here."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    return 0.5 * (hi - lo) * float(w @ f(t))


class TestEvalBasis:
    def test_constant_first_element(self):
        assert eval_basis(0.37, 1) == pytest.approx([1.0])

    def test_known_values(self):
        # e_2(t) = sqrt(2) cos(2 pi t), e_3(t) = sqrt(2) sin(2 pi t)
        vals = eval_basis(0.25, 3)
        assert vals == pytest.approx([1.0, 0.0, math.sqrt(2.0)], abs=1e-12)
        vals = eval_basis(0.5, 5)
        # e_4 = sqrt(2) cos(4 pi t) -> sqrt(2) at t = 1/2; e_5 -> 0
        assert vals == pytest.approx([1.0, -math.sqrt(2.0), 0.0, math.sqrt(2.0), 0.0],
                                     abs=1e-12)

    def test_orthonormality(self):
        # <e_j, e_k> = delta_jk by quadrature
        m = 9
        gram = np.zeros((m, m))
        for j in range(m):
            for k in range(m):
                gram[j, k] = gauss_quad(
                    lambda t: eval_basis(t, m)[:, j] * eval_basis(t, m)[:, k], 0, 1)
        assert np.allclose(gram, np.eye(m), atol=1e-12)

    def test_vector_shape(self):
        out = eval_basis(np.linspace(0, 1, 7), 5)
        assert out.shape == (7, 5)
        assert np.allclose(out[3], eval_basis(np.linspace(0, 1, 7)[3], 5))

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            eval_basis(1.2, 3)
        with pytest.raises(DomainError):
            eval_basis(0.5, 0)

    @given(st.floats(0.0, 1.0), st.integers(1, 64))
    def test_bounded_by_sqrt2(self, t, m):
        assert np.all(np.abs(eval_basis(t, m)) <= math.sqrt(2.0) + 1e-12)


class TestRepresenters:
    def test_point_eval_is_basis_row(self):
        h = point_eval(0.3, 20)
        assert np.allclose(h.coeffs, eval_basis(0.3, 20))
        assert h.decay_s == 0.0

    @pytest.mark.parametrize("b", [0.25, 0.5, 0.75])
    def test_average_matches_quadrature(self, b):
        h = average(b, 50)
        for j in range(50):
            oracle = gauss_quad(lambda t: eval_basis(t, 50)[:, j], 0.0, b)
            assert h.coeffs[j] == pytest.approx(oracle, abs=1e-12)

    def test_average_known_coefficient(self):
        # [h]_3 for b = 1/2: (1 - cos(pi)) / (sqrt(2) pi) = sqrt(2)/pi
        h = average(0.5, 8)
        assert h.coeffs[2] == pytest.approx(math.sqrt(2.0) / math.pi, abs=1e-12)
        assert h.coeffs[0] == pytest.approx(0.5)

    def test_weighted_avg_deriv_matches_quadrature(self):
        h = weighted_avg_deriv(50)
        for j in range(50):
            oracle = gauss_quad(
                lambda t: eval_basis(t, 50)[:, j] * 4.0 * (1.0 - 2.0 * t), 0.0, 1.0)
            assert h.coeffs[j] == pytest.approx(oracle, abs=1e-12)

    def test_weighted_avg_deriv_pattern(self):
        h = weighted_avg_deriv(7)
        assert h.coeffs[0] == 0.0
        assert h.coeffs[1] == 0.0  # cosine slots vanish
        assert h.coeffs[2] == pytest.approx(4.0 * math.sqrt(2.0) / math.pi)
        assert h.coeffs[4] == pytest.approx(2.0 * math.sqrt(2.0) / math.pi)

    def test_dispatcher(self):
        h = representer_coeffs("point", 16, t0=0.3)
        assert np.allclose(h.coeffs, point_eval(0.3, 16).coeffs)
        with pytest.raises(ConfigurationError):
            representer_coeffs("nope", 16)

    def test_custom_passthrough(self):
        h = custom([1.0, -2.0, 3.0], decay_s=1.5)
        assert h.coeffs.tolist() == [1.0, -2.0, 3.0]
        assert h.decay_s == 1.5

    def test_validation(self):
        with pytest.raises(DomainError):
            point_eval(1.5)
        with pytest.raises(DomainError):
            average(0.0)
        with pytest.raises(ConfigurationError):
            custom([])
        with pytest.raises(ConfigurationError):
            custom([1.0, math.nan])


class TestFunctionalOf:
    def test_truncated_inner_product(self):
        h = custom([1.0, 2.0, 3.0])
        assert functional_of([1.0, 1.0], h) == pytest.approx(3.0)
        assert functional_of([1.0, 1.0, 1.0, 9.0], h) == pytest.approx(6.0)

    def test_point_eval_reproduces_series(self):
        coeffs = np.array([0.5, -0.2, 0.1, 0.05])
        h = point_eval(0.41, 4)
        direct = float(eval_basis(0.41, 4) @ coeffs)
        assert functional_of(coeffs, h) == pytest.approx(direct, abs=1e-14)

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=10))
    def test_linear_in_phi(self, coeffs):
        h = average(0.5, 10)
        one = functional_of(np.asarray(coeffs), h)
        two = functional_of(2.0 * np.asarray(coeffs), h)
        assert two == pytest.approx(2.0 * one, rel=1e-12, abs=1e-12)
