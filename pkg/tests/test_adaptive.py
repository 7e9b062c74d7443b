"""Selection rules: threshold sequence, collection bounds, penalties,
Lepski contrast — each against an independent oracle."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ivfun import (ConfigurationError, M_hat, M_upper_h, OperatorSpec,
                   StructuralFunction, a_n, assemble, custom, delta_hat,
                   deterministic_penalty, generate, inject, pen_hat,
                   plugin_estimate, point_eval, reduction_gap, select,
                   select_partial, varsigma_hat_sq, weighted_avg_deriv)


def a_n_oracle(n):
    """High-precision reimplementation of the threshold sequence."""
    with mpmath.workdps(50):
        n = mpmath.mpf(n)
        val = n ** (1 - 1 / mpmath.log(2 + mpmath.log(n))) / (1 + mpmath.log(n))
        return float(val)


class TestThresholdSequence:
    def test_at_one(self):
        assert a_n(1) == pytest.approx(1.0)

    @pytest.mark.parametrize("n", [2, 10, 100, 1000, 10**4, 10**6])
    def test_matches_high_precision_oracle(self, n):
        assert a_n(n) == pytest.approx(a_n_oracle(n), rel=1e-13)

    def test_frozen_value_at_100(self):
        assert a_n(100) == pytest.approx(1.5559889597069094, abs=1e-12)

    def test_slow_growth(self):
        # grows without bound but slower than any power of n
        assert a_n(10**6) > a_n(10**4) > a_n(100)
        assert a_n(10**6) < (10**6) ** 0.5

    def test_error(self):
        with pytest.raises(ConfigurationError):
            a_n(0)


class TestCollectionBounds:
    def test_point_eval_hits_fourth_root_cap(self):
        # point-eval coefficients are bounded by sqrt(2) <= n [h]_1^2 = n
        h = point_eval(0.3, 512)
        assert M_upper_h(h, 10**4) == 10
        assert M_upper_h(h, 256) == 4

    def test_coefficient_condition_binds(self):
        h = custom([1.0, 5.0, 0.1, 0.1])
        # m = 2 needs 25 <= n; fails at n = 16, passes at n = 256 (cap 4)
        assert M_upper_h(h, 16) == 1
        assert M_upper_h(h, 256) == 4

    def test_zero_leading_coefficient_fallback(self):
        # [h]_1 = 0: the reference is the first nonzero coefficient
        h = weighted_avg_deriv(512)
        mh = M_upper_h(h, 10**4)
        ref = h.coeffs[2] ** 2
        assert mh >= 1
        assert all(h.coeffs[j] ** 2 <= 10**4 * ref for j in range(mh))

    def test_representer_length_caps(self):
        assert M_upper_h(point_eval(0.3, 3), 10**8) == 3

    def test_zero_representer_rejected(self):
        with pytest.raises(ConfigurationError):
            M_upper_h(custom([0.0, 0.0]), 100)

    def test_m_hat_stops_at_singular_block(self):
        n = 10**4
        h = point_eval(0.3, 16)
        mh = M_upper_h(h, n)
        diag = np.ones(mh)
        diag[2] = 1e-15  # third block effectively singular
        system = inject(np.diag(diag), np.zeros(mh), n)
        assert M_hat(system, h, n) == 2

    def test_m_hat_full_collection_when_well_posed(self):
        n = 10**4
        h = point_eval(0.3, 16)
        mh = M_upper_h(h, n)
        system = inject(np.eye(mh), np.zeros(mh), n)
        # m^3 * 1 * max h^2 <= 1000 * 2 but a_n(1e4) ~ 2.6; the cube wins
        expected = mh
        for m in range(2, mh + 1):
            peak = float(np.max(h.coeffs[:m] ** 2))
            if m**3 * peak > a_n(n):
                expected = m - 1
                break
        assert M_hat(system, h, n) == expected

    def test_m_hat_needs_enough_dimensions(self):
        h = point_eval(0.3, 16)
        system = inject(np.eye(2), np.zeros(2), 10**4)
        with pytest.raises(ConfigurationError):
            M_hat(system, h)


class TestPenaltyPieces:
    def test_varsigma_trivial(self):
        # ghat = 0 and mean Y^2 = 1 -> exactly 74
        system = inject(np.eye(3), np.zeros(3), 10)
        assert varsigma_hat_sq(system, 1.0, 3) == pytest.approx(74.0)

    def test_varsigma_diagonal(self):
        system = inject(np.diag([1.0, 0.5]), np.array([0.2, 0.1]), 10)
        # solve norms: m=1: 0.04; m=2: 0.04 + 0.04 = 0.08
        assert varsigma_hat_sq(system, 0.0, 1) == pytest.approx(74.0 * 0.04)
        assert varsigma_hat_sq(system, 0.0, 2) == pytest.approx(74.0 * 0.08)

    def test_delta_diagonal(self):
        system = inject(np.diag([1.0, 0.5]), np.zeros(2), 10)
        h = custom([1.0, 1.0])
        assert delta_hat(system, h, 1) == pytest.approx(1.0)
        assert delta_hat(system, h, 2) == pytest.approx(1.0 + 4.0)

    def test_delta_nondecreasing_in_m(self):
        rng = np.random.default_rng(8)
        mat = rng.normal(size=(5, 5)) + 3 * np.eye(5)
        system = inject(mat, np.zeros(5), 100)
        h = custom(list(rng.normal(size=5)))
        vals = [delta_hat(system, h, m) for m in range(1, 6)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_pen_closed_form(self):
        n = 100
        system = inject(np.diag([1.0, 0.5]), np.array([0.2, 0.1]), n)
        h = custom([1.0, 1.0])
        expect = 204.0 * (74.0 * (1.0 + 0.08)) * (1 + math.log(n)) / n * 5.0
        assert pen_hat(system, 1.0, h, 2) == pytest.approx(expect)


def brute_force_select(system, y_sq_mean, h):
    """Independent reimplementation of the penalized-contrast rule."""
    n = system.n
    mhat = M_hat(system, h, n)
    lhat = np.array([plugin_estimate(system, h, m)[0] for m in range(1, mhat + 1)])
    pen = np.array([pen_hat(system, y_sq_mean, h, m) for m in range(1, mhat + 1)])
    psi = np.array([
        max((lhat[mp] - lhat[m]) ** 2 - pen[mp] for mp in range(m, mhat))
        if m < mhat else -pen[mhat - 1]
        for m in range(mhat)
    ])
    # the m' = m term of the contrast is always -pen_m
    psi = np.maximum(psi, -pen)
    crit = psi + pen
    mstar = int(np.argmin(crit)) + 1
    return mstar, lhat[mstar - 1], psi, pen


class TestSelect:
    def sample_system(self, n=800, seed=5):
        spec = OperatorSpec("pp", 1.0, 0.25, 8)
        phi = StructuralFunction.power_law(2.0, 2.6)
        sample = generate(spec, phi, 0.5, n, seed)
        h = point_eval(0.3)
        system = assemble(sample, M_upper_h(h, n))
        return sample, system, h

    @pytest.mark.parametrize("seed", [1, 5, 23, 77])
    def test_matches_brute_force(self, seed):
        sample, system, h = self.sample_system(seed=seed)
        trace = select(system, sample, h)
        mstar, lstar, psi, pen = brute_force_select(system, sample.y_sq_mean(), h)
        assert trace.mhat == mstar
        assert trace.lhat_mhat == pytest.approx(lstar, rel=1e-12)
        assert np.allclose(trace.psi, psi, rtol=1e-12, atol=1e-12)
        assert np.allclose(trace.pen, pen, rtol=1e-12)

    def test_reduction_inequality(self):
        for seed in range(10):
            sample, system, h = self.sample_system(seed=seed)
            trace = select(system, sample, h)
            assert reduction_gap(trace) >= -1e-9

    def test_trace_to_dict(self):
        sample, system, h = self.sample_system()
        d = select(system, sample, h).to_dict()
        assert d["mhat"] >= 1 and len(d["per_m"]) == d["Mhat"]

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6), st.floats(0.1, 10.0))
    def test_scale_equivariance(self, seed, c):
        sample, system, h = self.sample_system(n=400, seed=seed)
        t1 = select(system, sample, h)
        scaled = inject(system.that, c * system.ghat, system.n)
        t2 = select(scaled, c**2 * sample.y_sq_mean(), h)
        assert t2.mhat == t1.mhat
        assert t2.lhat_mhat == pytest.approx(c * t1.lhat_mhat, rel=1e-9, abs=1e-12)
        assert np.array_equal(t1.thresholded, t2.thresholded)


class TestDeterministicPenalty:
    def spec(self):
        return OperatorSpec("pp", 1.0, 0.13, 40)

    def test_closed_forms(self):
        spec = self.spec()
        phi = StructuralFunction.power_law(2.0, 2.6, jmax=64)
        h = point_eval(0.3, 64)
        n = 1000
        pen = deterministic_penalty(spec, phi, 0.5, h, n)
        upsilon = spec.upsilon()
        # E[Y^2] = sum s_j^2 phi_j^2 + sigma^2
        y_sq = float(upsilon[:40] @ phi.coeffs[:40] ** 2) + 0.25
        delta1 = h.coeffs[0] ** 2 / upsilon[0]
        assert pen.delta[0] == pytest.approx(delta1)
        assert pen.varsigma_sq[0] == pytest.approx(74.0 * (y_sq + phi.coeffs[0] ** 2))
        expect = 24.0 * pen.varsigma_sq[0] * (1 + math.log(n)) / n * delta1
        assert pen.pen[0] == pytest.approx(expect)

    def test_sandwich_grid(self):
        phi = StructuralFunction.power_law(2.0, 2.6, jmax=64)
        reps = [point_eval(0.3, 64), weighted_avg_deriv(64)]
        for regime, a, scale in [("pp", 0.5, 0.04), ("pp", 2.0, 0.3),
                                 ("pe", 0.5, 0.4), ("ep", 1.0, 0.1)]:
            spec = OperatorSpec(regime, a, scale, 40, D=2.0)
            for n in (100, 10**4, 10**6):
                for h in reps:
                    pen = deterministic_penalty(spec, phi, 0.5, h, n)
                    assert pen.Mminus <= pen.Mn <= pen.Mplus <= pen.Mh

    def test_needs_wide_operator(self):
        spec = OperatorSpec("pp", 1.0, 0.25, 4)
        phi = StructuralFunction.power_law(2.0, 2.6)
        with pytest.raises(ConfigurationError):
            deterministic_penalty(spec, phi, 0.5, point_eval(0.3), 10**6)

    def test_degenerate_model_rejected(self):
        spec = self.spec()
        phi = StructuralFunction(np.zeros(64),
                                 np.arange(1, 65, dtype=float) ** 4, rho=1.0)
        with pytest.raises(ConfigurationError):
            deterministic_penalty(spec, phi, 0.0, point_eval(0.3, 64), 100)

    def test_select_partial_mechanics(self):
        spec = self.spec()
        phi = StructuralFunction.power_law(2.0, 2.6, jmax=64)
        h = point_eval(0.3, 64)
        sample = generate(spec, phi, 0.5, 500, 2)
        pen = deterministic_penalty(spec, phi, 0.5, h, sample.n)
        system = assemble(sample, max(pen.Mn, 1))
        trace = select_partial(system, pen, h)
        assert 1 <= trace.mhat <= pen.Mn
        assert trace.mode == "partial"
        assert reduction_gap(trace) >= -1e-9
