from __future__ import annotations

import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp
from scipy.special import digamma as sc_digamma

from xtransform.profile import (EULER_GAMMA, ProfileEvaluationError, ProfileParams,
                                SeriesTruncationError, TaylorProfile, complete_monotonicity_check,
                                digamma, evaluator_for, gamma_alpha, h_polynomials, m_n, phi_eval,
                                profile_bound_q, profile_bound_q_complement, profile_complement,
                                profile_eval, profile_series_eval, sigma_coeffs,
                                subadditivity_check, t_n, t_n_inverse)


def ode_profile(alpha, ws):
    """Independent oracle: integrate F' = 1 - F^alpha directly."""
    sol = solve_ivp(lambda x, y: [1.0 - max(y[0], 0.0) ** alpha], (0.0, max(ws)), [0.0],
                    t_eval=ws, method="DOP853", rtol=1e-13, atol=1e-15)
    return sol.y[0]


def tanh_power_integral(m, xi):
    """Exact int_0^xi tanh^m via I_m = I_{m-2} - tanh^{m-1}/(m-1)."""
    if m == 0:
        return xi
    if m == 1:
        return math.log(math.cosh(xi))
    return tanh_power_integral(m - 2, xi) - math.tanh(xi) ** (m - 1) / (m - 1)


class TestParams:
    def test_dimension_alpha(self):
        assert ProfileParams.for_dimension(3).alpha == pytest.approx(2 / 3)
        assert ProfileParams.for_dimension(1).alpha == 2.0

    @pytest.mark.parametrize("alpha", [0.0, -1.0, math.nan, math.inf])
    def test_invalid_alpha(self, alpha):
        with pytest.raises(ValueError):
            ProfileParams(alpha)

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            ProfileParams.for_dimension(0)


class TestProfileValues:
    @pytest.mark.parametrize("w", [0.0, 0.3, 1.0, 4.0, 12.0])
    def test_closed_forms(self, w):
        assert m_n(1, w) == pytest.approx(math.tanh(w), abs=1e-14)
        assert m_n(2, w) == pytest.approx(-math.expm1(-w), abs=1e-14)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 2 / 3, 0.4, 1.0, 1.5, 2.0, 3.0])
    def test_against_ode(self, alpha):
        ws = np.linspace(0.05, 6.0, 25)
        ref = ode_profile(alpha, ws)
        got = np.array([profile_eval(alpha, w) for w in ws])
        assert np.max(np.abs(got - ref)) < 1e-10

    def test_routes_agree(self):
        for n in (3, 4, 5):
            ev = evaluator_for(ProfileParams.for_dimension(n))
            for w in (1.0, 2.0, 5.0, 15.0):
                assert abs(ev(w, "inverse") - ev(w, "series")) < 1e-12

    def test_small_complement_relative_accuracy(self):
        # 1 - M_3(30) ~ gamma e^{-20}: the complement keeps full relative precision
        c = profile_complement(ProfileParams.for_dimension(3), 30.0)
        series = profile_series_eval(3, 30.0)
        assert c == pytest.approx(series, rel=1e-12)

    def test_zero(self):
        assert profile_eval(0.5, 0.0) == 0.0

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_tiny_w(self, alpha):
        for w in (2.2e-16, 1e-12, 1e-6):
            # F = w - w^(1+alpha)/(1+alpha) + O(w^(1+2 alpha))
            assert profile_eval(alpha, w) == pytest.approx(w - w ** (1 + alpha) / (1 + alpha), rel=1e-5)

    def test_negative_w(self):
        with pytest.raises(ValueError):
            profile_eval(0.5, -1.0)

    @settings(max_examples=60, deadline=None)
    @given(alpha=st.sampled_from([0.25, 0.5, 2 / 3, 1.0, 2.0]),
           w1=st.floats(0.0, 20.0), dw=st.floats(1e-3, 5.0))
    def test_monotone_and_bounded(self, alpha, w1, dw):
        a, b = profile_eval(alpha, w1), profile_eval(alpha, w1 + dw)
        assert 0.0 <= a <= b <= 1.0
        # F itself rounds to 1.0 for large w; strictness shows on 1 - F
        ev = evaluator_for(alpha)
        assert ev.complement(w1) > ev.complement(w1 + dw) > 0.0

    @pytest.mark.parametrize("alpha", [0.5, 2 / 3, 2.0])
    def test_ode_residual(self, alpha):
        h = 1e-4
        for w in (0.2, 1.0, 3.0):
            d = (profile_eval(alpha, w + h) - profile_eval(alpha, w - h)) / (2 * h)
            assert d == pytest.approx(1.0 - profile_eval(alpha, w) ** alpha, abs=1e-8)

    def test_series_route_unavailable_above_one(self):
        ev = evaluator_for(2.0)
        assert ev.series is None
        with pytest.raises(ValueError):
            ev.complement(1.0, "series")


class TestBounds:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 8])
    def test_q_bound_and_cauchy(self, n):
        for w in np.linspace(0.01, 10.0, 40):
            m = m_n(n, w)
            assert m <= profile_bound_q(n, w) + 1e-12
            assert m <= min(w, 1.0)
            if n >= 3:
                assert profile_bound_q(n, w) - m > 0

    def test_q_equality_low_dimensions(self):
        for w in (0.1, 1.0, 3.0):
            assert profile_bound_q(2, w) == pytest.approx(m_n(2, w), abs=1e-14)
            assert profile_bound_q(1, w) == pytest.approx(m_n(1, w), abs=1e-14)

    def test_q_complement(self):
        for n, w in ((3, 0.5), (4, 7.0)):
            assert profile_bound_q_complement(n, w) == pytest.approx(1 - profile_bound_q(n, w))


class TestTn:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_exact_antiderivative(self, n):
        for xi in (0.1, 0.7, 2.0, 5.0):
            exact = n * tanh_power_integral(n - 1, xi)
            assert t_n(n, xi) == pytest.approx(exact, rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_identity(self, n):
        for xi in np.linspace(0.1, 5.0, 12):
            assert abs(m_n(n, t_n(n, xi)) - math.tanh(xi) ** n) < 1e-12

    def test_inverse_round_trip(self):
        for n in (2, 3, 5):
            for w in (1e-3, 0.5, 2.0, 9.0):
                assert t_n(n, t_n_inverse(n, w)) == pytest.approx(w, rel=1e-12)

    def test_negative(self):
        with pytest.raises(ValueError):
            t_n(3, -0.1)


class TestGamma:
    def test_digamma_against_scipy(self):
        for z in (0.1, 0.5, 1.0, 1.5, 3.3, 10.0, 250.0):
            assert digamma(z) == pytest.approx(float(sc_digamma(z)), rel=1e-13, abs=1e-13)

    @pytest.mark.parametrize("alpha", [0.1, 0.2, 0.25, 0.5, 2 / 3, 0.9, 1.0])
    def test_routes(self, alpha):
        assert gamma_alpha(alpha, "quadrature") == pytest.approx(gamma_alpha(alpha, "digamma"),
                                                                 rel=1e-12)

    def test_exact_values(self):
        assert gamma_alpha(1.0) == pytest.approx(1.0, abs=1e-14)
        assert gamma_alpha(0.5) == pytest.approx(2.0 / math.e, rel=1e-13)

    def test_asymptotic_route(self):
        for n in (3, 4, 5):
            ev = evaluator_for(ProfileParams.for_dimension(n))
            assert ev.gamma_asymptotic == pytest.approx(gamma_alpha(2 / n), rel=1e-9)

    def test_small_alpha_limit_is_exp_minus_euler(self):
        # the limit is e^{-gamma_E}; e^{+gamma_E} is off by a factor ~3.17
        assert gamma_alpha(1e-6, "digamma") == pytest.approx(math.exp(-EULER_GAMMA), rel=1e-5)
        assert gamma_alpha(0.0) == pytest.approx(math.exp(-EULER_GAMMA), rel=1e-15)
        assert abs(gamma_alpha(1e-6, "digamma") - math.exp(EULER_GAMMA)) > 1.0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            gamma_alpha(1.5)


class TestSeries:
    def test_leading_coefficients(self):
        for alpha in (0.25, 0.5, 2 / 3):
            s = sigma_coeffs(alpha, 3)
            assert s[0] == 1.0
            assert s[1] == pytest.approx((1 - alpha) / 2, rel=1e-14)

    @pytest.mark.parametrize("alpha", [0.1, 0.25, 2 / 3])
    def test_positivity(self, alpha):
        assert all(c > 0 for c in sigma_coeffs(alpha, 200))

    def test_alpha_one_is_single_term(self):
        s = sigma_coeffs(1.0, 10)
        assert s[0] == 1.0 and all(c == 0 for c in s[1:])

    def test_truncation_error(self):
        with pytest.raises(SeriesTruncationError) as exc:
            profile_series_eval(3, 0.01, K=10)
        assert exc.value.tail_bound > 1e-12

    def test_series_needs_alpha_le_one(self):
        with pytest.raises(ValueError):
            TaylorProfile.build(1.5)


class TestPhi:
    def test_identity_alpha_one(self):
        for t in (0.1, 0.5, 0.9):
            assert phi_eval(1.0, t) == pytest.approx(t, abs=1e-14)

    def test_value_at_one(self):
        assert phi_eval(2 / 3, 1.0) == 1.0

    def test_alpha_two_mobius(self):
        for t in (0.2, 0.6, 0.95):
            assert phi_eval(2.0, t, route="composition") == pytest.approx(2 * t / (1 + t), abs=1e-14)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 2 / 3])
    def test_routes_agree(self, alpha):
        for t in (0.05, 0.3, 0.7, 0.95):
            assert phi_eval(alpha, t, "series") == pytest.approx(phi_eval(alpha, t, "composition"),
                                                                 abs=1e-12)

    def test_slope_at_zero(self):
        for alpha in (0.25, 2 / 3):
            h = 1e-7
            assert phi_eval(alpha, h) / h == pytest.approx(gamma_alpha(alpha), rel=1e-6)

    def test_continuation_negative_t(self):
        alpha = 0.5
        t = -0.4
        direct = sum(c * (gamma_alpha(alpha) * t) ** k for k, c in enumerate(sigma_coeffs(alpha, 300), 1))
        assert phi_eval(alpha, t) == pytest.approx(direct, abs=1e-13)

    def test_domain(self):
        with pytest.raises(ValueError):
            phi_eval(0.5, 1.2)
        with pytest.raises(SeriesTruncationError):
            phi_eval(0.5, 0.99999, route="series")


class TestHPolynomials:
    def test_first_two(self):
        alpha = 0.3
        hs = h_polynomials(alpha, 1)
        assert hs[0].coeffs == (-1.0,)
        assert hs[1].coeffs == pytest.approx((1 - alpha, -(1 - 2 * alpha)))

    @pytest.mark.parametrize("alpha", [sp.Rational(1, 2), sp.Rational(2, 3), sp.Rational(3, 2)])
    def test_against_symbolic_derivatives(self, alpha):
        # oracle: differentiate g(F) along F' = 1 - F^alpha symbolically
        F = sp.symbols("F", positive=True)
        deriv = 1 - F**alpha
        expr = deriv
        hs = h_polynomials(float(alpha), 4)
        for k in range(5):
            expr = sp.diff(expr, F) * deriv  # F^{(k+2)} as a function of F
            f_expr = sp.lambdify(F, expr)
            for Fv in (0.2, 0.5, 0.8):
                t = Fv ** float(alpha)
                pred = float(alpha) * t * (1 - t) * hs[k](t) / Fv ** (k + 1)
                assert pred == pytest.approx(float(f_expr(Fv)), rel=1e-10)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 2 / 3, 1.0])
    def test_signs(self, alpha):
        ts = np.linspace(0, 1, 201)[:-1]
        for h in h_polynomials(alpha, 8):
            assert np.all((-1) ** (h.k + 1) * h(ts) >= -1e-12)

    def test_associated_certificate(self):
        for h in h_polynomials(0.5, 6)[1:]:
            coef = h.associated() * (-1) ** (h.k + 1)
            assert np.all(coef >= -1e-12)

    def test_sign_change_above_one(self):
        h1 = h_polynomials(1.5, 1)[1]
        assert h1(0.0) < 0 < h1(0.9)


class TestMonotonicity:
    @pytest.mark.parametrize("alpha", [0.25, 0.5, 2 / 3, 1.0])
    def test_completely_monotone(self, alpha):
        rep = complete_monotonicity_check(alpha, np.linspace(0, 5, 21), k_max=8)
        assert rep.passed and not rep.details

    def test_violation_above_one(self):
        rep = complete_monotonicity_check(1.5, np.linspace(0, 5, 21), k_max=8)
        assert not rep.passed
        assert any(d["k"] == 3 for d in rep.details)

    def test_subadditivity(self):
        for alpha in (0.25, 2 / 3, 1.0):
            assert subadditivity_check(alpha, np.linspace(0, 5, 20)).passed

    def test_bad_input(self):
        with pytest.raises(ValueError):
            complete_monotonicity_check(0.5, [], k_max=3)


def test_w_of_m_quadrature_oracle():
    # w(M) = int_0^M ds / (1 - s^alpha), inverted by the evaluator
    alpha = 2 / 3
    for M in (0.125, 0.6, 0.95):
        w, _ = quad(lambda s: 1.0 / (1.0 - s**alpha), 0.0, M, epsabs=1e-14, epsrel=1e-13)
        assert profile_eval(alpha, w) == pytest.approx(M, abs=1e-11)


def test_evaluation_error_carries_bracket():
    err = ProfileEvaluationError("x", bracket=(0.0, 1.0))
    assert err.bracket == (0.0, 1.0)
