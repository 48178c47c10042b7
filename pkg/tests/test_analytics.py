"""Closed-form engine: examples, algebraic identities, and grid invariants."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from agehawkes import analytics
from agehawkes.analytics import (
    ModelParams,
    activity_limits,
    alpha_m,
    critical_taylor,
    discriminant,
    discriminant_alt,
    finite_difference,
    proof_polynomials,
    sensitivity,
    sensitivity_ab,
    sensitivity_derivative,
    stationary_state,
    steady_activity,
    steady_activity_fixed_point,
)
from agehawkes.errors import (
    BracketFailureError,
    DivergentError,
    InvalidParamsError,
)

DELTA = 0.005


def steady(mu, alpha, delta):
    return steady_activity(ModelParams(mu, alpha, delta))


class TestModelParams:
    def test_beta_accessor(self):
        assert ModelParams(2.0, 1.0, 0.005).beta == 0.01

    def test_critical_constant(self):
        assert ModelParams.ALPHA_CRITICAL == 1.0

    @pytest.mark.parametrize("bad", [(-1, 0, 0), (0, -1, 0), (0, 0, -1), (math.nan, 0, 0)])
    def test_rejects_bad_values(self, bad):
        with pytest.raises(InvalidParamsError):
            ModelParams(*bad)


class TestSteadyActivity:
    def test_no_refractoriness_subcritical(self):
        assert steady(1.0, 0.5, 0.0) == pytest.approx(2.0, abs=0)

    def test_unconnected(self):
        assert steady(2.0, 0.0, 0.005) == pytest.approx(1.0 / (0.005 + 0.5), rel=1e-15)

    def test_general_branch_matches_fixed_point_oracle(self):
        # Independent oracle: iterate a -> 1/(delta + 1/(mu + alpha*a)).
        oracle = steady_activity_fixed_point(2.0, 1.0, 0.005)
        closed = steady(2.0, 1.0, 0.005)
        assert closed == pytest.approx(oracle, rel=1e-12)
        assert closed == pytest.approx(19.024984394500777, rel=1e-13)

    def test_saturation_at_large_input(self):
        a = steady(1e9, 0.5, 0.005)
        assert 199.9 < a < 200.0

    def test_divergent_without_refractoriness_at_criticality(self):
        for alpha in (1.0, 1.5):
            with pytest.raises(DivergentError):
                steady(1.0, alpha, 0.0)

    def test_silent_network(self):
        assert steady(0.0, 0.5, 0.005) == 0.0
        assert steady(0.0, 0.0, 0.005) == 0.0

    def test_self_sustained_above_criticality_without_input(self):
        # mu = 0, alpha > 1: the formula picks the self-sustained branch.
        assert steady(0.0, 2.0, 0.005) == pytest.approx(100.0, rel=1e-12)

    def test_strictly_increasing_in_mu(self):
        for alpha in (0.0, 0.5, 1.0, 2.0):
            values = [steady(mu, alpha, DELTA) for mu in np.geomspace(0.01, 1e4, 40)]
            assert all(b > a for a, b in zip(values, values[1:]))

    def test_below_refractory_ceiling(self):
        for alpha in (0.0, 0.5, 1.0, 2.0):
            for mu in np.geomspace(0.01, 1e6, 30):
                assert steady(mu, alpha, DELTA) < 1.0 / DELTA

    def test_continuous_across_alpha_zero(self):
        assert steady(2.0, 1e-12, DELTA) == pytest.approx(steady(2.0, 0.0, DELTA), rel=1e-10)

    def test_continuous_across_delta_zero(self):
        assert steady(1.0, 0.5, 1e-8) == pytest.approx(steady(1.0, 0.5, 0.0), rel=1e-6)

    def test_stable_form_equals_quadratic_root_form(self):
        # The conjugate rewrite must match the direct quadratic-root form; below
        # alpha ~ 0.05 the direct form's own cancellation exceeds the tolerance,
        # which is the reason the rewrite exists.
        worst = 0.0
        for alpha in np.linspace(0.1, 2.0, 21):
            for beta in np.linspace(0.001, 1.0, 21):
                mu = beta / DELTA
                root = math.sqrt(discriminant(alpha, beta))
                direct = 1.0 / DELTA - (1.0 + alpha + beta - root) / (2.0 * alpha * DELTA)
                worst = max(worst, abs(direct - steady(mu, alpha, DELTA)) / direct)
        assert worst <= 1e-12


class TestStationaryState:
    def test_interaction_value_exact(self):
        state = stationary_state(ModelParams(1.0, 0.5, 0.0))
        assert state.x_inf == 0.5 * state.a_inf
        assert state.x_inf == pytest.approx(1.0, abs=0)

    def test_self_consistency_residual(self):
        for mu, alpha in ((2.0, 1.0), (0.05, 2.0), (50.0, 1 / 3)):
            state = stationary_state(ModelParams(mu, alpha, DELTA))
            residual = abs(1.0 - state.a_inf * (DELTA + 1.0 / (mu + state.x_inf)))
            assert residual <= 1e-12

    def test_density_closure(self):
        state = stationary_state(ModelParams(2.0, 0.0, 0.005))
        for s in (0.0, 0.003, 0.005, 0.1, 1.0):
            expected = 1.9801980198019802 * math.exp(-2.0 * max(s - 0.005, 0.0))
            assert state.density(s) == pytest.approx(expected, rel=1e-12)

    def test_density_normalizes_by_quadrature(self):
        for mu, alpha in ((2.0, 0.0), (2.0, 1.0), (0.5, 2.0)):
            state = stationary_state(ModelParams(mu, alpha, DELTA))
            body, _ = quad(state.density, 0.0, DELTA)
            tail, _ = quad(state.density, DELTA, np.inf)
            assert abs(body + tail - 1.0) <= 1e-10

    def test_rejects_silent_network(self):
        with pytest.raises(InvalidParamsError):
            stationary_state(ModelParams(0.0, 0.5, DELTA))


class TestSensitivity:
    def test_limit_values_without_load(self):
        assert sensitivity_ab(0.5, 0.0) == pytest.approx(2.0, rel=1e-15)
        assert sensitivity_ab(2.0, 0.0) == pytest.approx(0.5, rel=1e-15)

    def test_frozen_value_and_finite_difference(self):
        params = ModelParams(2.0, 1.0, 0.005)
        sig = sensitivity(params)
        assert sig == pytest.approx(4.518730502861169, rel=1e-13)
        fd = finite_difference(lambda m: steady(m, 1.0, 0.005), 2.0, 1e-6)
        assert sig == pytest.approx(fd, rel=1e-6)

    def test_matches_the_ratio_form_for_positive_alpha(self):
        # -1/(2a) + (1+b+a)/(2a sqrt(D)) is the reference expression.
        for alpha in (0.1, 0.5, 1.0, 1.7):
            for beta in (0.001, 0.2, 0.9):
                root = math.sqrt(discriminant(alpha, beta))
                reference = -1.0 / (2 * alpha) + (1 + beta + alpha) / (2 * alpha * root)
                assert sensitivity_ab(alpha, beta) == pytest.approx(reference, rel=1e-12)

    def test_alpha_zero_limit(self):
        for beta in (0.0, 0.01, 0.3, 2.0):
            assert sensitivity_ab(0.0, beta) == pytest.approx(1.0 / (1 + beta) ** 2, rel=1e-15)

    def test_always_positive(self):
        for alpha in np.linspace(0.0, 2.0, 15):
            for beta in np.linspace(0.001, 1.0, 15):
                assert sensitivity_ab(alpha, beta) > 0.0

    def test_diverges_at_the_critical_pole(self):
        with pytest.raises(DivergentError):
            sensitivity_ab(1.0, 0.0)

    def test_depends_only_on_the_product_mu_delta(self):
        # Exact test with power-of-two rescalings so mu*delta is unchanged.
        base = sensitivity(ModelParams(2.0, 0.7, 0.005))
        for c in (0.5, 2.0, 4.0, 8.0):
            assert sensitivity(ModelParams(2.0 * c, 0.7, 0.005 / c)) == base

    def test_finite_difference_grid(self):
        for alpha in np.linspace(0.05, 2.0, 8):
            for beta in np.linspace(0.001, 0.45, 8):
                mu = beta / DELTA
                h = 1e-6 * max(mu, 1.0)
                fd = finite_difference(lambda m: steady(m, alpha, DELTA), mu, h)
                assert sensitivity(ModelParams(mu, alpha, DELTA)) == pytest.approx(fd, rel=1e-6)


class TestSensitivityDerivative:
    def test_limit_at_alpha_zero(self):
        assert sensitivity_derivative(0.0, 0.0) == 1.0
        assert sensitivity_derivative(0.0, 0.5) == 0.0
        assert sensitivity_derivative(1e-9, 0.25) == pytest.approx(
            (1 - 0.5) / 1.25**4, rel=1e-12
        )

    def test_negative_at_and_beyond_criticality(self):
        for alpha in (1.0, 1.5, 2.0):
            assert sensitivity_derivative(alpha, 0.01) < 0.0

    def test_frozen_value_and_finite_difference(self):
        g = sensitivity_derivative(0.5, 0.01)
        assert g == pytest.approx(3.174421839664017, rel=1e-13)
        fd = finite_difference(lambda a: sensitivity_ab(a, 0.01), 0.5, 1e-6)
        assert g == pytest.approx(fd, rel=1e-6)

    def test_hybrid_forms_agree_in_the_overlap(self):
        for alpha in np.linspace(0.02, 0.3, 20):
            for beta in np.linspace(0.0, 1.0, 20):
                direct = analytics._slope_numerator_direct(alpha, beta)
                conj = (
                    -4.0 * alpha**2 * analytics._stationary_cubic(alpha, beta)
                    / analytics._slope_numerator_conjugate_factor(alpha, beta)
                )
                scale = max(abs(direct), abs(conj), 1e-300)
                assert abs(direct - conj) / scale <= 1e-8

    def test_conjugate_factor_positive_below_one_half(self):
        # Safety condition for the small-alpha evaluation path.
        for alpha in np.linspace(0.0, 0.45, 30):
            for beta in np.linspace(0.0, 1.0, 30):
                assert analytics._slope_numerator_conjugate_factor(alpha, beta) > 0.0


class TestProofPolynomials:
    def test_double_root_point(self):
        p = proof_polynomials(1.0, 0.0)
        assert p.discriminant == 0.0
        assert p.stationary_cubic == pytest.approx(0.0, abs=1e-15)
        assert math.isnan(p.slope)

    def test_conjugate_degenerate_zero(self):
        p = proof_polynomials(20.0 / 27.0, 1.0 / 27.0)
        assert abs(p.slope_numerator_conjugate) < 1e-12
        # Multiplicity two: positive on both sides of the zero.
        for eps in (-1e-3, 1e-3):
            q = proof_polynomials(20.0 / 27.0 + eps, 1.0 / 27.0)
            assert q.slope_numerator_conjugate > 0.0

    def test_product_identity_point(self):
        p = proof_polynomials(0.4, 0.1)
        lhs = p.slope_numerator * p.slope_numerator_conjugate
        rhs = -4.0 * 0.4**2 * p.stationary_cubic
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_identities_on_grid(self):
        alphas = np.linspace(0.01, 2.0, 20)
        betas = np.linspace(0.001, 1.0, 20)
        a, b = np.meshgrid(alphas, betas)
        d1, d2 = discriminant(a, b), discriminant_alt(a, b)
        assert np.max(np.abs(d1 - d2) / np.abs(d1)) <= 1e-12
        quad_term = 1 + 2 * b + b * b + 2 * a * b + a * a
        lhs = 9 * (1 + b + a) ** 2 * d1 - 9 * quad_term**2
        assert np.max(np.abs(lhs + 36 * a * a) / (36 * a * a)) <= 1e-8
        for alpha in alphas:
            for beta in betas:
                p = proof_polynomials(alpha, beta)
                lhs = p.slope_numerator * p.slope_numerator_conjugate
                rhs = -4.0 * alpha**2 * p.stationary_cubic
                assert abs(lhs - rhs) <= 1e-10 * max(abs(rhs), 1e-300)

    def test_constants(self):
        assert proof_polynomials(0.1, 0.1).BETA_DOUBLE_ZERO == pytest.approx(1 / 27)
        assert proof_polynomials(0.1, 0.1).ALPHA_DOUBLE_ZERO == pytest.approx(20 / 27)


class TestAlphaM:
    def test_zero_at_and_beyond_half(self):
        for beta in (0.5, 0.6, 0.7, 1.0, 10.0):
            assert alpha_m(beta) == 0.0

    def test_near_critical_for_tiny_load(self):
        assert 0.99 < alpha_m(1e-6) < 1.0

    def test_reference_load_value(self):
        assert alpha_m(0.01) == pytest.approx(0.973, abs=1e-3)
        assert alpha_m(0.01) == pytest.approx(0.9731055082900971, abs=1e-9)

    def test_monotone_and_interior(self):
        betas = np.linspace(0.01, 0.49, 30)
        values = [alpha_m(b) for b in betas]
        assert all(0.0 < v < 1.0 for v in values)
        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_stationarity_residual(self):
        for beta in np.linspace(0.01, 0.49, 15):
            assert abs(sensitivity_derivative(alpha_m(beta), beta)) <= 1e-10

    def test_grid_argmax_ordering(self):
        # Brute-force oracle: argmax of the sensitivity over a 0.001-step grid.
        alphas = np.arange(0.0, 1.2 + 1e-12, 1e-3)
        argmax = {}
        for beta in (0.2, 0.4):
            sigmas = [sensitivity_ab(a, beta) for a in alphas]
            argmax[beta] = alphas[int(np.argmax(sigmas))]
            assert abs(argmax[beta] - alpha_m(beta)) <= 1e-3
        assert argmax[0.2] > argmax[0.4]
        assert alpha_m(0.2) > alpha_m(0.4)

    def test_collapses_to_zero_just_below_half(self):
        assert alpha_m(0.5 - 1e-13) == 0.0

    def test_beta_zero_has_no_finite_optimum(self):
        with pytest.raises(DivergentError):
            alpha_m(0.0)

    def test_rejects_negative(self):
        with pytest.raises(InvalidParamsError):
            alpha_m(-0.1)


class TestLimitsAndTaylor:
    def test_activity_limits_examples(self):
        assert activity_limits(2.0, 0.005) == (100.0, 200.0)
        assert activity_limits(0.5, 0.005) == (0.0, 200.0)
        assert activity_limits(1.0, 0.01) == (0.0, 100.0)
        assert activity_limits(0.0, 0.01) == (0.0, 100.0)

    def test_activity_limits_rejects_bad_delta(self):
        with pytest.raises(InvalidParamsError):
            activity_limits(1.0, 0.0)

    def test_limits_bracket_the_activity(self):
        low, high = activity_limits(2.0, DELTA)
        assert low < steady(0.001, 2.0, DELTA) < high
        assert low < steady(1e5, 2.0, DELTA) < high

    def test_critical_taylor_value(self):
        assert critical_taylor(4e-4, 0.01) == pytest.approx(0.2, rel=1e-15)

    def test_critical_taylor_is_the_leading_order(self):
        ratio = steady(1e-6, 1.0, 0.005) / critical_taylor(1e-6, 0.005)
        assert abs(ratio - 1.0) <= 1e-2

    def test_square_root_scaling_at_criticality(self):
        mus = np.array([1e-5, 1e-4, 1e-3])
        acts = [steady(m, 1.0, 0.005) for m in mus]
        slope = np.polyfit(np.log(mus), np.log(acts), 1)[0]
        assert slope == pytest.approx(0.5, abs=0.02)

    def test_critical_taylor_rejects_bad_inputs(self):
        with pytest.raises(InvalidParamsError):
            critical_taylor(0.0, 0.01)
        with pytest.raises(InvalidParamsError):
            critical_taylor(1.0, 0.0)


class TestBracketMachinery:
    def test_bracket_failure_is_detectable(self, monkeypatch):
        # Forcing an impossible bracket through the private surface documents
        # the failure mode the public API can never reach.
        monkeypatch.setattr(analytics, "_slope_numerator_direct", lambda a, b: 1.0)
        with pytest.raises(BracketFailureError):
            alpha_m(0.2)
