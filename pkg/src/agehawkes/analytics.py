"""Closed-form steady state and stimulus sensitivity of the mean-field model.

A network of spiking units is described by three parameters: the spontaneous
input rate ``mu``, the mean connectivity strength ``alpha``, and the hard
refractory period ``delta``.  In the mean-field limit the stationary firing
rate ``a_inf`` solves

    a_inf * (delta + 1/(mu + alpha*a_inf)) = 1,

which this module evaluates in closed form, together with the stimulus
sensitivity ``sigma = d a_inf / d mu``, its derivative in ``alpha``, and the
connectivity ``alpha_m`` at which the sensitivity peaks.  Everything reduces
to the dimensionless pair ``(alpha, beta)`` with ``beta = mu * delta``; the
criticality threshold is ``alpha == 1``.

All functions are pure and operate on 64-bit floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import BracketFailureError, DivergentError, InvalidParamsError

#: Connectivity strength at which the non-refractory system's activity diverges.
ALPHA_CRITICAL = 1.0

# Direct evaluation of the sensitivity-slope numerator cancels catastrophically
# below this alpha; switch to the conjugate form there (safe: the conjugate
# factor has no zeros for alpha < 1/2).
_CONJUGATE_FORM_ALPHA = 0.1

# Below this alpha the slope is returned as its exact alpha -> 0 limit.
_SLOPE_LIMIT_ALPHA = 1e-8

_BISECTION_XTOL = 1e-12
_BISECTION_MAXITER = 200
_BRACKET_LEFT = 1e-9


def _check_nonnegative(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v) or v < 0.0:
            raise InvalidParamsError(f"{name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class ModelParams:
    """Parameter triple (mu, alpha, delta) of the mean-field model.

    mu: spontaneous input rate (events per unit time), >= 0.
    alpha: mean connectivity strength (dimensionless), >= 0.
    delta: refractory period (time), >= 0.
    """

    mu: float
    alpha: float
    delta: float

    #: Critical connectivity strength.
    ALPHA_CRITICAL = ALPHA_CRITICAL

    def __post_init__(self) -> None:
        _check_nonnegative(mu=self.mu, alpha=self.alpha, delta=self.delta)

    @property
    def beta(self) -> float:
        """Dimensionless load mu * delta."""
        return self.mu * self.delta


def discriminant(alpha, beta):
    """Discriminant of the stationary self-consistency quadratic.

    Evaluated as ``(1 + beta - alpha)**2 + 4*alpha*beta``, a sum of
    nonnegative terms, so it never suffers cancellation.  Vanishes only at
    (alpha, beta) = (1, 0).
    """
    return (1.0 + beta - alpha) ** 2 + 4.0 * alpha * beta


def discriminant_alt(alpha, beta):
    """Algebraically equal form ``(1 + beta + alpha)**2 - 4*alpha``.

    Kept for the two-form agreement check; prefer :func:`discriminant` for
    computation.
    """
    return (1.0 + beta + alpha) ** 2 - 4.0 * alpha


def steady_activity(params: ModelParams) -> float:
    """Stationary firing rate per neuron.

    Branches:
      delta == 0:  mu / (1 - alpha), only defined for alpha < 1;
      alpha == 0:  1 / (delta + 1/mu), independent refractory units;
      otherwise    (1/delta) * (1 - 2 / (1 + alpha + beta + sqrt(D)))
                   with D the discriminant above.

    The third branch is the conjugate rewrite of the quadratic root
    (1/delta - (1 + alpha + beta - sqrt(D)) / (2*alpha*delta)); the rewrite
    avoids cancellation as alpha -> 0 and is exactly equal elsewhere.

    Raises DivergentError when delta == 0 and alpha >= 1 (no finite steady
    state), InvalidParamsError on negative inputs.
    """
    mu, alpha, delta = params.mu, params.alpha, params.delta
    return _steady_activity(mu, alpha, delta)


def _steady_activity(mu: float, alpha: float, delta: float) -> float:
    if delta == 0.0:
        if alpha >= ALPHA_CRITICAL:
            raise DivergentError(
                f"no finite steady activity for delta=0 and alpha={alpha} >= 1"
            )
        return mu / (1.0 - alpha)
    if alpha == 0.0:
        if mu == 0.0:
            return 0.0
        return 1.0 / (delta + 1.0 / mu)
    beta = mu * delta
    root = math.sqrt(discriminant(alpha, beta))
    return (1.0 / delta) * (1.0 - 2.0 / (1.0 + alpha + beta + root))


@dataclass(frozen=True)
class StationaryState:
    """Stationary solution: activity, interaction value, and age density.

    ``x_inf == alpha * a_inf`` exactly, and the age density is

        u(s) = a_inf * exp(-(mu + x_inf) * max(s - delta, 0)),

    constant over the refractory band [0, delta) and exponential beyond; it
    integrates to one.
    """

    a_inf: float
    x_inf: float
    mu: float
    alpha: float
    delta: float

    def density(self, s):
        """Stationary age density, vectorized over ``s >= 0``."""
        s = np.asarray(s, dtype=float)
        rate = self.mu + self.x_inf
        return self.a_inf * np.exp(-rate * np.maximum(s - self.delta, 0.0))

    def tail_mass(self, s_cut: float) -> float:
        """Exact density mass beyond age ``s_cut`` (requires s_cut >= delta)."""
        rate = self.mu + self.x_inf
        return self.a_inf * math.exp(-rate * (s_cut - self.delta)) / rate


def stationary_state(params: ModelParams) -> StationaryState:
    """Full stationary solution for the given parameters.

    Requires ``mu + alpha*a_inf > 0`` so that the age density normalizes;
    a silent network (mu == 0 with alpha <= 1) has no stationary density.
    """
    a_inf = steady_activity(params)
    x_inf = params.alpha * a_inf
    if params.mu + x_inf <= 0.0:
        raise InvalidParamsError(
            "no stationary age density: mu + alpha*a_inf must be positive"
        )
    return StationaryState(
        a_inf=a_inf, x_inf=x_inf, mu=params.mu, alpha=params.alpha, delta=params.delta
    )


def sensitivity(params: ModelParams) -> float:
    """Stimulus sensitivity sigma = d a_inf / d mu.

    Evaluated in the cancellation-free equivalent form

        sigma = 2 / (sqrt(D) * (1 + alpha + beta + sqrt(D))),

    obtained from -1/(2*alpha) + (1 + beta + alpha)/(2*alpha*sqrt(D)) by
    conjugate multiplication.  The rewrite is total on alpha >= 0: at
    alpha == 0 it equals the limit 1/(1 + beta)**2 exactly, and at beta == 0
    it equals 1/(1 - alpha) (alpha < 1) or 1/(alpha*(alpha - 1)) (alpha > 1).

    Always positive.  Raises DivergentError at the single pole
    (alpha, beta) == (1, 0), where the sensitivity grows without bound.
    """
    _check_nonnegative(mu=params.mu, alpha=params.alpha, delta=params.delta)
    return sensitivity_ab(params.alpha, params.beta)


def sensitivity_ab(alpha: float, beta: float) -> float:
    """Sensitivity as a function of the dimensionless pair (alpha, beta)."""
    _check_nonnegative(alpha=alpha, beta=beta)
    d = discriminant(alpha, beta)
    if d == 0.0:
        raise DivergentError("sensitivity diverges at alpha=1 with mu*delta=0")
    root = math.sqrt(d)
    return 2.0 / (root * (1.0 + alpha + beta + root))


def _slope_numerator_direct(alpha: float, beta: float) -> float:
    # Cancels to O(alpha^2) near alpha = 0: use only for moderate alpha.
    d = discriminant(alpha, beta)
    return d * math.sqrt(d) - (1.0 + beta) * d - alpha * ((beta + alpha) ** 2 - 1.0)


def _slope_numerator_conjugate_factor(alpha: float, beta: float) -> float:
    d = discriminant(alpha, beta)
    return d * math.sqrt(d) + (1.0 + beta) * d + alpha * ((beta + alpha) ** 2 - 1.0)


def _stationary_cubic(alpha: float, beta: float) -> float:
    # Cubic in alpha whose real zeros collect the stationary points of the
    # sensitivity and the zeros of the conjugate factor.
    return (
        2.0 * alpha**3
        + (6.0 * beta - 5.0) * alpha**2
        + (6.0 * beta * beta - 6.0 * beta + 4.0) * alpha
        + 2.0 * beta**3
        + 3.0 * beta * beta
        - 1.0
    )


def _slope_numerator(alpha: float, beta: float) -> float:
    """Numerator of d sigma / d alpha, stable for all alpha >= 0.

    For small alpha the direct expression loses all significant digits, so we
    use the identity  numerator * conjugate == -4*alpha**2 * cubic  instead.
    The conjugate factor is bounded away from zero for alpha < 1/2 (its zeros
    live in [1/2, 1)), which makes the division safe below the switch point.
    """
    if alpha < _CONJUGATE_FORM_ALPHA:
        return (
            -4.0
            * alpha
            * alpha
            * _stationary_cubic(alpha, beta)
            / _slope_numerator_conjugate_factor(alpha, beta)
        )
    return _slope_numerator_direct(alpha, beta)


def sensitivity_derivative(alpha: float, beta: float) -> float:
    """Slope of the sensitivity with respect to the connectivity strength.

    Equals ``numerator / (2 * alpha**2 * D**(3/2))`` with the stable
    numerator above.  For ``alpha <= 1e-8`` returns the exact limit
    ``(1 - 2*beta) / (1 + beta)**4``.  Raises DivergentError at the pole
    (alpha, beta) == (1, 0).
    """
    _check_nonnegative(alpha=alpha, beta=beta)
    if alpha <= _SLOPE_LIMIT_ALPHA:
        return (1.0 - 2.0 * beta) / (1.0 + beta) ** 4
    d = discriminant(alpha, beta)
    if d == 0.0:
        raise DivergentError("sensitivity slope undefined at alpha=1, mu*delta=0")
    d32 = d * math.sqrt(d)
    if alpha < _CONJUGATE_FORM_ALPHA:
        # alpha**2 cancels against the conjugate identity: uniformly accurate.
        return (
            -2.0
            * _stationary_cubic(alpha, beta)
            / (_slope_numerator_conjugate_factor(alpha, beta) * d32)
        )
    return _slope_numerator_direct(alpha, beta) / (2.0 * alpha * alpha * d32)


@dataclass(frozen=True)
class ProofPolynomials:
    """Joint evaluation of the polynomial quantities behind the optimum.

    slope_numerator and its conjugate factor multiply to
    ``-4 * alpha**2 * stationary_cubic``; the stationary points of the
    sensitivity are the zeros of slope_numerator.  ``slope`` is the full
    derivative (NaN at the (1, 0) pole).
    """

    discriminant: float
    slope_numerator: float
    slope_numerator_conjugate: float
    stationary_cubic: float
    slope: float

    #: Load at which the conjugate factor degenerates to a double zero.
    BETA_DOUBLE_ZERO = 1.0 / 27.0
    #: Location of that double zero.
    ALPHA_DOUBLE_ZERO = 20.0 / 27.0


def proof_polynomials(alpha: float, beta: float) -> ProofPolynomials:
    """Evaluate all polynomial ingredients at one (alpha, beta) point."""
    _check_nonnegative(alpha=alpha, beta=beta)
    d = discriminant(alpha, beta)
    try:
        slope = sensitivity_derivative(alpha, beta)
    except DivergentError:
        slope = math.nan
    return ProofPolynomials(
        discriminant=d,
        slope_numerator=_slope_numerator_direct(alpha, beta),
        slope_numerator_conjugate=_slope_numerator_conjugate_factor(alpha, beta),
        stationary_cubic=_stationary_cubic(alpha, beta),
        slope=slope,
    )


def alpha_m(beta: float) -> float:
    """Connectivity strength at which the sensitivity is maximal.

    Exactly 0 for ``beta >= 1/2``.  Otherwise the unique zero of the slope
    numerator in (0, 1), located by bracketed root-finding (Brent:
    bisection/secant/inverse-quadratic) to 1e-12 absolute tolerance on the
    bracket [1e-9, 1].  The slope is positive near alpha = 0 when beta < 1/2
    and strictly negative at alpha = 1, so the sign change is guaranteed; a
    missing sign change can only be an implementation bug and raises
    BracketFailureError.  When the maximum sits below the left bracket end
    (beta just under 1/2) the function returns 0.

    The result is strictly below the critical value 1 and non-increasing in
    beta.  At beta == 0 exactly there is no finite maximizer (the sensitivity
    increases all the way to its pole at the critical connectivity), so that
    boundary raises DivergentError.
    """
    if not math.isfinite(beta) or beta < 0.0:
        raise InvalidParamsError(f"beta must be finite and >= 0, got {beta!r}")
    if beta == 0.0:
        raise DivergentError(
            "no finite optimum at beta=0: sensitivity diverges at alpha=1"
        )
    if beta >= 0.5:
        return 0.0

    def numerator(a: float) -> float:
        return _slope_numerator(a, beta)

    f_left = numerator(_BRACKET_LEFT)
    if f_left <= 0.0:
        # Optimum collapsed below the bracket; it tends to 0 as beta -> 1/2.
        return 0.0
    f_right = numerator(1.0)
    if f_right >= 0.0:
        raise BracketFailureError(
            f"slope numerator not negative at alpha=1 for beta={beta}; "
            "no sign change in the bracket"
        )
    return float(
        brentq(
            numerator,
            _BRACKET_LEFT,
            1.0,
            xtol=_BISECTION_XTOL,
            maxiter=_BISECTION_MAXITER,
        )
    )


def activity_limits(alpha: float, delta: float) -> tuple[float, float]:
    """Bounds (low-input limit, high-input limit) of the steady activity.

    As mu -> 0 the activity tends to max((alpha - 1)/(alpha*delta), 0)
    (zero for alpha <= 1, the self-sustained rate above criticality); as
    mu -> infinity it saturates at the refractory ceiling 1/delta.
    """
    _check_nonnegative(alpha=alpha)
    if not math.isfinite(delta) or delta <= 0.0:
        raise InvalidParamsError(f"delta must be finite and > 0, got {delta!r}")
    if alpha == 0.0:
        low = 0.0
    else:
        low = max((alpha - 1.0) / (alpha * delta), 0.0)
    return low, 1.0 / delta


def critical_taylor(mu: float, delta: float) -> float:
    """Leading-order steady activity at the critical connectivity.

    At alpha == 1 the activity behaves like sqrt(mu/delta) for small mu
    (square-root rather than linear response).
    """
    if not math.isfinite(mu) or mu <= 0.0:
        raise InvalidParamsError(f"mu must be finite and > 0, got {mu!r}")
    if not math.isfinite(delta) or delta <= 0.0:
        raise InvalidParamsError(f"delta must be finite and > 0, got {delta!r}")
    return math.sqrt(mu / delta)


def steady_activity_fixed_point(
    mu: float, alpha: float, delta: float, tol: float = 1e-14, max_iter: int = 100_000
) -> float:
    """Steady activity by fixed-point iteration of a = 1/(delta + 1/(mu + alpha*a)).

    Independent of the closed form; used as a cross-check oracle.  Converges
    for delta > 0 (the map is a contraction towards the stable root).
    """
    _check_nonnegative(mu=mu, alpha=alpha)
    if delta <= 0.0:
        raise InvalidParamsError("fixed-point iteration requires delta > 0")
    a = max(mu, 1.0 / delta * 0.5)
    for _ in range(max_iter):
        drive = mu + alpha * a
        if drive <= 0.0:
            return 0.0
        new = 1.0 / (delta + 1.0 / drive)
        if abs(new - a) <= tol * max(1.0, abs(new)):
            return new
        a = new
    return a


def finite_difference(f: Callable[[float], float], x: float, h: float) -> float:
    """Central finite difference (f(x+h) - f(x-h)) / (2h)."""
    return (f(x + h) - f(x - h)) / (2.0 * h)
