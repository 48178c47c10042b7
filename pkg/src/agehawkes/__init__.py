"""Steady activity and stimulus sensitivity of refractory self-exciting
spiking networks: closed forms, an exact event-driven simulator, and an
age-structured PDE solver, with a CLI tying them together."""

from .analytics import (
    ALPHA_CRITICAL,
    ModelParams,
    ProofPolynomials,
    StationaryState,
    activity_limits,
    alpha_m,
    critical_taylor,
    discriminant,
    discriminant_alt,
    proof_polynomials,
    sensitivity,
    sensitivity_ab,
    sensitivity_derivative,
    stationary_state,
    steady_activity,
    steady_activity_fixed_point,
)
from .errors import (
    AgeHawkesError,
    BoundViolationError,
    BracketFailureError,
    DivergentError,
    InsufficientDataError,
    InvalidConfigError,
    InvalidInitialDensityError,
    InvalidParamsError,
    InvalidStopRuleError,
    NonFiniteStateError,
    NotConvergedError,
)
from .pde import (
    DeltaAtAge,
    PdeGrid,
    PdeState,
    SolveResult,
    StationaryInit,
    UniformAges,
    default_init,
    init_state,
    solve_to_stationarity,
    step,
)
from .simulation import (
    BernoulliWeights,
    DiracWeights,
    DiscreteWeights,
    ExponentialKernel,
    FirstKSpikes,
    Network,
    NetworkConfig,
    RateEstimate,
    SpikeRecord,
    StopRule,
    Window,
    build_network,
    estimate_activity,
    simulate,
)

__version__ = "0.1.0"
