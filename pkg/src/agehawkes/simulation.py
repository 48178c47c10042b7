"""Event-driven simulation of finite spiking networks with hard refractoriness.

Each of the ``n`` neurons fires with intensity ``(mu + X_i) * 1{age_i >= delta}``
where ``X_i`` is the kernel-filtered, weight-scaled sum of past network spikes.
Sampling is exact by thinning: candidate events are proposed from the global
bound ``B = sum_i (mu + X_i)`` which dominates the total intensity between
events (the interaction variables only decay there, and the refractory
indicator can only lower the rate), and accepted with probability
``sum_i lambda_i / B``.

The interaction kernel is exponential, which makes the state Markovian: all
``X_i`` decay by a common factor between events, so the bound is maintained
incrementally in O(1) per proposal with a periodic full recomputation guarding
float drift.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .analytics import ModelParams, stationary_state
from .errors import (
    BoundViolationError,
    InsufficientDataError,
    InvalidConfigError,
    InvalidStopRuleError,
)

# Full bound recomputation period, in accepted events per neuron.
_BOUND_REFRESH_EVENTS_PER_NEURON = 10
_BOUND_DRIFT_TOL = 1e-6


@dataclass(frozen=True)
class ExponentialKernel:
    """Interaction kernel h(t) = exp(-t/tau)/tau with unit integral."""

    tau: float = 0.02

    def __post_init__(self) -> None:
        if not math.isfinite(self.tau) or self.tau <= 0.0:
            raise InvalidConfigError(f"kernel tau must be > 0, got {self.tau!r}")

    def describe(self) -> dict:
        return {"kind": "exponential", "tau": self.tau}


@dataclass(frozen=True)
class DiracWeights:
    """All synaptic weights equal to ``value``."""

    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value) or self.value < 0.0:
            raise InvalidConfigError(f"Dirac weight must be >= 0, got {self.value!r}")

    @property
    def mean(self) -> float:
        return self.value

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        return np.full(shape, float(self.value))

    def describe(self) -> dict:
        return {"kind": "dirac", "value": self.value}


@dataclass(frozen=True)
class BernoulliWeights:
    """Weights 1 with probability ``p`` else 0: a random interaction graph
    with connection probability ``p`` and mean connectivity ``p``."""

    p: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0):
            raise InvalidConfigError(f"Bernoulli p must be in [0, 1], got {self.p!r}")

    @property
    def mean(self) -> float:
        return self.p

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        return (rng.random(shape) < self.p).astype(float)

    def describe(self) -> dict:
        return {"kind": "bernoulli", "p": self.p}


@dataclass(frozen=True)
class DiscreteWeights:
    """Finite mixture over nonnegative weight values."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) == 0 or len(self.values) != len(self.probs):
            raise InvalidConfigError("values and probs must be nonempty, same length")
        if any((not math.isfinite(v)) or v < 0.0 for v in self.values):
            raise InvalidConfigError("weight values must be finite and >= 0")
        if any(p < 0.0 for p in self.probs) or abs(sum(self.probs) - 1.0) > 1e-12:
            raise InvalidConfigError("probs must be >= 0 and sum to 1")

    @property
    def mean(self) -> float:
        return float(sum(v * p for v, p in zip(self.values, self.probs)))

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.choice(np.asarray(self.values, dtype=float), size=shape, p=self.probs)

    def describe(self) -> dict:
        return {"kind": "discrete", "values": list(self.values), "probs": list(self.probs)}


WeightLaw = Union[DiracWeights, BernoulliWeights, DiscreteWeights]


@dataclass(frozen=True)
class NetworkConfig:
    """Static description of a network: size, rates, weight law, kernel, seed."""

    n: int
    mu: float
    delta: float
    weight_law: WeightLaw
    kernel: ExponentialKernel = ExponentialKernel()
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidConfigError(f"n must be a positive integer, got {self.n!r}")
        if not math.isfinite(self.mu) or self.mu < 0.0:
            raise InvalidConfigError(f"mu must be >= 0, got {self.mu!r}")
        if not math.isfinite(self.delta) or self.delta < 0.0:
            raise InvalidConfigError(f"delta must be >= 0, got {self.delta!r}")

    @property
    def alpha(self) -> float:
        """Mean connectivity strength of the weight law."""
        return self.weight_law.mean

    def describe(self) -> dict:
        return {
            "n": self.n,
            "mu": self.mu,
            "delta": self.delta,
            "weight_law": self.weight_law.describe(),
            "kernel": self.kernel.describe(),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class Network:
    """Sampled network: config plus the n-by-n synaptic weight matrix.

    ``weights[i, j]`` is the strength of neuron j's influence on neuron i;
    use sites scale by 1/n.  Rebuilding from the same config is bit-identical.
    """

    config: NetworkConfig
    weights: np.ndarray


def _spawn_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    # One child stream for weight sampling, one for the event loop, so the
    # sampled graph does not depend on how long the simulation runs.
    weight_ss, sim_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(weight_ss), np.random.default_rng(sim_ss)


def build_network(config: NetworkConfig) -> Network:
    """Sample the synaptic weight matrix; deterministic in (config, seed)."""
    weight_rng, _ = _spawn_rngs(config.seed)
    weights = config.weight_law.sample(weight_rng, (config.n, config.n))
    return Network(config=config, weights=weights)


@dataclass(frozen=True)
class StopRule:
    """Stop after ``max_spikes`` recorded spikes (counted after the burn-in
    window when one is set) or at ``max_time``, whichever comes first."""

    max_spikes: int | None = None
    max_time: float | None = None

    def __post_init__(self) -> None:
        if self.max_spikes is None and self.max_time is None:
            raise InvalidStopRuleError("need max_spikes and/or max_time")
        if self.max_spikes is not None and self.max_spikes < 1:
            raise InvalidStopRuleError(f"max_spikes must be >= 1, got {self.max_spikes}")
        if self.max_time is not None and not (
            math.isfinite(self.max_time) and self.max_time > 0.0
        ):
            raise InvalidStopRuleError(f"max_time must be > 0, got {self.max_time}")

    def describe(self) -> dict:
        return {"max_spikes": self.max_spikes, "max_time": self.max_time}


@dataclass
class SpikeRecord:
    """Ordered spike times and neuron indices, plus run metadata."""

    times: np.ndarray
    neurons: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def to_csv(self, path) -> None:
        """Write ``time,neuron`` rows; times carry 12 significant digits."""
        with open(path, "w") as fh:
            fh.write("time,neuron\n")
            for t, i in zip(self.times, self.neurons):
                fh.write(f"{t:.12g},{i}\n")


def simulate(
    network: Network,
    stop: StopRule,
    burn_in: float = 0.0,
    init: str = "cold",
) -> SpikeRecord:
    """Draw one exact sample of the network point process.

    init="cold" starts every neuron outside refractoriness with zero
    interaction (no activity before t=0).  init="stationary" draws the ages
    from the mean-field stationary density and pins the interaction variables
    at their stationary value; useful to estimate stationary rates without
    waiting out the relaxation transient.

    burn_in > 0 makes ``max_spikes`` count only spikes after that time; the
    record still contains every spike.  Determinism: the full record is a
    pure function of (config, stop, burn_in, init).
    """
    config = network.config
    n, mu, delta = config.n, config.mu, config.delta
    tau = config.kernel.tau
    if init not in ("cold", "stationary"):
        raise InvalidConfigError(f"unknown init {init!r}")
    if burn_in < 0.0 or not math.isfinite(burn_in):
        raise InvalidConfigError(f"burn_in must be >= 0, got {burn_in!r}")

    _, rng = _spawn_rngs(config.seed)
    x = np.zeros(n)
    last_spike = np.full(n, -np.inf)  # age sentinel: never fired
    if init == "stationary":
        state = stationary_state(ModelParams(mu=mu, alpha=config.alpha, delta=delta))
        drive = mu + state.x_inf
        refractory_prob = state.a_inf * delta
        u = rng.random(n)
        ages = np.where(
            u < refractory_prob,
            rng.random(n) * delta if delta > 0.0 else 0.0,
            delta + rng.exponential(1.0 / drive, n),
        )
        last_spike = -ages
        x[:] = state.x_inf

    # Column j holds the interaction jumps caused by a spike of neuron j.
    jumps = np.asfortranarray(network.weights / (n * tau))
    jump_col_sums = jumps.sum(axis=0)

    t = 0.0
    sum_x = float(x.sum())
    times: list[float] = []
    neurons: list[int] = []
    counted = 0
    proposals = 0
    accepted = 0
    refresh_period = _BOUND_REFRESH_EVENTS_PER_NEURON * n
    max_drift = 0.0
    stop_reason = "exhausted"
    wall_start = time.perf_counter()

    while True:
        if stop.max_spikes is not None and counted >= stop.max_spikes:
            stop_reason = "max_spikes"
            break
        if stop.max_time is not None and t >= stop.max_time:
            stop_reason = "max_time"
            break
        bound = n * mu + sum_x
        if bound <= 0.0:
            stop_reason = "silent"  # mu == 0 and all interaction decayed away
            break
        wait = rng.exponential(1.0 / bound)
        if stop.max_time is not None and t + wait > stop.max_time:
            t = stop.max_time
            stop_reason = "max_time"
            break
        t += wait
        decay = math.exp(-wait / tau)
        x *= decay
        sum_x *= decay
        proposals += 1

        lam = np.where(t - last_spike >= delta, mu + x, 0.0)
        total = float(lam.sum())
        if total > bound * (1.0 + 1e-9) + 1e-12:
            raise BoundViolationError(
                f"total intensity {total} exceeds bound {bound} at t={t}"
            )
        if rng.random() * bound <= total:
            cum = np.cumsum(lam)
            j = int(np.searchsorted(cum, rng.random() * total, side="right"))
            j = min(j, n - 1)
            last_spike[j] = t
            x += jumps[:, j]
            sum_x += jump_col_sums[j]
            times.append(t)
            neurons.append(j)
            accepted += 1
            if t > burn_in:
                counted += 1
            if accepted % refresh_period == 0:
                exact = float(x.sum())
                drift = abs(sum_x - exact) / max(1.0, abs(exact))
                max_drift = max(max_drift, drift)
                if drift > _BOUND_DRIFT_TOL:
                    raise BoundViolationError(
                        f"incremental bound drifted by {drift:.3e} (relative)"
                    )
                sum_x = exact

    meta = {
        "config": config.describe(),
        "stop": stop.describe(),
        "burn_in": burn_in,
        "init": init,
        "end_time": t,
        "n_spikes": len(times),
        "n_counted": counted,
        "proposals": proposals,
        "acceptance_rate": accepted / proposals if proposals else 0.0,
        "max_bound_drift": max_drift,
        "stop_reason": stop_reason,
        "wall_seconds": time.perf_counter() - wall_start,
    }
    return SpikeRecord(
        times=np.asarray(times, dtype=float),
        neurons=np.asarray(neurons, dtype=np.int64),
        meta=meta,
    )


@dataclass(frozen=True)
class FirstKSpikes:
    """Rate from the first k spikes: k / (n * t_k)."""

    k: int


@dataclass(frozen=True)
class Window:
    """Rate from the spike count in the interval (t0, t1]."""

    t0: float
    t1: float


EstimateScheme = Union[FirstKSpikes, Window]

_N_BATCHES = 20


@dataclass(frozen=True)
class RateEstimate:
    """Per-neuron rate estimate with a batch-means standard error."""

    rate: float
    stderr: float
    n_spikes: int
    t0: float
    t1: float


def _batch_stderr(times: np.ndarray, n: int, t0: float, t1: float) -> float:
    edges = np.linspace(t0, t1, _N_BATCHES + 1)
    counts, _ = np.histogram(times, bins=edges)
    rates = counts / (n * np.diff(edges))
    return float(np.std(rates, ddof=1) / math.sqrt(_N_BATCHES))


def estimate_activity(
    record: SpikeRecord, n: int, scheme: EstimateScheme
) -> RateEstimate:
    """Estimate the per-neuron firing rate from a spike record.

    The standard error comes from batch means over 20 equal sub-intervals of
    the estimation window; near criticality the batches are correlated, so
    treat it as a lower bound on the true uncertainty.
    """
    if isinstance(scheme, FirstKSpikes):
        k = scheme.k
        if k < 1 or len(record.times) < k:
            raise InsufficientDataError(
                f"need {k} spikes, record has {len(record.times)}"
            )
        t_k = float(record.times[k - 1])
        if t_k <= 0.0:
            raise InsufficientDataError("k-th spike time is not positive")
        sel = record.times[:k]
        return RateEstimate(
            rate=k / (n * t_k),
            stderr=_batch_stderr(sel, n, 0.0, t_k),
            n_spikes=k,
            t0=0.0,
            t1=t_k,
        )
    if isinstance(scheme, Window):
        t0, t1 = scheme.t0, scheme.t1
        if not (t1 > t0):
            raise InsufficientDataError(f"empty window ({t0}, {t1}]")
        mask = (record.times > t0) & (record.times <= t1)
        count = int(mask.sum())
        if count == 0:
            raise InsufficientDataError(f"no spikes in window ({t0}, {t1}]")
        sel = record.times[mask]
        return RateEstimate(
            rate=count / (n * (t1 - t0)),
            stderr=_batch_stderr(sel, n, t0, t1),
            n_spikes=count,
            t0=t0,
            t1=t1,
        )
    raise InvalidStopRuleError(f"unknown estimate scheme {scheme!r}")
