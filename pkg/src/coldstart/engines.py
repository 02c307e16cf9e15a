"""Continuation-value estimation for realistic exploitation engines.

Everything downstream of the testing bar is summarized by two scalars: the
expected discounted pull count after failing (H0) and after passing (H1),
with prize spread dH = H1 - H0.  This module estimates them four ways:

* ``thompson_replay``  -- Monte-Carlo replay of a Thompson-sampling engine
  against a frozen competitor set, classifying replications by the pass event.
* ``two_band_H``       -- closed form for a two-band priority rule.
* ``relaxation_H``     -- closed form when inclusion probabilities relax
  exponentially toward a cohort steady state.
* ``ucb_surrogate``    -- optimism-corrected indices smoothed through a
  logistic inclusion link, delegating to the relaxation form.

``calibrate_cohort_threshold`` sizes the multi-winner threshold so a K-seat
cohort fills in expectation.
"""

from __future__ import annotations

import math
import time
from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InsufficientClassSamplesError, InvalidInputError
from .frontier import BinomialBar, binomial_tail

__all__ = [
    "EngineConfig",
    "ContinuationEstimate",
    "RelaxationParams",
    "ThresholdCalibration",
    "two_band_H",
    "relaxation_H",
    "thompson_replay",
    "ucb_surrogate",
    "calibrate_cohort_threshold",
    "default_horizon",
]


def default_horizon(gamma: float, tail_mass: float = 1e-4) -> int:
    """Truncation horizon T with gamma^T below tail_mass.

    The truncation bias of a discounted pull count is below
    tail_mass * omega / (1 - gamma).
    """
    if not 0.0 < gamma < 1.0:
        raise InvalidInputError(f"gamma must lie in (0,1), got {gamma}")
    return max(1, math.ceil(math.log(tail_mass) / math.log(gamma)))


@dataclass(frozen=True)
class EngineConfig:
    """A replayable post-testing engine around one focal entrant.

    Competitors are frozen during replay: either fixed qualities (point-mass
    draws) or fixed Beta posteriors sampled fresh each period.  ``seats``
    concurrent winners receive exposure credit by rank through ``weights``.
    ``fixed_inclusion`` switches to a degenerate engine whose inclusion
    probability depends only on the pass/fail class; it exists to validate
    the replay against the two-band closed form.
    """

    prior_a: float = 1.0
    prior_b: float = 1.0
    competitors: Tuple[float, ...] = ()
    competitor_posteriors: Tuple[Tuple[float, float], ...] = ()
    seats: int = 1
    weights: Tuple[float, ...] = (1.0,)
    horizon: Optional[int] = None
    gamma: float = 0.95
    n_reps: int = 10_000
    seed: int = 0
    fixed_inclusion: Optional[Tuple[float, float]] = None  # (pi_pass, pi_fail)

    def __post_init__(self):
        if self.prior_a <= 0.0 or self.prior_b <= 0.0:
            raise InvalidInputError("Beta prior parameters must be positive")
        if self.seats < 1:
            raise InvalidInputError("need at least one seat")
        if len(self.weights) != self.seats:
            raise InvalidInputError("need one position weight per seat")
        if any(w <= 0.0 for w in self.weights):
            raise InvalidInputError("position weights must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidInputError(f"gamma must lie in (0,1), got {self.gamma}")
        if self.n_reps < 1:
            raise InvalidInputError("need at least one replication")
        if self.horizon is not None and self.horizon < 1:
            raise InvalidInputError("horizon must be >= 1")
        if self.competitors and self.competitor_posteriors:
            raise InvalidInputError(
                "give either fixed competitor qualities or posteriors, not both"
            )
        if self.fixed_inclusion is not None:
            ph, pf = self.fixed_inclusion
            if not (0.0 <= pf <= 1.0 and 0.0 <= ph <= 1.0):
                raise InvalidInputError("fixed inclusion probabilities must lie in [0,1]")


@dataclass(frozen=True)
class ContinuationEstimate:
    h0: float
    h1: float
    dh: float
    ci_h0: float  # 95% half-widths; zero for closed forms
    ci_h1: float
    ci_dh: float
    method: str  # mc_thompson | two_band | relaxation | ucb_surrogate
    n_reps: int
    n_pass: int = 0
    n_fail: int = 0
    seed: Optional[int] = None
    truncated: bool = False
    unconditional_mean: Optional[float] = None
    pass_share: Optional[float] = None


@dataclass(frozen=True)
class RelaxationParams:
    """Exponential relaxation of inclusion probabilities toward a steady state."""

    pi0_pass: float
    pi0_fail: float
    pi_inf: float
    lam: float
    omega: float = 1.0
    gamma: float = 0.95

    def __post_init__(self):
        for name in ("pi0_pass", "pi0_fail", "pi_inf"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise InvalidInputError(f"{name} must lie in (0,1), got {v}")
        if self.lam <= 0.0:
            raise InvalidInputError("relaxation rate lambda must be positive")
        if self.omega <= 0.0:
            raise InvalidInputError("omega must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidInputError(f"gamma must lie in (0,1), got {self.gamma}")


def two_band_H(pi_high: float, pi_low: float, gamma: float) -> ContinuationEstimate:
    """Two-band priority rule: pass joins a queue sampled at pi_high per period.

    Exact when per-period sampling probabilities are constant, whence
    H1 = pi_high/(1-gamma) and H0 = pi_low/(1-gamma).
    """
    if not 0.0 < pi_low <= pi_high < 1.0:
        if pi_low > pi_high:
            raise InvalidInputError(
                f"band probabilities inverted: pi_low={pi_low} > pi_high={pi_high}"
            )
        raise InvalidInputError("band probabilities must lie in (0,1)")
    if not 0.0 < gamma < 1.0:
        raise InvalidInputError(f"gamma must lie in (0,1), got {gamma}")
    h1 = pi_high / (1.0 - gamma)
    h0 = pi_low / (1.0 - gamma)
    return ContinuationEstimate(
        h0=h0, h1=h1, dh=h1 - h0, ci_h0=0.0, ci_h1=0.0, ci_dh=0.0,
        method="two_band", n_reps=0,
    )


def relaxation_H(params: RelaxationParams) -> ContinuationEstimate:
    """Closed-form continuation under exponential relaxation to a steady state."""
    g, lam, om = params.gamma, params.lam, params.omega
    decay = math.exp(-lam)

    def h(pi0: float) -> float:
        return om * (params.pi_inf / (1.0 - g) - (params.pi_inf - pi0) / (1.0 - g * decay))

    h1 = h(params.pi0_pass)
    h0 = h(params.pi0_fail)
    dh = om * (params.pi0_pass - params.pi0_fail) / (1.0 - g * decay)
    if abs(dh - (h1 - h0)) > 1e-12 * max(1.0, abs(dh)):
        raise InvalidInputError("relaxation closed forms internally inconsistent")
    return ContinuationEstimate(
        h0=h0, h1=h1, dh=dh, ci_h0=0.0, ci_h1=0.0, ci_dh=0.0,
        method="relaxation", n_reps=0,
    )


def ucb_surrogate(
    theta_pass: float,
    theta_fail: float,
    theta_frontier: float,
    smoothing: float,
    pi_inf: float,
    lam: float,
    omega: float = 1.0,
    gamma: float = 0.95,
) -> ContinuationEstimate:
    """Optimism-corrected index surrogate: logistic inclusion, then relaxation.

    The initial inclusion probabilities come from smoothing the selection
    frontier: pi0 = sigma(smoothing * (theta - theta_frontier)).
    """
    if smoothing <= 0.0:
        raise InvalidInputError("smoothing kappa must be positive")

    def sigma(x: float) -> float:
        return 1.0 / (1.0 + math.exp(-x))

    pi0_pass = sigma(smoothing * (theta_pass - theta_frontier))
    pi0_fail = sigma(smoothing * (theta_fail - theta_frontier))
    est = relaxation_H(
        RelaxationParams(
            pi0_pass=pi0_pass, pi0_fail=pi0_fail, pi_inf=pi_inf,
            lam=lam, omega=omega, gamma=gamma,
        )
    )
    return ContinuationEstimate(
        h0=est.h0, h1=est.h1, dh=est.dh, ci_h0=0.0, ci_h1=0.0, ci_dh=0.0,
        method="ucb_surrogate", n_reps=0,
    )


def thompson_replay(
    mu: float,
    bar: BinomialBar,
    engine: EngineConfig,
    time_budget_s: Optional[float] = None,
) -> ContinuationEstimate:
    """Monte-Carlo engine replay classifying replications by the pass event.

    Each replication draws a testing outcome S ~ Bin(q, mu), initializes the
    entrant's posterior Beta(a0+S, b0+q-S), then plays the engine forward:
    every period the entrant's Thompson draw competes with the frozen
    competitor draws for the top-K seats; being seated earns the rank's
    position weight (discounted) and realizes one Bernoulli(mu) outcome that
    updates the posterior.  Group averages of the discounted exposure credit
    give H1-hat and H0-hat with normal-approximation confidence intervals.

    Replications use independent child RNG streams spawned from the seed and
    are reduced in fixed index order, so estimates are bit-reproducible.
    """
    if not 0.0 < mu < 1.0:
        raise InvalidInputError(f"mu must lie in (0,1), got {mu}")
    gamma = engine.gamma
    horizon = engine.horizon if engine.horizon is not None else default_horizon(gamma)
    q, s = bar.q, bar.s
    disc = gamma ** (np.arange(q + 1, q + horizon + 1) - 1)

    fixed_comp = sorted(engine.competitors)
    post_a = np.array([a for a, _ in engine.competitor_posteriors])
    post_b = np.array([b for _, b in engine.competitor_posteriors])
    seats, weights = engine.seats, engine.weights

    streams = np.random.SeedSequence(engine.seed).spawn(engine.n_reps)
    pass_vals: list = []
    fail_vals: list = []
    started = time.monotonic()
    truncated = False
    n_done = 0
    for rep in range(engine.n_reps):
        if time_budget_s is not None and rep % 64 == 0 and rep > 0:
            if time.monotonic() - started > time_budget_s:
                truncated = True
                break
        rng = np.random.default_rng(streams[rep])
        successes = int(rng.binomial(q, mu))
        passed = successes >= s
        a = engine.prior_a + successes
        b = engine.prior_b + q - successes
        total = 0.0
        if engine.fixed_inclusion is not None:
            pi = engine.fixed_inclusion[0] if passed else engine.fixed_inclusion[1]
            shown = rng.random(horizon) < pi
            total = float(np.dot(disc, shown)) * weights[0]
            # posterior untouched: inclusion is posterior-independent here
        else:
            for i in range(horizon):
                draw = rng.beta(a, b)
                if len(post_a):
                    comp = rng.beta(post_a, post_b)
                    rank = 1 + int(np.sum(comp > draw))
                else:
                    rank = 1 + (len(fixed_comp) - bisect_right(fixed_comp, draw))
                if rank <= seats:
                    total += disc[i] * weights[rank - 1]
                    if rng.random() < mu:
                        a += 1.0
                    else:
                        b += 1.0
        (pass_vals if passed else fail_vals).append(total)
        n_done += 1

    if not pass_vals or not fail_vals:
        empty = "pass" if not pass_vals else "fail"
        raise InsufficientClassSamplesError(
            f"the {empty} class received 0 of {n_done} replications; "
            "sample conditionally on the class or move the bar"
        )

    def _summ(vals):
        arr = np.asarray(vals)
        mean = float(arr.mean())
        se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
        return mean, 1.96 * se

    h1, ci1 = _summ(pass_vals)
    h0, ci0 = _summ(fail_vals)
    ci_dh = math.hypot(ci0, ci1)
    n_pass, n_fail = len(pass_vals), len(fail_vals)
    uncond = (sum(pass_vals) + sum(fail_vals)) / n_done
    return ContinuationEstimate(
        h0=h0, h1=h1, dh=h1 - h0, ci_h0=ci0, ci_h1=ci1, ci_dh=ci_dh,
        method="mc_thompson", n_reps=n_done, n_pass=n_pass, n_fail=n_fail,
        seed=engine.seed, truncated=truncated,
        unconditional_mean=uncond, pass_share=n_pass / n_done,
    )


@dataclass(frozen=True)
class ThresholdCalibration:
    s_k: int
    expected_fill_at_s: float
    expected_fill_below: float  # at s-1 (or nan when s_k == 1)
    under_capacity: bool


def calibrate_cohort_threshold(
    peer_mus: Sequence[float],
    q: int,
    seats: int,
    pool_size: Optional[int] = None,
) -> ThresholdCalibration:
    """Smallest integer threshold whose expected cohort fill is at most K.

    Expected fill at s is sum_i Pr[Bin(q, mu_i) >= s] over the pool (the
    peer sample is rescaled to ``pool_size`` when given).  The under-fill
    convention returns the first s that does not overshoot the seat count;
    both neighbors' fills are reported so the over-fill alternative is one
    subtraction away.
    """
    mus = [float(m) for m in peer_mus]
    if not mus:
        raise InvalidInputError("peer sample is empty")
    if any(not 0.0 < m < 1.0 for m in mus):
        raise InvalidInputError("peer qualities must lie in (0,1)")
    n = pool_size if pool_size is not None else len(mus)
    if not 1 <= seats <= n:
        raise InvalidInputError(f"seats K={seats} outside 1..{n}")
    scale = n / len(mus)

    def fill(s: int) -> float:
        return scale * sum(binomial_tail(q, s, m) for m in mus)

    for s in range(1, q + 1):
        if fill(s) <= seats:
            return ThresholdCalibration(
                s_k=s,
                expected_fill_at_s=fill(s),
                expected_fill_below=fill(s - 1) if s > 1 else float("nan"),
                under_capacity=(s == 1 and fill(1) < seats),
            )
    return ThresholdCalibration(
        s_k=q,
        expected_fill_at_s=fill(q),
        expected_fill_below=fill(q - 1) if q > 1 else float("nan"),
        under_capacity=False,
    )
