"""Budget-balanced exploration: marginal values, KKT residuals, primal-dual loop.

Two resources are scarce: discounted early impressions (budget R) and
expected bounty payout (budget M).  The marginal constrained-welfare gains

    MB_q  = mu* + (alpha/D) * K(mu*)
    MB_$  = [-P + (P'/D) K(mu*)] / [P + B (P')^2 / D]

with K(mu*) = q + H0 + dH*P + mu* dH*P' - B*P' (the planner's marginal value
of quality at the induced equilibrium) drive a projected primal-dual loop
that equalizes each instrument's marginal gain with its shadow price.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from . import frontier
from .equilibrium import (
    ContinuationLandscape,
    CreatorPrimitives,
    EquilibriumReport,
    Policy,
    Scenario,
    gap_curvature_denominator,
    implement_bounty,
    solve_best_response_global,
    solve_first_best,
    welfare,
)
from .errors import (
    AmbiguousEquilibriumError,
    FlatFrontierError,
    InvalidInputError,
    UndefinedRateError,
    UnstableNormalizationError,
)
from .frontier import PassModel

__all__ = [
    "Budgets",
    "LoopConfig",
    "BudgetState",
    "LoopResult",
    "Segment",
    "WaterfillResult",
    "CornerMarginalWarning",
    "mb_q",
    "mb_dollar",
    "planner_marginal_value",
    "kkt_residuals",
    "KKTResiduals",
    "primal_dual_step",
    "run_balanced_loop",
    "segment_waterfill",
    "exchange_rate",
    "default_bounty_cap",
]

_EDGE_EPS = 1e-9


class CornerMarginalWarning(UserWarning):
    """Marginal value requested at a corner equilibrium; one-sided value returned."""


@dataclass(frozen=True)
class Budgets:
    impressions: float  # R: discounted guaranteed impressions per entrant
    cash: float  # M: expected bounty payout per entrant

    def __post_init__(self):
        if not (math.isfinite(self.impressions) and self.impressions > 0.0):
            raise InvalidInputError("impression budget R must be positive and finite")
        if not (math.isfinite(self.cash) and self.cash > 0.0):
            raise InvalidInputError("cash budget M must be positive and finite")


@dataclass(frozen=True)
class LoopConfig:
    eta_q: float = 0.05
    eta_b: float = 0.05
    rho: float = 0.05
    smoothing: float = 0.5
    bounty_cap: Optional[float] = None  # default: 2x the implementability bounty
    tol: float = 1e-3
    max_iter: int = 500
    q_move_cap: float = 1.0
    b_move_frac: float = 0.1

    def __post_init__(self):
        for name in ("eta_q", "eta_b", "rho"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidInputError(f"{name} must lie in [0,1], got {v}")
        if not 0.0 < self.smoothing <= 1.0:
            raise InvalidInputError("smoothing must lie in (0,1]")
        if self.max_iter < 1:
            raise InvalidInputError("max_iter must be >= 1")


@dataclass(frozen=True)
class BudgetState:
    q: float
    b: float
    lam_imp: float
    lam_cash: float
    eta_q: float
    eta_b: float
    rho: float
    bounty_cap: float
    iteration: int
    report: Optional[EquilibriumReport] = None
    residual_q: float = float("nan")
    residual_cash: float = float("nan")
    cash_usage: float = float("nan")
    welfare: float = float("nan")


@dataclass(frozen=True)
class KKTResiduals:
    r_q: float
    r_cash: float
    dual_infeasibility: Tuple[str, ...] = ()


@dataclass(frozen=True)
class LoopResult:
    state: BudgetState
    trajectory: Tuple[dict, ...]
    events: Tuple[Tuple[int, str], ...]
    converged: bool


@dataclass(frozen=True)
class Segment:
    """A cohort slice with its own primitives and a share of the entrant mass."""

    share: float
    creator: CreatorPrimitives
    continuation: ContinuationLandscape
    pass_model: PassModel
    q: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.share <= 1.0:
            raise InvalidInputError(f"segment share must lie in (0,1], got {self.share}")

    def scenario(self) -> Scenario:
        return Scenario(
            policy=Policy(q=self.q, pass_model=self.pass_model, bounty=self.b),
            creator=self.creator,
            continuation=self.continuation,
        )


@dataclass(frozen=True)
class WaterfillResult:
    segments: Tuple[Segment, ...]
    lam_imp: float
    lam_cash: float
    slack_impressions: float
    slack_cash: float


def planner_marginal_value(scenario: Scenario, eq: EquilibriumReport) -> float:
    """K(mu*): the planner's marginal value of quality at the induced equilibrium."""
    cont, pol = scenario.continuation, scenario.policy
    return (
        pol.q
        + cont.h0
        + cont.dh * eq.p
        + eq.mu_star * cont.dh * eq.p_prime
        - pol.bounty * eq.p_prime
    )


def mb_q(scenario: Scenario, eq: EquilibriumReport) -> float:
    """Marginal constrained-welfare gain of one more discounted early impression."""
    if eq.corner != "interior":
        _warnings.warn(
            f"marginal value at a {eq.corner} corner; induced-effort term dropped",
            CornerMarginalWarning,
            stacklevel=2,
        )
        return eq.mu_star
    d = gap_curvature_denominator(
        eq.mu_star, scenario.policy, scenario.creator, scenario.continuation
    )
    return eq.mu_star + (scenario.creator.alpha / d) * planner_marginal_value(scenario, eq)


def mb_dollar(scenario: Scenario, eq: EquilibriumReport) -> float:
    """Marginal constrained-welfare gain per expected payout dollar.

    Decreasing in the bounty and converging to -1: past alignment, an extra
    dollar is a pure transfer.  Raises when the pass probability is tiny and
    the per-dollar normalization loses meaning.
    """
    if eq.p <= _EDGE_EPS:
        raise UnstableNormalizationError(
            f"pass probability {eq.p:.3g} too small to normalize per payout dollar"
        )
    if eq.corner != "interior":
        _warnings.warn(
            f"marginal value at a {eq.corner} corner; induced-effort term dropped",
            CornerMarginalWarning,
            stacklevel=2,
        )
        return -1.0
    d = gap_curvature_denominator(
        eq.mu_star, scenario.policy, scenario.creator, scenario.continuation
    )
    k = planner_marginal_value(scenario, eq)
    numer = -eq.p + (eq.p_prime / d) * k
    denom = eq.p + scenario.policy.bounty * eq.p_prime ** 2 / d
    return numer / denom



def _mb_dollar_safe(scen: Scenario, eq: EquilibriumReport) -> float:
    """Loop-internal MB_$: a vanishing pass rate reads as a pure transfer (-1)."""
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", CornerMarginalWarning)
        try:
            return mb_dollar(scen, eq)
        except UnstableNormalizationError:
            return -1.0


def default_bounty_cap(scenario: Scenario) -> float:
    """Administrative cap: twice the implementability bounty when computable."""
    try:
        fb = solve_first_best(scenario.policy, scenario.creator, scenario.continuation)
        if fb.corner == "interior":
            b_star = implement_bounty(
                scenario.creator,
                scenario.policy,
                scenario.continuation,
                fb.mu_fb,
                verify=False,
            )
            if b_star > 0.0:
                return 2.0 * b_star
    except (AmbiguousEquilibriumError, FlatFrontierError, InvalidInputError):
        pass
    return 100.0


def _solved(scenario: Scenario) -> EquilibriumReport:
    # sweeps and loop paths cross irregular regions; resolve multi-crossing
    # cells to the creator's global optimum instead of dying mid-path
    return solve_best_response_global(
        scenario.policy, scenario.creator, scenario.continuation
    )


def kkt_residuals(
    state: BudgetState, scenario: Scenario, budgets: Budgets
) -> KKTResiduals:
    """Stationarity residuals with complementary-slackness adjustments.

    Interior instruments report |MB - lambda|; instruments pinned at a box
    edge report only the violated side (a binding budget with marginal value
    above its price is KKT-consistent, the price simply reads MB there).
    Slack budgets carrying positive prices are flagged as dual infeasible.
    """
    scen = scenario.with_instruments(q=state.q, bounty=state.b)
    eq = state.report if state.report is not None else _solved(scen)
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", CornerMarginalWarning)
        mq = mb_q(scen, eq)
    md = _mb_dollar_safe(scen, eq)
    r = budgets.impressions
    if state.q <= _EDGE_EPS:
        r_q = max(0.0, mq - state.lam_imp)
    elif state.q >= r - _EDGE_EPS:
        r_q = max(0.0, state.lam_imp - mq)
    else:
        r_q = abs(mq - state.lam_imp)
    if state.b <= _EDGE_EPS:
        r_cash = max(0.0, md - state.lam_cash)
    elif state.b >= state.bounty_cap - _EDGE_EPS:
        r_cash = max(0.0, state.lam_cash - md)
    else:
        r_cash = abs(md - state.lam_cash)
    usage = state.b * eq.p
    flags = []
    if state.q < r - _EDGE_EPS and state.lam_imp > 1e-6:
        flags.append("impression budget slack but lam_imp > 0")
    if usage < budgets.cash - 1e-6 and state.lam_cash > 1e-6:
        flags.append("cash budget slack but lam_cash > 0")
    if usage > budgets.cash * (1.0 + 1e-6) + 1e-9:
        flags.append("cash budget violated")
    return KKTResiduals(r_q=r_q, r_cash=r_cash, dual_infeasibility=tuple(flags))


def _primal_targets(
    state: BudgetState, scenario: Scenario, budgets: Budgets, eq: EquilibriumReport
) -> Tuple[float, float]:
    scen = scenario.with_instruments(q=state.q, bounty=state.b)
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", CornerMarginalWarning)
        mq = mb_q(scen, eq)
    md = _mb_dollar_safe(scen, eq)
    q_raw = min(max(state.q + state.eta_q * (mq - state.lam_imp), 0.0), budgets.impressions)
    b_raw = min(max(state.b + state.eta_b * (md - state.lam_cash), 0.0), state.bounty_cap)
    return q_raw, b_raw


def _apply_move(
    state: BudgetState,
    q_raw: float,
    b_raw: float,
    smoothing: float,
    q_move_cap: Optional[float],
    b_move_frac: Optional[float],
) -> Tuple[float, float]:
    dq = smoothing * (q_raw - state.q)
    db = smoothing * (b_raw - state.b)
    if q_move_cap is not None:
        dq = min(max(dq, -q_move_cap), q_move_cap)
    if b_move_frac is not None:
        cap = b_move_frac * state.b if state.b >= 1.0 else 1.0
        db = min(max(db, -cap), cap)
    return state.q + dq, state.b + db


def _step(
    state: BudgetState,
    scenario: Scenario,
    budgets: Budgets,
    smoothing: float = 1.0,
    q_move_cap: Optional[float] = None,
    b_move_frac: Optional[float] = None,
) -> BudgetState:
    scen_now = scenario.with_instruments(q=state.q, bounty=state.b)
    eq = state.report if state.report is not None else _solved(scen_now)
    q_raw, b_raw = _primal_targets(state, scenario, budgets, eq)
    q_next, b_next = _apply_move(state, q_raw, b_raw, smoothing, q_move_cap, b_move_frac)
    scen_next = scenario.with_instruments(q=q_next, bounty=b_next)
    eq_next = _solved(scen_next)
    usage = b_next * eq_next.p
    lam_imp = max(0.0, state.lam_imp + state.rho * (q_next - budgets.impressions))
    lam_cash = max(0.0, state.lam_cash + state.rho * (usage - budgets.cash))
    next_state = replace(
        state,
        q=q_next,
        b=b_next,
        lam_imp=lam_imp,
        lam_cash=lam_cash,
        iteration=state.iteration + 1,
        report=eq_next,
        cash_usage=usage,
        welfare=welfare(scen_next, eq_next.mu_star),
    )
    res = kkt_residuals(next_state, scenario, budgets)
    return replace(next_state, residual_q=res.r_q, residual_cash=res.r_cash)


def primal_dual_step(
    state: BudgetState, scenario: Scenario, budgets: Budgets
) -> BudgetState:
    """One projected primal-dual update.

    Primal: q and B move along their marginal gains net of shadow prices and
    are projected into [0, R] x [0, bounty_cap].  Dual: prices rise with
    measured over-use, using the cash usage B+ * P(mu*(q+, B+)) re-solved
    after the primal move, and clip at zero.  Solver failures propagate and
    leave the caller's (immutable) state untouched.
    """
    return _step(state, scenario, budgets)


def initial_state(
    scenario: Scenario, budgets: Budgets, config: LoopConfig
) -> BudgetState:
    cap = config.bounty_cap if config.bounty_cap is not None else default_bounty_cap(scenario)
    q0 = min(scenario.policy.q, budgets.impressions)
    b0 = min(scenario.policy.bounty, cap)
    return BudgetState(
        q=q0,
        b=b0,
        lam_imp=0.0,
        lam_cash=0.0,
        eta_q=config.eta_q,
        eta_b=config.eta_b,
        rho=config.rho,
        bounty_cap=cap,
        iteration=0,
    )


def _trajectory_row(state: BudgetState, scenario: Scenario) -> dict:
    eq = state.report
    scen = scenario.with_instruments(q=state.q, bounty=state.b)
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", CornerMarginalWarning)
        mq = mb_q(scen, eq)
    md = _mb_dollar_safe(scen, eq)
    return {
        "iter": state.iteration,
        "q": state.q,
        "B": state.b,
        "mu_star": eq.mu_star,
        "P": eq.p,
        "Pprime": eq.p_prime,
        "MBq": mq,
        "MBdollar": md,
        "lambda_imp": state.lam_imp,
        "lambda_dollar": state.lam_cash,
        "rq": state.residual_q,
        "rdollar": state.residual_cash,
        "welfare": state.welfare,
    }


def run_balanced_loop(
    scenario: Scenario,
    budgets: Budgets,
    config: LoopConfig = LoopConfig(),
) -> LoopResult:
    """Iterate the primal-dual step to the balanced exploration point.

    Instruments move with exponential smoothing and per-iteration caps (one
    impression unit; 10% of the current bounty, or one unit below B=1).
    More than 20 sign flips in an instrument's moves halves the step sizes.
    On termination, a binding budget whose dual iterate still understates the
    marginal value has its shadow price settled to that marginal value (the
    projected dual never observes violations of a box-enforced budget, so the
    iterate alone can under-report the price of a binding constraint).
    """
    state = initial_state(scenario, budgets, config)
    scen0 = scenario.with_instruments(q=state.q, bounty=state.b)
    eq0 = _solved(scen0)
    state = replace(
        state,
        report=eq0,
        cash_usage=state.b * eq0.p,
        welfare=welfare(scen0, eq0.mu_star),
    )
    res0 = kkt_residuals(state, scenario, budgets)
    state = replace(state, residual_q=res0.r_q, residual_cash=res0.r_cash)

    trajectory: List[dict] = [_trajectory_row(state, scenario)]
    events: List[Tuple[int, str]] = []
    flips_q = flips_b = 0
    last_dq = last_db = 0.0
    converged = _is_converged(state, scenario, budgets, config.tol)
    it = 0
    while not converged and it < config.max_iter:
        it += 1
        prev_q, prev_b = state.q, state.b
        state = _step(
            state,
            scenario,
            budgets,
            smoothing=config.smoothing,
            q_move_cap=config.q_move_cap,
            b_move_frac=config.b_move_frac,
        )
        dq, db = state.q - prev_q, state.b - prev_b
        # only material direction reversals count as oscillation
        if dq * last_dq < 0.0 and min(abs(dq), abs(last_dq)) > 1e-7:
            flips_q += 1
        if db * last_db < 0.0 and min(abs(db), abs(last_db)) > 1e-7:
            flips_b += 1
        if abs(dq) > 1e-7:
            last_dq = dq
        if abs(db) > 1e-7:
            last_db = db
        if flips_q > 20:
            state = replace(
                state,
                eta_q=max(state.eta_q / 2.0, 1e-4),
                rho=max(state.rho / 2.0, 1e-4),
            )
            events.append(
                (state.iteration, "q oscillation detected; its step sizes halved")
            )
            flips_q = 0
        if flips_b > 20:
            state = replace(
                state,
                eta_b=max(state.eta_b / 2.0, 1e-4),
                rho=max(state.rho / 2.0, 1e-4),
            )
            events.append(
                (state.iteration, "B oscillation detected; its step sizes halved")
            )
            flips_b = 0
        trajectory.append(_trajectory_row(state, scenario))
        converged = _is_converged(state, scenario, budgets, config.tol)

    state = _settle_prices(state, scenario, budgets)
    res = kkt_residuals(state, scenario, budgets)
    state = replace(state, residual_q=res.r_q, residual_cash=res.r_cash)
    return LoopResult(
        state=state,
        trajectory=tuple(trajectory),
        events=tuple(events),
        converged=converged,
    )


def _is_converged(
    state: BudgetState, scenario: Scenario, budgets: Budgets, tol: float
) -> bool:
    res = kkt_residuals(state, scenario, budgets)
    if res.dual_infeasibility:
        return False
    return max(res.r_q, res.r_cash) < tol


def _settle_prices(
    state: BudgetState, scenario: Scenario, budgets: Budgets
) -> BudgetState:
    scen = scenario.with_instruments(q=state.q, bounty=state.b)
    eq = state.report if state.report is not None else _solved(scen)
    lam_imp, lam_cash = state.lam_imp, state.lam_cash
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", CornerMarginalWarning)
        if state.q >= budgets.impressions - _EDGE_EPS:
            lam_imp = max(lam_imp, mb_q(scen, eq))
        usage = state.b * eq.p
        if usage >= budgets.cash * (1.0 - 1e-6):
            lam_cash = max(lam_cash, _mb_dollar_safe(scen, eq))
    return replace(state, lam_imp=lam_imp, lam_cash=lam_cash)


def segment_waterfill(
    segments: Sequence[Segment],
    budgets: Budgets,
    delta_q: float = 0.1,
    delta_cash: float = 0.5,
) -> WaterfillResult:
    """Two greedy water-fills with common shadow prices across segments.

    Impressions first: repeatedly grant delta_q to the segment with the
    largest current MB_q until the share-weighted total reaches R (or all
    marginal values turn nonpositive).  Then expected payout: grant
    delta_cash of payout (converted into bounty units at the segment's
    current pass rate) to the largest-MB_$ segment until M is exhausted.
    The final shadow prices are the last accepted marginal values.
    """
    if not segments:
        raise InvalidInputError("need at least one segment")
    if delta_q <= 0.0 or delta_cash <= 0.0:
        raise InvalidInputError("grant steps must be positive")
    segs = list(segments)
    reports = [_solved(s.scenario()) for s in segs]
    lam_imp = 0.0
    lam_cash = 0.0

    def _mb_q(i: int) -> float:
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore", CornerMarginalWarning)
            return mb_q(segs[i].scenario(), reports[i])

    def _mb_d(i: int) -> float:
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore", CornerMarginalWarning)
            try:
                return mb_dollar(segs[i].scenario(), reports[i])
            except UnstableNormalizationError:
                return -float("inf")

    used_q = sum(s.share * s.q for s in segs)
    while used_q < budgets.impressions - 1e-12:
        values = [_mb_q(i) for i in range(len(segs))]
        best = max(range(len(segs)), key=lambda i: values[i])
        if values[best] <= 0.0:
            break
        grant = min(delta_q, (budgets.impressions - used_q) / segs[best].share)
        segs[best] = replace(segs[best], q=segs[best].q + grant)
        reports[best] = _solved(segs[best].scenario())
        lam_imp = values[best]
        used_q = sum(s.share * s.q for s in segs)

    def _usage() -> float:
        return sum(s.share * s.b * r.p for s, r in zip(segs, reports))

    used_cash = _usage()
    while used_cash < budgets.cash - 1e-12:
        values = [_mb_d(i) for i in range(len(segs))]
        best = max(range(len(segs)), key=lambda i: values[i])
        if values[best] <= 0.0:
            break
        p_best = reports[best].p
        if p_best <= _EDGE_EPS:
            break
        grant_payout = min(delta_cash, (budgets.cash - used_cash) / segs[best].share)
        segs[best] = replace(segs[best], b=segs[best].b + grant_payout / p_best)
        reports[best] = _solved(segs[best].scenario())
        lam_cash = values[best]
        used_cash = _usage()

    return WaterfillResult(
        segments=tuple(segs),
        lam_imp=lam_imp,
        lam_cash=lam_cash,
        slack_impressions=max(0.0, budgets.impressions - sum(s.share * s.q for s in segs)),
        slack_cash=max(0.0, budgets.cash - _usage()),
    )


def exchange_rate(lam_imp: float, lam_cash: float, delta_r: float = 0.0) -> Tuple[float, float]:
    """(lam_imp/lam_cash, compensating cash change for a delta_r impression change)."""
    if lam_cash <= 0.0:
        raise UndefinedRateError(
            "exchange rate undefined: cash shadow price is zero"
        )
    rate = lam_imp / lam_cash
    return rate, -rate * delta_r
