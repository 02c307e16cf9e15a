"""Creator best response, planner first best, and the discovery bounty.

The creator picks quality ``mu`` to maximize

    alpha * mu * [q + H0 + dH * P(mu)] + B * P(mu) - c(mu),

with quadratic effort cost ``c(mu) = kappa/2 * (mu - mu0)^2``.  The gap
function (marginal cost minus marginal private benefit) is

    Delta(mu) = c'(mu) - (alpha*[q + H0 + dH*P(mu)] + alpha*mu*dH*P'(mu) + B*P'(mu)),

whose unique zero under the single-crossing regularity condition is the best
response.  The planner's counterpart drops the revenue-share wedge, and a
closed-form pass-contingent bounty closes the gap between the two: with

    B* = [q + H0 + dH*P(mu_fb) + mu_fb*dH*P'(mu_fb)] * (1 - alpha) / P'(mu_fb)

the private optimum lands exactly on the planner's target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from . import frontier
from .errors import (
    AmbiguousEquilibriumError,
    DegeneratePassRateError,
    FlatFrontierError,
    InvalidInputError,
    UnsupportedModelError,
)
from .frontier import Binomial, Linked, PassModel

__all__ = [
    "CreatorPrimitives",
    "ContinuationLandscape",
    "Policy",
    "Scenario",
    "RegularityReport",
    "EquilibriumReport",
    "FirstBestReport",
    "TargetingComparison",
    "gap",
    "check_regularity",
    "solve_best_response",
    "solve_first_best",
    "implement_bounty",
    "expected_payout",
    "targeting_compare",
    "welfare",
]

_SLOPE_FLOOR = 1e-9
_GRID_STEP = 1e-3


@dataclass(frozen=True)
class CreatorPrimitives:
    """Revenue share, quadratic cost, and the feasible quality interval."""

    alpha: float
    kappa: float
    mu0: float = 0.0
    mu_low: float = 1e-4
    mu_high: float = 0.999

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidInputError(f"alpha must lie in (0,1], got {self.alpha}")
        if self.kappa <= 0.0:
            raise InvalidInputError(f"kappa must be positive, got {self.kappa}")
        if not 0.0 < self.mu_low < self.mu_high < 1.0:
            raise InvalidInputError(
                f"quality domain [{self.mu_low}, {self.mu_high}] must sit inside (0,1)"
            )
        if self.mu0 > self.mu_low:
            raise InvalidInputError(
                f"cost anchor mu0={self.mu0} must not exceed mu_low={self.mu_low}"
            )

    def cost(self, mu: float) -> float:
        return 0.5 * self.kappa * (mu - self.mu0) ** 2

    def cost_deriv(self, mu: float) -> float:
        return self.kappa * (mu - self.mu0)

    @property
    def cost_curvature(self) -> float:
        return self.kappa


@dataclass(frozen=True)
class ContinuationLandscape:
    """Expected discounted continuation exposure after fail (h0) and pass (h1)."""

    h0: float
    dh: float
    gamma: float = 0.9

    def __post_init__(self):
        if self.h0 < 0.0 or self.dh < 0.0:
            raise InvalidInputError("continuation values must be nonnegative")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidInputError(f"gamma must lie in (0,1), got {self.gamma}")

    @property
    def h1(self) -> float:
        return self.h0 + self.dh

    @classmethod
    def block(cls, h: float, gamma: float = 0.9) -> "ContinuationLandscape":
        """The block engine: failing earns nothing, passing earns H."""
        return cls(h0=0.0, dh=h, gamma=gamma)


@dataclass(frozen=True)
class Policy:
    """Instruments: discounted guaranteed impressions q, pass model, bounty B."""

    q: float
    pass_model: PassModel
    bounty: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.q) or self.q < 0.0:
            raise InvalidInputError(f"q must be finite and nonnegative, got {self.q}")
        if not math.isfinite(self.bounty) or self.bounty < 0.0:
            raise InvalidInputError(f"bounty must be finite and nonnegative, got {self.bounty}")


@dataclass(frozen=True)
class Scenario:
    """A full primitives bundle; the unit every solver and sweep consumes."""

    policy: Policy
    creator: CreatorPrimitives
    continuation: ContinuationLandscape

    def with_instruments(self, q: Optional[float] = None, bounty: Optional[float] = None) -> "Scenario":
        pol = self.policy
        if q is not None:
            pol = replace(pol, q=float(q))
        if bounty is not None:
            pol = replace(pol, bounty=float(bounty))
        return replace(self, policy=pol)


@dataclass(frozen=True)
class RegularityReport:
    satisfied: bool
    kappa_min_required: float
    sup_slope: float
    sup_abs_curvature: float
    sup_mu_abs_curvature: float


@dataclass(frozen=True)
class EquilibriumReport:
    mu_star: float
    corner: str  # "interior" | "low" | "high"
    p: float
    p_prime: float
    leverage: float  # nan when the pass rate is saturated
    gap_curvature: float
    mu_q: float
    mu_b: float
    mu_h: float
    mu_alpha: float
    regularity_satisfied: bool
    warnings: Tuple[str, ...] = ()


@dataclass(frozen=True)
class FirstBestReport:
    mu_fb: float
    corner: str
    p: float
    p_prime: float


@dataclass(frozen=True)
class TargetingComparison:
    cost_bounty: float
    cost_flat: float
    hit_dominates: bool
    leverage: float


def gap(
    mu: float,
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
) -> float:
    """Marginal cost minus marginal private benefit at quality mu."""
    p = frontier.tail(policy.pass_model, mu)
    dp = frontier.slope(policy.pass_model, mu)
    benefit = (
        creator.alpha * (policy.q + continuation.h0 + continuation.dh * p)
        + creator.alpha * mu * continuation.dh * dp
        + policy.bounty * dp
    )
    return creator.cost_deriv(mu) - benefit


def _planner_gap(
    mu: float,
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
) -> float:
    p = frontier.tail(policy.pass_model, mu)
    dp = frontier.slope(policy.pass_model, mu)
    benefit = (
        policy.q + continuation.h0 + continuation.dh * p + mu * continuation.dh * dp
    )
    return creator.cost_deriv(mu) - benefit


@lru_cache(maxsize=256)
def _frontier_suprema(model_key: str) -> Tuple[float, float, float]:
    """(sup P', sup |P''|, sup mu*|P''|) on a 1e-3 grid over (0,1)."""
    import json

    model = frontier.pass_model_from_dict(json.loads(model_key))
    grid = np.arange(_GRID_STEP, 1.0, _GRID_STEP)
    if isinstance(model, Binomial):
        dp = frontier.beta_density(model.bar.q, model.bar.s, grid)
        ddp = frontier.beta_density_deriv(model.bar.q, model.bar.s, grid)
    else:
        dp = np.array([frontier.slope(model, m) for m in grid])
        ddp = np.array([frontier.curvature(model, m) for m in grid])
    return (
        float(np.max(dp)),
        float(np.max(np.abs(ddp))),
        float(np.max(grid * np.abs(ddp))),
    )


def check_regularity(
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
) -> RegularityReport:
    """Single-crossing check: cost curvature must dominate the benefit curvature.

    The sufficient bound compares kappa against

        alpha * dH * (2 sup P' + sup mu|P''|) + B * sup |P''|

    with suprema taken on a 1e-3 quality grid.
    """
    model = policy.pass_model
    if not isinstance(model, (Binomial, Linked)):
        raise UnsupportedModelError(
            "regularity check needs curvature and supports binomial/linked bars only; "
            f"got {type(model).__name__}"
        )
    import json

    key = json.dumps(frontier.pass_model_to_dict(model), sort_keys=True)
    sup_dp, sup_abs_ddp, sup_mu_abs_ddp = _frontier_suprema(key)
    required = (
        creator.alpha * continuation.dh * (2.0 * sup_dp + sup_mu_abs_ddp)
        + policy.bounty * sup_abs_ddp
    )
    return RegularityReport(
        satisfied=creator.kappa > required,
        kappa_min_required=required,
        sup_slope=sup_dp,
        sup_abs_curvature=sup_abs_ddp,
        sup_mu_abs_curvature=sup_mu_abs_ddp,
    )


def _bracketed_root(f, lo: float, hi: float, f_lo: float, f_hi: float, tol_f: float) -> float:
    """Bisection to a 1e-6 bracket, then secant polish; deterministic."""
    a, b, fa, fb = lo, hi, f_lo, f_hi
    while b - a > 1e-6:
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fa < 0.0) == (fm < 0.0):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    x0, x1 = a, b
    f0, f1 = fa, fb
    for _ in range(5):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (lo <= x2 <= hi):
            x2 = 0.5 * (a + b)
        f2 = f(x2)
        x0, f0 = x1, f1
        x1, f1 = x2, f2
        if abs(f2) <= tol_f:
            return x2
    if abs(f1) > tol_f:
        # secant stalled; fall back to deep bisection on the retained bracket
        while b - a > 1e-14:
            mid = 0.5 * (a + b)
            fm = f(mid)
            if abs(fm) <= tol_f:
                return mid
            if (fa < 0.0) == (fm < 0.0):
                a, fa = mid, fm
            else:
                b, fb = mid, fm
        return 0.5 * (a + b)
    return x1


def binomial_tail_grid(q: int, s: int, p: np.ndarray) -> np.ndarray:
    """Vectorized pmf-summation tail for grid scans (exact, like the scalar paths)."""
    if s <= 0:
        return np.ones_like(p)
    out = np.zeros_like(p)
    log_p = np.log(p)
    log_1mp = np.log1p(-p)
    for k in range(s, q + 1):
        log_c = math.lgamma(q + 1) - math.lgamma(k + 1) - math.lgamma(q - k + 1)
        out += np.exp(log_c + k * log_p + (q - k) * log_1mp)
    return np.minimum(out, 1.0)


def _tail_slope_grid(model: PassModel, grid: np.ndarray):
    """(P, P') on a quality grid, vectorized where the model allows."""
    if isinstance(model, Binomial):
        return (
            binomial_tail_grid(model.bar.q, model.bar.s, grid),
            frontier.beta_density(model.bar.q, model.bar.s, grid),
        )
    if isinstance(model, Linked):
        psi = np.array([model.link.value(m) for m in grid])
        dpsi = np.array([model.link.deriv(m) for m in grid])
        return (
            binomial_tail_grid(model.bar.q, model.bar.s, psi),
            dpsi * frontier.beta_density(model.bar.q, model.bar.s, psi),
        )
    p = np.array([frontier.tail(model, m) for m in grid])
    dp = np.array([frontier.slope(model, m) for m in grid])
    return p, dp


def _sign_change_brackets(
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
    lo: float,
    hi: float,
) -> list:
    grid = np.arange(lo, hi, _GRID_STEP)
    if grid[-1] < hi:
        grid = np.append(grid, hi)
    p, dp = _tail_slope_grid(policy.pass_model, grid)
    vals = creator.kappa * (grid - creator.mu0) - (
        creator.alpha * (policy.q + continuation.h0 + continuation.dh * p)
        + creator.alpha * grid * continuation.dh * dp
        + policy.bounty * dp
    )
    brackets = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            brackets.append((float(grid[i]), float(grid[i])))
        elif (vals[i] < 0.0) != (vals[i + 1] < 0.0):
            brackets.append((float(grid[i]), float(grid[i + 1])))
    return brackets


def _curvature_or_fd(model: PassModel, mu: float) -> float:
    try:
        return frontier.curvature(model, mu)
    except UnsupportedModelError:
        h = 1e-6
        lo = max(mu - h, 1e-9)
        hi = min(mu + h, 1.0 - 1e-9)
        return (frontier.slope(model, hi) - frontier.slope(model, lo)) / (hi - lo)


def gap_curvature_denominator(
    mu: float,
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
) -> float:
    """D(mu) = c'' - alpha*dH*(2P' + mu P'') - B*P''; positive under regularity."""
    dp = frontier.slope(policy.pass_model, mu)
    ddp = _curvature_or_fd(policy.pass_model, mu)
    return (
        creator.cost_curvature
        - creator.alpha * continuation.dh * (2.0 * dp + mu * ddp)
        - policy.bounty * ddp
    )


def _report_at(
    mu: float,
    corner: str,
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
    regularity_ok: bool,
    warnings: Tuple[str, ...],
) -> EquilibriumReport:
    p = frontier.tail(policy.pass_model, mu)
    dp = frontier.slope(policy.pass_model, mu)
    lev = dp / p if 1e-12 < p < 1.0 - 1e-12 else float("nan")
    d = gap_curvature_denominator(mu, policy, creator, continuation)
    if corner == "interior" and d > 0.0:
        mu_q = creator.alpha / d
        mu_b = dp / d
        mu_h = creator.alpha * (p + mu * dp) / d
        mu_alpha = (
            policy.q + continuation.h0 + continuation.dh * p + mu * continuation.dh * dp
        ) / d
    else:
        mu_q = mu_b = mu_h = mu_alpha = 0.0
        if corner == "interior" and d <= 0.0:
            warnings = warnings + ("gap curvature nonpositive at solution; sensitivities suppressed",)
    return EquilibriumReport(
        mu_star=mu,
        corner=corner,
        p=p,
        p_prime=dp,
        leverage=lev,
        gap_curvature=d,
        mu_q=mu_q,
        mu_b=mu_b,
        mu_h=mu_h,
        mu_alpha=mu_alpha,
        regularity_satisfied=regularity_ok,
        warnings=warnings,
    )


def _solve_gap(
    f,
    scan_policy: Policy,
    scan_creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
    tol: float,
    regularity_ok: Optional[bool],
):
    """Locate the best response from the gap function.

    Under verified regularity the gap is monotone, so the Prop-1 order holds:
    endpoint signs decide corners, otherwise bisect the unique crossing.
    Without regularity the 1e-3 grid is scanned first; two or more sign
    changes are ambiguous and raised with their brackets, a single rising
    crossing is solved with a warning, and no crossing resolves to the corner
    the (one-signed) gap points at.
    """
    lo, hi = scan_creator.mu_low, scan_creator.mu_high
    f_lo = f(lo)
    f_hi = f(hi)
    if regularity_ok:
        if f_lo > 0.0:
            return lo, "low", ()
        if f_hi < 0.0:
            return hi, "high", ()
        root = _bracketed_root(f, lo, hi, f_lo, f_hi, tol * scan_creator.kappa)
        return root, "interior", ()

    brackets = _sign_change_brackets(scan_policy, scan_creator, continuation, lo, hi)
    if len(brackets) > 1:
        raise AmbiguousEquilibriumError(
            f"gap function changes sign {len(brackets)} times; candidate brackets {brackets}",
            brackets=brackets,
        )
    warnings: Tuple[str, ...] = ("regularity not verified; returned the smallest root",)
    if not brackets:
        if f_lo > 0.0:
            return lo, "low", ()
        return hi, "high", ()
    if f_lo > 0.0:
        # single falling crossing: the interior stationary point is a minimum
        # of the creator objective, so the optimum sits at an endpoint
        from . import frontier as _fr  # local import to avoid cycle noise

        def objective(mu: float) -> float:
            p = _fr.tail(scan_policy.pass_model, mu)
            return (
                scan_creator.alpha
                * mu
                * (scan_policy.q + continuation.h0 + continuation.dh * p)
                + scan_policy.bounty * p
                - scan_creator.cost(mu)
            )

        if objective(lo) >= objective(hi):
            return lo, "low", warnings + ("interior crossing is a local minimum",)
        return hi, "high", warnings + ("interior crossing is a local minimum",)
    blo, bhi = brackets[0]
    if blo == bhi:
        return blo, "interior", warnings
    root = _bracketed_root(f, blo, bhi, f(blo), f(bhi), tol * scan_creator.kappa)
    return root, "interior", warnings


def solve_best_response(
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
    tol: float = 1e-9,
) -> EquilibriumReport:
    """Unique best-response quality, with corner handling and sensitivities.

    Sensitivities follow the implicit-function identities mu_q = alpha/D,
    mu_B = P'/D, mu_H = alpha (P + mu P')/D (w.r.t. the prize spread), and
    mu_alpha = (q + H0 + dH P + mu dH P')/D, all evaluated at the solution.
    """
    try:
        reg = check_regularity(policy, creator, continuation)
        regularity_ok: Optional[bool] = reg.satisfied
    except UnsupportedModelError:
        regularity_ok = None

    def f(mu: float) -> float:
        return gap(mu, policy, creator, continuation)

    mu, corner, warnings = _solve_gap(
        f, policy, creator, continuation, tol, regularity_ok
    )
    return _report_at(
        mu, corner, policy, creator, continuation, bool(regularity_ok), warnings
    )


def creator_objective(
    mu: float,
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
) -> float:
    """The entrant's discounted payoff at quality mu under the policy."""
    p = frontier.tail(policy.pass_model, mu)
    return (
        creator.alpha * mu * (policy.q + continuation.h0 + continuation.dh * p)
        + policy.bounty * p
        - creator.cost(mu)
    )


def solve_best_response_global(
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
    tol: float = 1e-9,
) -> EquilibriumReport:
    """Best response with multi-crossing resolution by objective comparison.

    Sweep-oriented variant: where ``solve_best_response`` raises the
    ambiguous-equilibrium error, this solves every bracketed crossing, adds
    the domain corners, and returns the candidate with the highest creator
    objective (flagged in the report's warnings).
    """
    try:
        return solve_best_response(policy, creator, continuation, tol=tol)
    except AmbiguousEquilibriumError as exc:

        def f(mu: float) -> float:
            return gap(mu, policy, creator, continuation)

        candidates = [creator.mu_low, creator.mu_high]
        for blo, bhi in exc.brackets:
            if blo == bhi:
                candidates.append(blo)
            elif f(blo) < 0.0 < f(bhi):  # rising crossings are the local maxima
                candidates.append(
                    _bracketed_root(f, blo, bhi, f(blo), f(bhi), tol * creator.kappa)
                )
        best = max(
            candidates, key=lambda m: creator_objective(m, policy, creator, continuation)
        )
        corner = "interior"
        if best == creator.mu_low:
            corner = "low"
        elif best == creator.mu_high:
            corner = "high"
        return _report_at(
            best,
            corner,
            policy,
            creator,
            continuation,
            False,
            ("multiple stationary points; selected the global optimum",),
        )


def solve_first_best(
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
    tol: float = 1e-9,
) -> FirstBestReport:
    """Planner's target quality: internalizes the full surplus, ignores alpha and B."""
    try:
        reg = check_regularity(
            Policy(q=policy.q, pass_model=policy.pass_model, bounty=0.0),
            CreatorPrimitives(
                alpha=1.0,
                kappa=creator.kappa,
                mu0=creator.mu0,
                mu_low=creator.mu_low,
                mu_high=creator.mu_high,
            ),
            continuation,
        )
        regularity_ok: Optional[bool] = reg.satisfied
    except UnsupportedModelError:
        regularity_ok = None

    def f(mu: float) -> float:
        return _planner_gap(mu, policy, creator, continuation)

    # the planner's gap equals the private gap with alpha=1 and B=0, so the
    # sign-change scan reuses the private machinery with those substitutions
    scan_policy = Policy(q=policy.q, pass_model=policy.pass_model, bounty=0.0)
    scan_creator = replace(creator, alpha=1.0)
    mu, corner, _ = _solve_gap(
        f, scan_policy, scan_creator, continuation, tol, regularity_ok
    )
    return FirstBestReport(
        mu_fb=mu,
        corner=corner,
        p=frontier.tail(policy.pass_model, mu),
        p_prime=frontier.slope(policy.pass_model, mu),
    )


def implement_bounty(
    creator: CreatorPrimitives,
    policy: Policy,
    continuation: ContinuationLandscape,
    mu_fb: float,
    tol: float = 1e-9,
    verify: bool = True,
) -> float:
    """Closed-form discovery bounty that implements the planner's target.

    Raises ``FlatFrontierError`` when the slope at the target is numerically
    zero: no finite pass-contingent payment can move the margin there.
    """
    dp = frontier.slope(policy.pass_model, mu_fb)
    if dp <= _SLOPE_FLOOR:
        raise FlatFrontierError(
            f"slope {dp:.3g} at mu_fb={mu_fb:.4f} is too flat; reposition the bar"
        )
    p = frontier.tail(policy.pass_model, mu_fb)
    numer = (
        policy.q + continuation.h0 + continuation.dh * p + mu_fb * continuation.dh * dp
    )
    b_star = numer * (1.0 - creator.alpha) / dp
    if verify and b_star > 0.0:
        check = solve_best_response(
            Policy(q=policy.q, pass_model=policy.pass_model, bounty=b_star),
            creator,
            continuation,
            tol=tol,
        )
        if abs(check.mu_star - mu_fb) > max(10.0 * tol, 1e-6):
            raise InvalidInputError(
                f"bounty verification failed: re-solved mu*={check.mu_star:.6f} "
                f"vs target {mu_fb:.6f}"
            )
    return b_star


def expected_payout(bounty: float, model: PassModel, mu: float) -> float:
    """Expected cash spend B * P(mu): the bounty is paid only upon graduation."""
    if bounty < 0.0:
        raise InvalidInputError("bounty must be nonnegative")
    return bounty * frontier.tail(model, mu)


def targeting_compare(
    epsilon: float,
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
    mu_star: float,
) -> TargetingComparison:
    """Cost of buying an epsilon incentive bump: pass bounty vs flat testing subsidy.

    The hit-based increment costs eps/Lambda in expected payout; the flat
    per-success subsidy costs eps*mu.  Hit-based dominates exactly when the
    leverage ratio is at least 1/mu.
    """
    if epsilon < 0.0:
        raise InvalidInputError("epsilon must be nonnegative")
    if policy.q <= 0.0:
        raise InvalidInputError("flat testing subsidy needs q > 0")
    p = frontier.tail(policy.pass_model, mu_star)
    if p <= 1e-12 or p >= 1.0 - 1e-12:
        raise DegeneratePassRateError(
            f"pass probability {p:.3g} saturated at mu={mu_star}"
        )
    dp = frontier.slope(policy.pass_model, mu_star)
    if dp <= 0.0:
        raise FlatFrontierError("slope is zero at the equilibrium")
    lev = dp / p
    return TargetingComparison(
        cost_bounty=epsilon / lev,
        cost_flat=epsilon * mu_star,
        hit_dominates=lev >= 1.0 / mu_star,
        leverage=lev,
    )


def welfare(scenario: Scenario, mu: float) -> float:
    """Platform objective mu*[q + H0 + dH*P(mu)] - B*P(mu)."""
    p = frontier.tail(scenario.policy.pass_model, mu)
    cont = scenario.continuation
    return (
        mu * (scenario.policy.q + cont.h0 + cont.dh * p)
        - scenario.policy.bounty * p
    )
