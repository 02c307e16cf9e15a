"""Testing-schedule calculus: discounted mass, earliest pacing, drift weights.

A schedule places Q raw testing impressions on calendar periods.  The pass
statistic depends only on the count Q, so schedules differ solely through
the discounted mass q(tau) = sum gamma^(t_j - 1), which front-loading
maximizes.  Multiple impressions in one period are encoded as repeated
period indices (a multiset), each weighted by its period's discount factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .equilibrium import (
    ContinuationLandscape,
    CreatorPrimitives,
    Policy,
    Scenario,
    solve_best_response_global,
    welfare,
)
from .errors import InvalidInputError

__all__ = [
    "Schedule",
    "ScheduleComparison",
    "discounted_mass",
    "earliest_schedule",
    "compare_schedules",
    "drift_adjusted_slots",
    "schedule_to_dict",
    "schedule_from_dict",
]


@dataclass(frozen=True)
class Schedule:
    """Q testing impressions at the given period indices (nondecreasing, >= 1)."""

    slots: Tuple[int, ...]
    gamma: float
    cap: Optional[int] = None
    weights: Optional[Tuple[float, ...]] = None
    theta: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(int(t) for t in self.slots))
        if len(self.slots) == 0:
            raise InvalidInputError("schedule needs at least one slot")
        if any(t < 1 for t in self.slots):
            raise InvalidInputError("slot periods start at 1")
        if any(b < a for a, b in zip(self.slots, self.slots[1:])):
            raise InvalidInputError("slots must be nondecreasing")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidInputError(f"gamma must lie in (0,1), got {self.gamma}")
        if self.cap is not None:
            if self.cap < 1:
                raise InvalidInputError("per-period cap must be >= 1")
            counts = {}
            for t in self.slots:
                counts[t] = counts.get(t, 0) + 1
                if counts[t] > self.cap:
                    raise InvalidInputError(
                        f"period {t} holds {counts[t]} impressions, above cap {self.cap}"
                    )
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            object.__setattr__(self, "weights", w)
            if len(w) < max(self.slots):
                raise InvalidInputError("weight sequence shorter than the last slot")
            if any(b >= a for a, b in zip(w, w[1:])):
                raise InvalidInputError("weights must be strictly decreasing")
        if self.theta is not None:
            th = tuple(float(x) for x in self.theta)
            object.__setattr__(self, "theta", th)

    @property
    def count(self) -> int:
        return len(self.slots)


def discounted_mass(schedule: Schedule) -> float:
    """q(tau): each impression weighted by gamma^(t-1), or by w_t when supplied."""
    if schedule.weights is not None:
        return sum(schedule.weights[t - 1] for t in schedule.slots)
    return sum(schedule.gamma ** (t - 1) for t in schedule.slots)


def earliest_schedule(q_count: int, cap: Optional[int], gamma: float) -> Schedule:
    """Greedy front-loaded schedule: fill from period 1, respecting the cap."""
    if q_count < 1:
        raise InvalidInputError("need at least one impression")
    slots: List[int] = []
    period = 1
    remaining = q_count
    per_period = q_count if cap is None else cap
    while remaining > 0:
        take = min(per_period, remaining)
        slots.extend([period] * take)
        remaining -= take
        period += 1
    return Schedule(slots=tuple(slots), gamma=gamma, cap=cap)


@dataclass(frozen=True)
class ScheduleComparison:
    rows: Tuple[dict, ...]  # one per schedule: q_tau, mu_star, welfare, earliest flag
    earliest_index: int
    earliest_attains_max_mu: bool
    earliest_attains_max_welfare: bool


def compare_schedules(
    schedules: Sequence[Schedule],
    policy: Policy,
    creator: CreatorPrimitives,
    continuation: ContinuationLandscape,
    tol: float = 1e-9,
) -> ScheduleComparison:
    """Re-solve the equilibrium per schedule; the pass model is shared and fixed.

    The policy's q is replaced by each schedule's discounted mass; selection
    terms are untouched because the count Q and the bar are identical.
    """
    if not schedules:
        raise InvalidInputError("no schedules supplied")
    counts = {s.count for s in schedules}
    if len(counts) != 1:
        raise InvalidInputError(
            f"schedules must share the raw impression count, got {sorted(counts)}"
        )
    rows = []
    masses = [discounted_mass(s) for s in schedules]
    for sched, mass in zip(schedules, masses):
        scen = Scenario(
            policy=Policy(q=mass, pass_model=policy.pass_model, bounty=policy.bounty),
            creator=creator,
            continuation=continuation,
        )
        rep = solve_best_response_global(scen.policy, creator, continuation, tol=tol)
        rows.append(
            {
                "slots": sched.slots,
                "q_tau": mass,
                "mu_star": rep.mu_star,
                "welfare": welfare(scen, rep.mu_star),
            }
        )
    earliest_index = max(range(len(rows)), key=lambda i: masses[i])
    max_mu = max(r["mu_star"] for r in rows)
    max_w = max(r["welfare"] for r in rows)
    return ScheduleComparison(
        rows=tuple(rows),
        earliest_index=earliest_index,
        earliest_attains_max_mu=rows[earliest_index]["mu_star"] >= max_mu - 1e-12,
        earliest_attains_max_welfare=rows[earliest_index]["welfare"] >= max_w - 1e-9,
    )


def drift_adjusted_slots(theta: Sequence[float], q_count: int) -> Tuple[int, ...]:
    """Pick the q_count slots with the largest drift weights, earliest on ties.

    Novelty decay (nonincreasing theta) makes this the earliest q_count
    periods; increasing weights are rejected because they contradict the
    drift model.
    """
    theta = [float(x) for x in theta]
    if q_count < 1 or q_count > len(theta):
        raise InvalidInputError(
            f"q_count must lie in 1..{len(theta)}, got {q_count}"
        )
    if any(b > a + 1e-15 for a, b in zip(theta, theta[1:])):
        raise InvalidInputError("drift weights must be nonincreasing over time")
    order = sorted(range(len(theta)), key=lambda i: (-theta[i], i))
    chosen = sorted(t + 1 for t in order[:q_count])
    return tuple(chosen)


def schedule_to_dict(schedule: Schedule) -> dict:
    """Wire format: {"Q", "slots", "gamma", "cap", "weights", "theta"}."""
    return {
        "Q": schedule.count,
        "slots": list(schedule.slots),
        "gamma": schedule.gamma,
        "cap": schedule.cap,
        "weights": list(schedule.weights) if schedule.weights is not None else None,
        "theta": list(schedule.theta) if schedule.theta is not None else None,
    }


def schedule_from_dict(obj: dict) -> Schedule:
    slots = tuple(int(t) for t in obj["slots"])
    if "Q" in obj and obj["Q"] != len(slots):
        raise InvalidInputError(
            f"Q={obj['Q']} disagrees with {len(slots)} slots"
        )
    return Schedule(
        slots=slots,
        gamma=float(obj["gamma"]),
        cap=obj.get("cap"),
        weights=tuple(obj["weights"]) if obj.get("weights") else None,
        theta=tuple(obj["theta"]) if obj.get("theta") else None,
    )
