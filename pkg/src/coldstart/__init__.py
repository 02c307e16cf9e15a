"""Incentive design toolkit for creator cold-start policies.

Core objects: pass-probability frontiers over graduation bars
(:mod:`coldstart.frontier`), the creator/planner equilibrium calculus and
the discovery bounty (:mod:`coldstart.equilibrium`), testing-schedule
arithmetic (:mod:`coldstart.scheduling`), continuation-value estimation
(:mod:`coldstart.engines`), budget-balanced exploration
(:mod:`coldstart.budget`), and the synthetic-telemetry estimation lab
(:mod:`coldstart.telemetry`).  The CLI and HTTP service in
:mod:`coldstart.cli` and :mod:`coldstart.service` expose everything over a
shared scenario JSON schema (:mod:`coldstart.scenario`).
"""

__version__ = "0.1.0"

from .frontier import (  # noqa: F401
    Binomial,
    BinomialBar,
    LinkFn,
    Linked,
    Mixture,
    MixtureSpec,
    NoiseRates,
    Noisy,
    NormalApprox,
    PassModel,
    PoissonBinomial,
    SlotProbabilities,
    curvature,
    leverage,
    mode_location,
    normal_surrogate_error,
    slope,
    tail,
)
from .equilibrium import (  # noqa: F401
    ContinuationLandscape,
    CreatorPrimitives,
    EquilibriumReport,
    FirstBestReport,
    Policy,
    Scenario,
    check_regularity,
    gap,
    implement_bounty,
    expected_payout,
    solve_best_response,
    solve_first_best,
    targeting_compare,
    welfare,
)
from .scheduling import (  # noqa: F401
    Schedule,
    compare_schedules,
    discounted_mass,
    drift_adjusted_slots,
    earliest_schedule,
)
from .engines import (  # noqa: F401
    ContinuationEstimate,
    EngineConfig,
    RelaxationParams,
    calibrate_cohort_threshold,
    relaxation_H,
    thompson_replay,
    two_band_H,
    ucb_surrogate,
)
from .budget import (  # noqa: F401
    Budgets,
    BudgetState,
    LoopConfig,
    Segment,
    exchange_rate,
    kkt_residuals,
    mb_dollar,
    mb_q,
    primal_dual_step,
    run_balanced_loop,
    segment_waterfill,
)
from .telemetry import (  # noqa: F401
    CohortSpec,
    PassCurveFit,
    PluginSkeleton,
    QualityPrior,
    TelemetryRecord,
    bootstrap_plugin,
    fit_pass_curve,
    influence_slope,
    leverage_corridor_advice,
    simulate_cohort,
    stress_bar,
)
