"""Synthetic cohorts and the estimation workflow for pass curves and slopes.

The desk-scale stand-in for platform telemetry: simulate entrant cohorts
under a known pass model, fit a monotone pass-probability curve (pool
adjacent violators, then triangular-kernel smoothing), cross-check the slope
with the leave-one-out influence-weights estimator, propagate uncertainty by
a nonparametric bootstrap into the plug-in bounty, and stress-test nearby
bar placements.  A small corridor advisor turns pass-rate and leverage
readings into a one-unit bar move.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import frontier
from .errors import InsufficientClassSamplesError, InvalidInputError
from .frontier import (
    Binomial,
    BinomialBar,
    Linked,
    Mixture,
    Noisy,
    PassModel,
    PoissonBinomial,
)

__all__ = [
    "QualityPrior",
    "CohortSpec",
    "TelemetryRecord",
    "PassCurveFit",
    "PluginSkeleton",
    "BootstrapSummary",
    "StressRow",
    "simulate_cohort",
    "fit_pass_curve",
    "influence_slope",
    "bootstrap_plugin",
    "stress_bar",
    "leverage_corridor_advice",
    "isotonic_fit",
]


@dataclass(frozen=True)
class QualityPrior:
    """Entrant quality distribution: point mass, uniform, or beta."""

    kind: str
    params: Tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("point", "uniform", "beta"):
            raise InvalidInputError(f"unknown prior kind {self.kind!r}")
        n = {"point": 1, "uniform": 2, "beta": 2}[self.kind]
        if len(self.params) != n:
            raise InvalidInputError(f"prior {self.kind!r} takes {n} params")
        if self.kind == "point" and not 0.0 < self.params[0] < 1.0:
            raise InvalidInputError("point-mass quality must lie in (0,1)")
        if self.kind == "uniform":
            lo, hi = self.params
            if not 0.0 < lo < hi < 1.0:
                raise InvalidInputError("uniform support must sit inside (0,1)")
        if self.kind == "beta" and any(p <= 0 for p in self.params):
            raise InvalidInputError("beta prior parameters must be positive")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "point":
            return np.full(n, self.params[0])
        if self.kind == "uniform":
            return rng.uniform(self.params[0], self.params[1], size=n)
        draws = rng.beta(self.params[0], self.params[1], size=n)
        return np.clip(draws, 1e-6, 1.0 - 1e-6)


@dataclass(frozen=True)
class CohortSpec:
    n: int
    prior: QualityPrior
    pass_model: PassModel
    proxy_a: float = 1.0
    proxy_b: float = 0.0
    sigma_proxy: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("cohort size must be >= 1")
        if self.sigma_proxy < 0.0:
            raise InvalidInputError("proxy noise must be nonnegative")


@dataclass(frozen=True)
class TelemetryRecord:
    entrant_id: int
    mu: float  # ground truth, retained for oracle checks only
    proxy: float
    outcomes: Tuple[int, ...]
    successes: int
    passed: bool


def _per_slot_probs(model: PassModel, mu: float) -> Tuple[List[float], int]:
    """Per-trial success chances and threshold for simulable models."""
    if isinstance(model, Binomial):
        return [mu] * model.bar.q, model.bar.s
    if isinstance(model, Linked):
        return [model.link.value(mu)] * model.bar.q, model.bar.s
    if isinstance(model, PoissonBinomial):
        return list(model.slots.probs_at(mu)), model.s
    if isinstance(model, Noisy):
        inner_p, s = _per_slot_probs(model.inner, mu)
        return [model.noise.transform(p) for p in inner_p], s
    raise InvalidInputError(
        f"cannot simulate per-slot outcomes for {type(model).__name__}"
    )


def simulate_cohort(spec: CohortSpec) -> List[TelemetryRecord]:
    """Draw a cohort; deterministic given the seed.

    Mixture models draw one persistent latent shift per entrant from the
    finite sample, matching the exchangeable story.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    mus = spec.prior.sample(rng, spec.n)
    model = spec.pass_model
    if isinstance(model, Mixture):
        eps_vals = np.array([e for e, _ in model.spec.eps])
        eps_w = np.array([w for _, w in model.spec.eps])
        eps_w = eps_w / eps_w.sum()
        shifts = rng.choice(eps_vals, size=spec.n, p=eps_w)
        base = Linked(bar=model.bar, link=model.spec.link)
    else:
        shifts = None
        base = model

    records = []
    for i in range(spec.n):
        mu = float(mus[i])
        if shifts is not None:
            probs = [model.spec.link.value(mu, shift=float(shifts[i]))] * model.bar.q
            s = model.bar.s
        else:
            probs, s = _per_slot_probs(base, mu)
        draws = rng.random(len(probs))
        outcomes = tuple(int(d < p) for d, p in zip(draws, probs))
        successes = sum(outcomes)
        noise = rng.normal(0.0, spec.sigma_proxy) if spec.sigma_proxy > 0 else 0.0
        records.append(
            TelemetryRecord(
                entrant_id=i,
                mu=mu,
                proxy=spec.proxy_a * mu + spec.proxy_b + noise,
                outcomes=outcomes,
                successes=successes,
                passed=successes >= s,
            )
        )
    return records


def isotonic_fit(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators: least-squares nondecreasing fit of y on sorted x.

    Expects x already sorted ascending; returns fitted values per point.
    """
    n = len(y)
    fitted = np.asarray(y, dtype=float).copy()
    weight = np.ones(n)
    # blocks as (value, weight) merged while decreasing
    values: List[float] = []
    weights: List[float] = []
    counts: List[int] = []
    for i in range(n):
        values.append(fitted[i])
        weights.append(weight[i])
        counts.append(1)
        while len(values) > 1 and values[-2] > values[-1]:
            w = weights[-2] + weights[-1]
            v = (values[-2] * weights[-2] + values[-1] * weights[-1]) / w
            c = counts[-2] + counts[-1]
            values = values[:-2] + [v]
            weights = weights[:-2] + [w]
            counts = counts[:-2] + [c]
    out = np.empty(n)
    pos = 0
    for v, c in zip(values, counts):
        out[pos : pos + c] = v
        pos += c
    return out


@dataclass(frozen=True)
class PassCurveFit:
    grid: Tuple[float, ...]
    fitted: Tuple[float, ...]
    median_proxy: float
    p_at_median: float
    slope_at_median: float
    slope_zscored: float
    bandwidth: float
    n_records: int
    unreliable_slope: bool
    warnings: Tuple[str, ...] = ()

    def evaluate(self, x: float) -> float:
        return float(np.interp(x, self.grid, self.fitted))


def _smooth_at(
    points: np.ndarray, x: np.ndarray, iso: np.ndarray, bandwidth: float
) -> np.ndarray:
    """Triangular-kernel Nadaraya-Watson of the isotonic values at given points."""
    out = np.empty(len(points))
    for j, g in enumerate(points):
        u = np.abs(x - g) / bandwidth
        w = np.clip(1.0 - u, 0.0, None)
        total = w.sum()
        if total <= 0.0:
            # empty window: nearest isotonic value
            out[j] = iso[np.argmin(np.abs(x - g))]
        else:
            out[j] = float(np.dot(w, iso) / total)
    return out


def fit_pass_curve(
    records: Sequence[TelemetryRecord],
    bandwidth: Optional[float] = None,
    grid_size: int = 201,
    min_records: int = 50,
) -> PassCurveFit:
    """Monotone pass-probability curve on the proxy, with slope at the median.

    Isotonic regression first, then fixed-bandwidth triangular-kernel
    smoothing (default bandwidth 1.06 * std(proxy) * n^(-1/5)); the slope at
    the cohort median comes from a central difference on the smoothed curve.
    """
    if not records:
        raise InvalidInputError("no records supplied")
    warnings: List[str] = []
    if len(records) < min_records:
        warnings.append(f"only {len(records)} records; fit may be unstable")
    x = np.array([r.proxy for r in records], dtype=float)
    y = np.array([1.0 if r.passed else 0.0 for r in records])
    if y.min() == y.max():
        raise InsufficientClassSamplesError(
            "degenerate cohort: every entrant " + ("passed" if y.min() == 1.0 else "failed")
        )
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    n = len(x)
    sd = float(np.std(x))
    if bandwidth is None:
        bandwidth = 1.06 * sd * n ** (-0.2) if sd > 0 else 0.0

    iso = isotonic_fit(x, y)
    if sd == 0.0 or bandwidth <= 0.0:
        # constant proxy: flat curve at the pass share, slope unusable
        share = float(y.mean())
        g = (x[0] - 0.5, x[0], x[0] + 0.5)
        return PassCurveFit(
            grid=g,
            fitted=(share, share, share),
            median_proxy=float(x[0]),
            p_at_median=share,
            slope_at_median=0.0,
            slope_zscored=0.0,
            bandwidth=0.0,
            n_records=n,
            unreliable_slope=True,
            warnings=tuple(warnings + ["constant proxy; slope estimate unreliable"]),
        )

    grid = np.linspace(x[0], x[-1], grid_size)
    smoothed = _smooth_at(grid, x, iso, bandwidth)
    smoothed = np.clip(np.maximum.accumulate(smoothed), 0.0, 1.0)

    median = float(np.median(x))
    delta = bandwidth / 2.0
    lo = max(median - delta, x[0])
    hi = min(median + delta, x[-1])
    p_lo, p_hi, p_mid = _smooth_at(np.array([lo, hi, median]), x, iso, bandwidth)
    slope = (p_hi - p_lo) / (hi - lo) if hi > lo else 0.0

    # local z-score rescale window: +/- 0.5 proxy standard deviations
    window = np.abs(x - median) <= 0.5 * sd
    local_sd = float(np.std(x[window])) if window.sum() > 1 else sd
    return PassCurveFit(
        grid=tuple(float(g) for g in grid),
        fitted=tuple(float(v) for v in smoothed),
        median_proxy=median,
        p_at_median=float(min(max(p_mid, 0.0), 1.0)),
        slope_at_median=float(slope),
        slope_zscored=float(slope * local_sd),
        bandwidth=float(bandwidth),
        n_records=n,
        unreliable_slope=bool(slope <= 0.0),
        warnings=tuple(warnings),
    )


def influence_slope(
    records: Sequence[TelemetryRecord], dp: Sequence[float], s: int
) -> float:
    """Influence-weights slope estimate: sum_t dp_t * freq[S_-t = s-1].

    Leave-one-out counts come straight from the recorded per-slot outcomes;
    a success in slot t pivots the pass decision exactly when the remaining
    slots sum to s-1.
    """
    if not records:
        raise InvalidInputError("no records supplied")
    n_slots = len(records[0].outcomes)
    if n_slots == 0:
        raise InvalidInputError(
            "records carry no per-slot outcomes; the influence estimator needs them"
        )
    dp = [float(v) for v in dp]
    if len(dp) != n_slots:
        raise InvalidInputError(f"dp has {len(dp)} entries for {n_slots} slots")
    freq = np.zeros(n_slots)
    for rec in records:
        if len(rec.outcomes) != n_slots:
            raise InvalidInputError("records disagree on the number of slots")
        for t, y_t in enumerate(rec.outcomes):
            if rec.successes - y_t == s - 1:
                freq[t] += 1.0
    freq /= len(records)
    return float(np.dot(dp, freq))


@dataclass(frozen=True)
class PluginSkeleton:
    """Scenario pieces the plug-in bounty formula needs besides the fit."""

    q: float
    dh: float
    alpha: float
    mu_fb: float
    h0: float = 0.0


def _plugin_bounty(skeleton: PluginSkeleton, p_hat: float, slope_hat: float) -> float:
    numer = (
        skeleton.q
        + skeleton.h0
        + skeleton.dh * p_hat
        + skeleton.mu_fb * skeleton.dh * slope_hat
    )
    return numer * (1.0 - skeleton.alpha) / slope_hat


@dataclass(frozen=True)
class BootstrapSummary:
    p_hat: float
    slope_hat: float
    b_star_hat: float
    spend_hat: float
    p_interval: Tuple[float, float]
    slope_interval: Tuple[float, float]
    b_star_interval: Tuple[float, float]
    spend_interval: Tuple[float, float]
    n_boot: int
    n_skipped: int
    attenuation_factor: float
    b_star_attenuated: float


def bootstrap_plugin(
    records: Sequence[TelemetryRecord],
    skeleton: PluginSkeleton,
    n_boot: int = 500,
    seed: int = 0,
    bandwidth: Optional[float] = None,
    attenuation_factor: float = 0.8,
) -> BootstrapSummary:
    """Nonparametric bootstrap over entrants into the plug-in bounty.

    Each replicate resamples entrants with replacement, refits the pass
    curve, and recomputes (P-hat, P'-hat, B*-hat, expected spend); intervals
    are the 2.5/97.5 percentiles.  Degenerate resamples (single class or a
    nonpositive slope) are skipped and counted.

    ``b_star_attenuated`` answers the conservative what-if in which label
    noise attenuates the achieved slope by ``attenuation_factor``: holding
    the target's marginal value fixed, the bounty must scale by the
    reciprocal, so 0.8 attenuation raises it by exactly 1.25.
    """
    if n_boot < 1:
        raise InvalidInputError("need at least one bootstrap replicate")
    point = fit_pass_curve(records, bandwidth=bandwidth)
    if point.slope_at_median <= 0.0:
        raise InvalidInputError("point estimate has nonpositive slope; cannot plug in")
    b_point = _plugin_bounty(skeleton, point.p_at_median, point.slope_at_median)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n = len(records)
    p_s: List[float] = []
    sl_s: List[float] = []
    b_s: List[float] = []
    sp_s: List[float] = []
    skipped = 0
    for _ in range(n_boot):
        idx = rng.integers(0, n, size=n)
        sample = [records[i] for i in idx]
        try:
            f = fit_pass_curve(sample, bandwidth=bandwidth)
        except InsufficientClassSamplesError:
            skipped += 1
            continue
        if f.slope_at_median <= 0.0:
            skipped += 1
            continue
        b = _plugin_bounty(skeleton, f.p_at_median, f.slope_at_median)
        p_s.append(f.p_at_median)
        sl_s.append(f.slope_at_median)
        b_s.append(b)
        sp_s.append(b * f.p_at_median)
    if not p_s:
        raise InsufficientClassSamplesError("every bootstrap replicate degenerated")

    def ci(vals: List[float]) -> Tuple[float, float]:
        return (
            float(np.percentile(vals, 2.5)),
            float(np.percentile(vals, 97.5)),
        )

    return BootstrapSummary(
        p_hat=point.p_at_median,
        slope_hat=point.slope_at_median,
        b_star_hat=b_point,
        spend_hat=b_point * point.p_at_median,
        p_interval=ci(p_s),
        slope_interval=ci(sl_s),
        b_star_interval=ci(b_s),
        spend_interval=ci(sp_s),
        n_boot=n_boot,
        n_skipped=skipped,
        attenuation_factor=attenuation_factor,
        b_star_attenuated=b_point / attenuation_factor,
    )


@dataclass(frozen=True)
class StressRow:
    dq: int
    ds: int
    q: int
    s: int
    p: float
    p_prime: float
    leverage: float


def stress_bar(
    bar: BinomialBar,
    mu: float,
    deltas: Sequence[Tuple[int, int]] = ((0, 1), (0, -1), (1, 0), (-1, 0)),
) -> Tuple[StressRow, ...]:
    """Frontier quantities at neighboring (q + dq, s + ds) bars, fixed mu.

    Neighbors that leave the valid 1 <= s <= q region are skipped.
    """
    rows: List[StressRow] = []
    for dq, ds in deltas:
        q2, s2 = bar.q + dq, bar.s + ds
        if q2 < 1 or not 1 <= s2 <= q2:
            continue
        model = Binomial(BinomialBar(q=q2, s=s2))
        p = frontier.tail(model, mu)
        dp = frontier.slope(model, mu)
        lev = dp / p if 1e-12 < p < 1.0 - 1e-12 else float("nan")
        rows.append(
            StressRow(dq=dq, ds=ds, q=q2, s=s2, p=p, p_prime=dp, leverage=lev)
        )
    return tuple(rows)


def stress_bar_from_records(
    records: Sequence[TelemetryRecord],
    s_deltas: Sequence[int] = (1, -1),
    base_s: Optional[int] = None,
) -> Tuple[dict, ...]:
    """Telemetry-only stress: recompute pass shares and refit under s +- 1.

    Success counts are recorded, so moving the threshold only relabels the
    pass flag; window-size changes need the model-based path.
    """
    if not records:
        raise InvalidInputError("no records supplied")
    n_slots = len(records[0].outcomes)
    if base_s is None:
        cands = [r.successes for r in records if r.passed]
        base_s = min(cands) if cands else n_slots
    rows = []
    for ds in s_deltas:
        s2 = base_s + ds
        if not 1 <= s2 <= n_slots:
            continue
        relabeled = [
            TelemetryRecord(
                entrant_id=r.entrant_id,
                mu=r.mu,
                proxy=r.proxy,
                outcomes=r.outcomes,
                successes=r.successes,
                passed=r.successes >= s2,
            )
            for r in records
        ]
        share = float(np.mean([r.passed for r in relabeled]))
        try:
            f = fit_pass_curve(relabeled)
            slope = f.slope_at_median
        except InsufficientClassSamplesError:
            slope = float("nan")
        rows.append({"ds": ds, "s": s2, "pass_share": share, "slope_at_median": slope})
    return tuple(rows)


def leverage_corridor_advice(
    leverage_hat: float,
    pass_rate: float,
    corridor: Tuple[float, float] = (0.25, 0.70),
    leverage_floor: Optional[float] = None,
) -> str:
    """One-unit bar advice from the governance corridor: hold, raise_s, or lower_s.

    The bar moves when the pass rate leaves the corridor, or when leverage
    sits below its floor while the pass rate leans toward one edge; moves
    are never more than one threshold unit per review.
    """
    lo, hi = corridor
    if not 0.0 < lo < hi:
        raise InvalidInputError(f"corridor bounds must satisfy 0 < lo < hi, got {corridor}")
    if pass_rate > hi:
        return "raise_s"
    if pass_rate < lo:
        return "lower_s"
    if leverage_floor is not None and leverage_hat < leverage_floor:
        midpoint = 0.5 * (lo + hi)
        return "raise_s" if pass_rate >= midpoint else "lower_s"
    return "hold"
