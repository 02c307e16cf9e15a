"""Pass-probability frontiers for graduation bars.

The central objects of the whole toolkit: the probability ``P(mu)`` that a
creator of quality ``mu`` clears an early-testing bar, its slope ``P'(mu)``
(the incentive statistic), its curvature ``P''(mu)``, and the leverage ratio
``P'/P`` that governs how efficiently pass-contingent dollars buy effort.

Six signal structures are supported behind one ``PassModel`` union:

* ``Binomial``          -- plain success-count bar, S ~ Bin(q, mu), pass iff S >= s.
* ``Linked``            -- per-trial success chance is an increasing link psi(mu).
* ``PoissonBinomial``   -- heterogeneous per-slot probabilities (contexts differ).
* ``Noisy``             -- misclassified outcomes with false-negative / false-positive rates.
* ``Mixture``           -- exchangeable over-dispersion via a finite latent-propensity sample.
* ``NormalApprox``      -- continuity-corrected normal surrogate for moderate/large windows.

All values are immutable after construction and every operation is a pure
function, so everything here is safe to call from parallel parameter sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegeneratePassRateError,
    InvalidInputError,
    UnsupportedModelError,
)

__all__ = [
    "BinomialBar",
    "LinkFn",
    "SlotProbabilities",
    "NoiseRates",
    "MixtureSpec",
    "Binomial",
    "Linked",
    "PoissonBinomial",
    "Noisy",
    "Mixture",
    "NormalApprox",
    "PassModel",
    "tail",
    "slope",
    "curvature",
    "leverage",
    "mode_location",
    "normal_surrogate_error",
    "regularized_incomplete_beta",
    "binomial_tail_pmf",
    "pass_model_to_dict",
    "pass_model_from_dict",
]

_DEGENERATE_EPS = 1e-12
_PROB_FLOOR = 1e-12
_PROB_CEIL = 1.0 - 1e-12


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_cf(a: float, b: float, x: float, tol: float = 1e-14, max_iter: int = 300) -> float:
    """Continued fraction for the incomplete beta, by the modified Lentz method."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), evaluated by continued fraction with the symmetry switch at a/(a+b)."""
    if a <= 0 or b <= 0:
        raise InvalidInputError(f"incomplete beta requires a, b > 0, got a={a}, b={b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b)
    front = math.exp(log_front)
    if x <= a / (a + b):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def binomial_tail_pmf(q: int, s: int, p: float) -> float:
    """Pr[Bin(q, p) >= s] by direct pmf summation (the second of the two exact paths)."""
    if s <= 0:
        return 1.0
    if s > q:
        return 0.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    log_p = math.log(p)
    log_1mp = math.log1p(-p)
    total = 0.0
    for k in range(s, q + 1):
        log_term = (
            math.lgamma(q + 1) - math.lgamma(k + 1) - math.lgamma(q - k + 1)
            + k * log_p + (q - k) * log_1mp
        )
        total += math.exp(log_term)
    return min(total, 1.0)


def binomial_tail(q: int, s: int, p: float) -> float:
    """Pr[Bin(q, p) >= s] via the identity with the regularized incomplete beta."""
    if s <= 0:
        return 1.0
    if s > q:
        return 0.0
    return regularized_incomplete_beta(float(s), float(q - s + 1), p)


def beta_density(q: int, s: int, p):
    """Density of Beta(s, q-s+1) at p; the exact slope of the binomial tail in p.

    Accepts scalars or numpy arrays with entries in (0, 1).
    """
    if s <= 0 or s > q:
        return np.zeros_like(p, dtype=float) if isinstance(p, np.ndarray) else 0.0
    a, b = s, q - s + 1
    t = -_log_beta(a, b)
    if isinstance(p, np.ndarray):
        acc = np.full_like(p, t, dtype=float)
        if a != 1:
            acc = acc + (a - 1) * np.log(p)
        if b != 1:
            acc = acc + (b - 1) * np.log1p(-p)
        return np.exp(acc)
    if a != 1:
        t += (a - 1) * math.log(p)
    if b != 1:
        t += (b - 1) * math.log1p(-p)
    return math.exp(t)


def beta_density_deriv(q: int, s: int, p):
    """d/dp of the Beta(s, q-s+1) density: the binomial tail's curvature in p."""
    if s <= 0 or s > q:
        return np.zeros_like(p, dtype=float) if isinstance(p, np.ndarray) else 0.0
    log_norm = -_log_beta(s, q - s + 1)
    use_np = isinstance(p, np.ndarray)
    exp = np.exp if use_np else math.exp
    log = np.log if use_np else math.log
    log1p = np.log1p if use_np else math.log1p

    def _power_term(coef: float, pe: int, qe: int):
        # coef * p**pe * (1-p)**qe, in log space; coef >= 0 and integer exponents
        if coef == 0:
            return np.zeros_like(p, dtype=float) if use_np else 0.0
        acc = log_norm + math.log(coef)
        if pe != 0:
            acc = acc + pe * log(p)
        if qe != 0:
            acc = acc + qe * log1p(-p)
        return exp(acc)

    term1 = _power_term(float(s - 1), s - 2, q - s)
    term2 = _power_term(float(q - s), s - 1, q - s - 1)
    return term1 - term2


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinomialBar:
    """A graduation bar: q testing trials, pass iff at least s successes.

    When constructed from a posted success-rate target ``mu_bar``, the integer
    threshold is the smallest integer at or above ``q * mu_bar``; a 1e-12
    nudge before the ceiling keeps the threshold bit-stable across platforms.
    """

    q: int
    s: int
    mu_bar: Optional[float] = None
    allow_zero_threshold: bool = False

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 1:
            raise ConfigurationError(f"q must be a positive integer, got {self.q!r}")
        if not isinstance(self.s, int):
            raise ConfigurationError(f"s must be an integer, got {self.s!r}")
        lo = 0 if self.allow_zero_threshold else 1
        if not lo <= self.s <= self.q:
            raise ConfigurationError(
                f"threshold s={self.s} outside {{{lo}..{self.q}}} for q={self.q}"
            )
        if self.mu_bar is not None:
            if not 0.0 < self.mu_bar < 1.0:
                raise ConfigurationError(f"mu_bar must lie in (0,1), got {self.mu_bar}")
            if self.s != threshold_from_bar(self.q, self.mu_bar):
                raise ConfigurationError(
                    f"s={self.s} inconsistent with ceil(q*mu_bar)="
                    f"{threshold_from_bar(self.q, self.mu_bar)}"
                )

    @classmethod
    def from_bar(cls, q: int, mu_bar: float) -> "BinomialBar":
        return cls(q=q, s=threshold_from_bar(q, mu_bar), mu_bar=mu_bar)

    @classmethod
    def always_pass(cls, q: int) -> "BinomialBar":
        """Degenerate s=0 bar (tail 1, slope 0); only for calibration sweeps."""
        return cls(q=q, s=0, allow_zero_threshold=True)


def threshold_from_bar(q: int, mu_bar: float) -> int:
    return max(1, math.ceil(q * mu_bar - 1e-12))


@dataclass(frozen=True)
class LinkFn:
    """Named increasing differentiable link from quality to per-trial success chance.

    Built-ins: ``identity``; ``affine`` with params (a, b) mapping mu -> a*mu + b
    clipped into (0,1); ``logistic`` with params (rate, center).
    """

    name: str
    params: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.name not in ("identity", "affine", "logistic"):
            raise ConfigurationError(f"unknown link {self.name!r}")
        n_expected = {"identity": 0, "affine": 2, "logistic": 2}[self.name]
        if len(self.params) != n_expected:
            raise ConfigurationError(
                f"link {self.name!r} takes {n_expected} params, got {len(self.params)}"
            )
        if self.name == "affine" and self.params[0] <= 0:
            raise ConfigurationError("affine link requires slope a > 0")
        if self.name == "logistic" and self.params[0] <= 0:
            raise ConfigurationError("logistic link requires rate > 0")

    def value(self, mu: float, shift: float = 0.0) -> float:
        if self.name == "identity":
            raw = mu + shift
        elif self.name == "affine":
            a, b = self.params
            raw = a * mu + b + shift
        else:
            rate, center = self.params
            raw = 1.0 / (1.0 + math.exp(-rate * (mu - center))) + shift
        return min(max(raw, _PROB_FLOOR), _PROB_CEIL)

    def deriv(self, mu: float, shift: float = 0.0) -> float:
        raw_unclipped = self.value(mu, shift)
        if raw_unclipped <= _PROB_FLOOR or raw_unclipped >= _PROB_CEIL:
            return 0.0
        if self.name == "identity":
            return 1.0
        if self.name == "affine":
            return self.params[0]
        rate, center = self.params
        sig = 1.0 / (1.0 + math.exp(-rate * (mu - center)))
        return rate * sig * (1.0 - sig)

    def second(self, mu: float, shift: float = 0.0) -> float:
        raw = self.value(mu, shift)
        if raw <= _PROB_FLOOR or raw >= _PROB_CEIL:
            return 0.0
        if self.name in ("identity", "affine"):
            return 0.0
        rate, center = self.params
        sig = 1.0 / (1.0 + math.exp(-rate * (mu - center)))
        return rate * rate * sig * (1.0 - sig) * (1.0 - 2.0 * sig)


@dataclass(frozen=True)
class SlotProbabilities:
    """Per-slot success probabilities for a heterogeneous testing window.

    ``p`` holds the slot probabilities at the operating point and ``dp`` the
    per-slot sensitivities to quality.  When ``mu_ref`` is given, the window
    responds to quality through the local-linear map
    ``p_t(mu) = p_t + dp_t * (mu - mu_ref)``; without it the window is
    anchored at the operating point and tail/slope are evaluated there
    regardless of the ``mu`` argument.
    """

    p: Tuple[float, ...]
    dp: Optional[Tuple[float, ...]] = None
    theta: Optional[Tuple[float, ...]] = None
    mu_ref: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        if len(self.p) == 0:
            raise ConfigurationError("slot probability vector is empty")
        if any(not 0.0 < v < 1.0 for v in self.p):
            raise ConfigurationError("slot probabilities must lie in (0,1)")
        if self.dp is not None:
            object.__setattr__(self, "dp", tuple(float(v) for v in self.dp))
            if len(self.dp) != len(self.p):
                raise ConfigurationError("dp length must match p")
            if any(v < 0.0 for v in self.dp):
                raise ConfigurationError("slot sensitivities must be nonnegative")
        if self.theta is not None:
            object.__setattr__(self, "theta", tuple(float(v) for v in self.theta))
            if len(self.theta) != len(self.p):
                raise ConfigurationError("theta length must match p")
            if any(not 0.0 < v <= 1.0 for v in self.theta):
                raise ConfigurationError("drift weights must lie in (0,1]")

    @property
    def n_slots(self) -> int:
        return len(self.p)

    def probs_at(self, mu: float) -> Tuple[float, ...]:
        if self.dp is None or self.mu_ref is None:
            return self.p
        d = mu - self.mu_ref
        return tuple(
            min(max(pt + dt * d, _PROB_FLOOR), _PROB_CEIL)
            for pt, dt in zip(self.p, self.dp)
        )

    def sensitivities_at(self, mu: float) -> Tuple[float, ...]:
        """Effective dp at mu: slots clipped at the probability bounds go flat."""
        if self.dp is None:
            raise ConfigurationError("slot sensitivities dp not supplied")
        if self.mu_ref is None:
            return self.dp
        d = mu - self.mu_ref
        out = []
        for pt, dt in zip(self.p, self.dp):
            raw = pt + dt * d
            out.append(0.0 if raw <= _PROB_FLOOR or raw >= _PROB_CEIL else dt)
        return tuple(out)


@dataclass(frozen=True)
class NoiseRates:
    """Misclassification rates: eta0 false negatives, eta1 false positives."""

    eta0: float
    eta1: float

    def __post_init__(self):
        if not 0.0 <= self.eta0 < 1.0 or not 0.0 <= self.eta1 < 1.0:
            raise ConfigurationError("noise rates must lie in [0,1)")
        if self.eta0 + self.eta1 >= 1.0:
            raise ConfigurationError("eta0 + eta1 must be < 1")

    @property
    def attenuation(self) -> float:
        return 1.0 - self.eta0 - self.eta1

    def transform(self, p: float) -> float:
        return self.attenuation * p + self.eta1


@dataclass(frozen=True)
class MixtureSpec:
    """Finite latent-propensity sample for exchangeable over-dispersion.

    Each component shifts the base link's output by ``eps`` (clipped into
    (0,1)); weights are nonnegative and sum to one.  The caller discretizes
    the latent distribution; no adaptive quadrature is attempted, so results
    are deterministic functions of the supplied sample.
    """

    link: LinkFn
    eps: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "eps", tuple((float(e), float(w)) for e, w in self.eps)
        )
        if len(self.eps) == 0:
            raise ConfigurationError("mixture needs at least one component")
        weights = [w for _, w in self.eps]
        if any(w < 0.0 for w in weights):
            raise ConfigurationError("mixture weights must be nonnegative")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ConfigurationError(f"mixture weights sum to {sum(weights)}, not 1")


@dataclass(frozen=True)
class Binomial:
    bar: BinomialBar


@dataclass(frozen=True)
class Linked:
    bar: BinomialBar
    link: LinkFn


@dataclass(frozen=True)
class PoissonBinomial:
    slots: SlotProbabilities
    s: int

    def __post_init__(self):
        if not 1 <= self.s <= self.slots.n_slots:
            raise ConfigurationError(
                f"threshold s={self.s} outside {{1..{self.slots.n_slots}}}"
            )


@dataclass(frozen=True)
class Noisy:
    inner: "PassModel"
    noise: NoiseRates

    def __post_init__(self):
        if isinstance(self.inner, Noisy):
            raise ConfigurationError("Noisy models cannot nest")
        if isinstance(self.inner, NormalApprox):
            raise ConfigurationError("NormalApprox cannot appear inside Noisy")


@dataclass(frozen=True)
class Mixture:
    bar: BinomialBar
    spec: MixtureSpec


@dataclass(frozen=True)
class NormalApprox:
    base: Union[BinomialBar, SlotProbabilities]
    s: int

    def __post_init__(self):
        n = self.base.q if isinstance(self.base, BinomialBar) else self.base.n_slots
        if not 1 <= self.s <= n:
            raise ConfigurationError(f"threshold s={self.s} outside {{1..{n}}}")


PassModel = Union[Binomial, Linked, PoissonBinomial, Noisy, Mixture, NormalApprox]


def _check_mu(mu: float) -> float:
    mu = float(mu)
    if not 0.0 < mu < 1.0 or not math.isfinite(mu):
        raise InvalidInputError(f"quality mu must lie in (0,1), got {mu}")
    return mu


# ---------------------------------------------------------------------------
# Poisson-Binomial machinery
# ---------------------------------------------------------------------------

def poisson_binomial_pmf(probs: Sequence[float]) -> np.ndarray:
    """Exact pmf of a sum of independent Bernoullis by O(q^2) convolution."""
    pmf = np.zeros(len(probs) + 1)
    pmf[0] = 1.0
    n = 0
    for p in probs:
        pmf[1 : n + 2] = pmf[1 : n + 2] * (1.0 - p) + pmf[0 : n + 1] * p
        pmf[0] *= 1.0 - p
        n += 1
    return pmf


def poisson_binomial_tail(probs: Sequence[float], s: int) -> float:
    if s <= 0:
        return 1.0
    if s > len(probs):
        return 0.0
    pmf = poisson_binomial_pmf(probs)
    # summing from the small end of the pmf keeps the subtraction benign
    head = float(np.sum(pmf[:s]))
    tail_sum = float(np.sum(pmf[s:]))
    return tail_sum if tail_sum <= head else 1.0 - head


def _leave_one_out_pmf(pmf: np.ndarray, p: float) -> np.ndarray:
    """Deconvolve one Bernoulli(p) slot out of a Poisson-Binomial pmf.

    Forward recursion is stable for p < 1/2, backward for p >= 1/2 (the
    amplification ratio stays below one in each case).
    """
    n = len(pmf) - 1  # remaining support is 0..n-1
    out = np.empty(n)
    if p < 0.5:
        out[0] = pmf[0] / (1.0 - p)
        for k in range(1, n):
            out[k] = (pmf[k] - p * out[k - 1]) / (1.0 - p)
    else:
        out[n - 1] = pmf[n] / p
        for k in range(n - 1, 0, -1):
            out[k - 1] = (pmf[k] - (1.0 - p) * out[k]) / p
    return out


def influence_weights(probs: Sequence[float], s: int) -> np.ndarray:
    """Pr[sum excluding slot t equals s-1], for every slot t.

    These are the weights in the Poisson-Binomial slope identity: a success
    in slot t pivots the pass decision exactly when the other slots sum to
    s-1.
    """
    probs = list(probs)
    if not 1 <= s <= len(probs):
        raise ConfigurationError(f"threshold s={s} outside {{1..{len(probs)}}}")
    pmf = poisson_binomial_pmf(probs)
    weights = np.empty(len(probs))
    for t, p in enumerate(probs):
        loo = _leave_one_out_pmf(pmf, p)
        w = loo[s - 1]
        if not 0.0 <= w <= 1.0 + 1e-9:
            # deconvolution lost accuracy for this slot; fall back to a direct pass
            loo = poisson_binomial_pmf(probs[:t] + probs[t + 1 :])
            w = loo[s - 1]
        weights[t] = min(max(w, 0.0), 1.0)
    return weights


def poisson_binomial_slope(probs: Sequence[float], dprobs: Sequence[float], s: int) -> float:
    w = influence_weights(probs, s)
    return float(np.dot(np.asarray(dprobs, dtype=float), w))


# ---------------------------------------------------------------------------
# normal surrogate
# ---------------------------------------------------------------------------

def _moments(model: NormalApprox, mu: float):
    """(m, v, m', v') of the success count under the surrogate's base window."""
    if isinstance(model.base, BinomialBar):
        n = model.base.q
        m = n * mu
        v = n * mu * (1.0 - mu)
        dm = float(n)
        dv = n * (1.0 - 2.0 * mu)
        return m, v, dm, dv
    slots = model.base
    p = np.asarray(slots.probs_at(mu))
    dp = (
        np.asarray(slots.sensitivities_at(mu))
        if slots.dp is not None
        else np.zeros_like(p)
    )
    m = float(np.sum(p))
    v = float(np.sum(p * (1.0 - p)))
    dm = float(np.sum(dp))
    dv = float(np.sum(dp * (1.0 - 2.0 * p)))
    return m, v, dm, dv


def _normal_tail(model: NormalApprox, mu: float) -> float:
    m, v, _, _ = _moments(model, mu)
    if v <= 0.0:
        return 1.0 if m >= model.s else 0.0
    z = (model.s - m) / math.sqrt(v)
    return min(max(1.0 - _norm_cdf(z - 0.5 / math.sqrt(v)), 0.0), 1.0)


def _normal_slope(model: NormalApprox, mu: float) -> float:
    m, v, dm, dv = _moments(model, mu)
    if v <= 0.0:
        return 0.0
    z = (model.s - m) / math.sqrt(v)
    return _norm_pdf(z) * (dm / math.sqrt(v) + (model.s - m) * dv / (2.0 * v ** 1.5))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def _linked_parts(model: PassModel):
    """Reduce Binomial/Linked/Noisy-of-those to (q, s, p(mu), psi', psi'')."""
    if isinstance(model, Binomial):
        bar = model.bar
        return bar.q, bar.s, (lambda mu: mu), (lambda mu: 1.0), (lambda mu: 0.0)
    if isinstance(model, Linked):
        bar, link = model.bar, model.link
        return bar.q, bar.s, link.value, link.deriv, link.second
    raise UnsupportedModelError(f"not a link-reducible model: {type(model).__name__}")


def tail(model: PassModel, mu: float) -> float:
    """Pass probability P(mu)."""
    mu = _check_mu(mu)
    if isinstance(model, Binomial):
        if model.bar.s == 0:
            return 1.0
        return binomial_tail(model.bar.q, model.bar.s, mu)
    if isinstance(model, Linked):
        if model.bar.s == 0:
            return 1.0
        return binomial_tail(model.bar.q, model.bar.s, model.link.value(mu))
    if isinstance(model, PoissonBinomial):
        return poisson_binomial_tail(model.slots.probs_at(mu), model.s)
    if isinstance(model, Noisy):
        return _noisy_tail(model, mu)
    if isinstance(model, Mixture):
        bar, spec = model.bar, model.spec
        return sum(
            w * binomial_tail(bar.q, bar.s, spec.link.value(mu, shift=e))
            for e, w in spec.eps
        )
    if isinstance(model, NormalApprox):
        return _normal_tail(model, mu)
    raise UnsupportedModelError(f"unknown pass model {type(model).__name__}")


def _noisy_tail(model: Noisy, mu: float) -> float:
    inner, noise = model.inner, model.noise
    if isinstance(inner, (Binomial, Linked)):
        q, s, psi, _, _ = _linked_parts(inner)
        if s == 0:
            return 1.0
        return binomial_tail(q, s, noise.transform(psi(mu)))
    if isinstance(inner, PoissonBinomial):
        probs = [noise.transform(p) for p in inner.slots.probs_at(mu)]
        return poisson_binomial_tail(probs, inner.s)
    if isinstance(inner, Mixture):
        bar, spec = inner.bar, inner.spec
        return sum(
            w * binomial_tail(bar.q, bar.s, noise.transform(spec.link.value(mu, shift=e)))
            for e, w in spec.eps
        )
    raise UnsupportedModelError(f"Noisy cannot wrap {type(inner).__name__}")


def slope(model: PassModel, mu: float) -> float:
    """Slope P'(mu) of the pass probability; the core incentive statistic."""
    mu = _check_mu(mu)
    if isinstance(model, Binomial):
        return beta_density(model.bar.q, model.bar.s, mu)
    if isinstance(model, Linked):
        p = model.link.value(mu)
        return model.link.deriv(mu) * beta_density(model.bar.q, model.bar.s, p)
    if isinstance(model, PoissonBinomial):
        if model.slots.dp is None:
            raise ConfigurationError(
                "PoissonBinomial slope requires per-slot sensitivities dp"
            )
        return poisson_binomial_slope(
            model.slots.probs_at(mu), model.slots.sensitivities_at(mu), model.s
        )
    if isinstance(model, Noisy):
        return _noisy_slope(model, mu)
    if isinstance(model, Mixture):
        bar, spec = model.bar, model.spec
        return sum(
            w
            * spec.link.deriv(mu, shift=e)
            * beta_density(bar.q, bar.s, spec.link.value(mu, shift=e))
            for e, w in spec.eps
        )
    if isinstance(model, NormalApprox):
        return _normal_slope(model, mu)
    raise UnsupportedModelError(f"unknown pass model {type(model).__name__}")


def _noisy_slope(model: Noisy, mu: float) -> float:
    inner, noise = model.inner, model.noise
    att = noise.attenuation
    if isinstance(inner, (Binomial, Linked)):
        q, s, psi, dpsi, _ = _linked_parts(inner)
        return att * dpsi(mu) * beta_density(q, s, noise.transform(psi(mu)))
    if isinstance(inner, PoissonBinomial):
        if inner.slots.dp is None:
            raise ConfigurationError(
                "PoissonBinomial slope requires per-slot sensitivities dp"
            )
        probs = [noise.transform(p) for p in inner.slots.probs_at(mu)]
        dprobs = [att * d for d in inner.slots.sensitivities_at(mu)]
        return poisson_binomial_slope(probs, dprobs, inner.s)
    if isinstance(inner, Mixture):
        bar, spec = inner.bar, inner.spec
        return sum(
            w
            * att
            * spec.link.deriv(mu, shift=e)
            * beta_density(bar.q, bar.s, noise.transform(spec.link.value(mu, shift=e)))
            for e, w in spec.eps
        )
    raise UnsupportedModelError(f"Noisy cannot wrap {type(inner).__name__}")


def curvature(model: PassModel, mu: float) -> float:
    """Curvature P''(mu); closed form for Binomial and Linked bars only."""
    mu = _check_mu(mu)
    if isinstance(model, Binomial):
        return beta_density_deriv(model.bar.q, model.bar.s, mu)
    if isinstance(model, Linked):
        bar, link = model.bar, model.link
        p = link.value(mu)
        dpsi = link.deriv(mu)
        return link.second(mu) * beta_density(bar.q, bar.s, p) + dpsi * dpsi * beta_density_deriv(bar.q, bar.s, p)
    raise UnsupportedModelError(
        f"curvature is not implemented for the {_variant_name(model)} variant"
    )


def leverage(model: PassModel, mu: float) -> float:
    """Leverage ratio P'(mu) / P(mu): the diagnosticity of the pass event."""
    p = tail(model, mu)
    if p <= _DEGENERATE_EPS or p >= 1.0 - _DEGENERATE_EPS:
        raise DegeneratePassRateError(
            f"pass probability {p:.3g} is saturated at mu={mu}; the bar is mistuned"
        )
    return slope(model, mu) / p


def mode_location(bar: BinomialBar) -> float:
    """Quality at which the slope peaks: (s-1)/(q-1) for an interior threshold."""
    if not 1 < bar.s < bar.q:
        raise InvalidInputError(
            f"slope has no interior mode for s={bar.s}, q={bar.q}"
        )
    return (bar.s - 1) / (bar.q - 1)


def normal_surrogate_error(
    base: Union[SlotProbabilities, BinomialBar], s: int, mu: float
) -> float:
    """|exact tail - continuity-corrected normal tail| for the given window."""
    mu = _check_mu(mu)
    approx = NormalApprox(base=base, s=s)
    if isinstance(base, BinomialBar):
        exact = binomial_tail_pmf(base.q, s, mu)
    else:
        exact = poisson_binomial_tail(base.probs_at(mu), s)
    return abs(exact - _normal_tail(approx, mu))


def _variant_name(model: PassModel) -> str:
    return {
        Binomial: "binomial",
        Linked: "linked",
        PoissonBinomial: "poisson_binomial",
        Noisy: "noisy",
        Mixture: "mixture",
        NormalApprox: "normal_approx",
    }[type(model)]


# ---------------------------------------------------------------------------
# tagged JSON serialization
# ---------------------------------------------------------------------------

def pass_model_to_dict(model: PassModel) -> dict:
    kind = _variant_name(model)
    if isinstance(model, Binomial):
        out = {"kind": kind, "q": model.bar.q, "s": model.bar.s}
        if model.bar.mu_bar is not None:
            out["mu_bar"] = model.bar.mu_bar
        return out
    if isinstance(model, Linked):
        return {
            "kind": kind,
            "q": model.bar.q,
            "s": model.bar.s,
            "link": {"name": model.link.name, "params": list(model.link.params)},
        }
    if isinstance(model, PoissonBinomial):
        out = {"kind": kind, "p": list(model.slots.p), "s": model.s}
        if model.slots.dp is not None:
            out["dp"] = list(model.slots.dp)
        if model.slots.theta is not None:
            out["theta"] = list(model.slots.theta)
        if model.slots.mu_ref is not None:
            out["mu_ref"] = model.slots.mu_ref
        return out
    if isinstance(model, Noisy):
        return {
            "kind": kind,
            "inner": pass_model_to_dict(model.inner),
            "eta0": model.noise.eta0,
            "eta1": model.noise.eta1,
        }
    if isinstance(model, Mixture):
        return {
            "kind": kind,
            "q": model.bar.q,
            "s": model.bar.s,
            "link": {"name": model.spec.link.name, "params": list(model.spec.link.params)},
            "eps": [[e, w] for e, w in model.spec.eps],
        }
    if isinstance(model, NormalApprox):
        if isinstance(model.base, BinomialBar):
            return {"kind": kind, "q": model.base.q, "s": model.s}
        out = {"kind": kind, "p": list(model.base.p), "s": model.s}
        if model.base.dp is not None:
            out["dp"] = list(model.base.dp)
        if model.base.mu_ref is not None:
            out["mu_ref"] = model.base.mu_ref
        return out
    raise UnsupportedModelError(f"cannot serialize {type(model).__name__}")


def _link_from_dict(obj: dict) -> LinkFn:
    return LinkFn(name=obj["name"], params=tuple(obj.get("params", ())))


def pass_model_from_dict(obj: dict) -> PassModel:
    kind = obj.get("kind")
    if kind == "binomial":
        if "s" in obj:
            return Binomial(BinomialBar(q=obj["q"], s=obj["s"], mu_bar=obj.get("mu_bar")))
        return Binomial(BinomialBar.from_bar(obj["q"], obj["mu_bar"]))
    if kind == "linked":
        bar = BinomialBar(q=obj["q"], s=obj["s"])
        return Linked(bar=bar, link=_link_from_dict(obj["link"]))
    if kind == "poisson_binomial":
        slots = SlotProbabilities(
            p=tuple(obj["p"]),
            dp=tuple(obj["dp"]) if obj.get("dp") is not None else None,
            theta=tuple(obj["theta"]) if obj.get("theta") is not None else None,
            mu_ref=obj.get("mu_ref"),
        )
        return PoissonBinomial(slots=slots, s=obj["s"])
    if kind == "noisy":
        return Noisy(
            inner=pass_model_from_dict(obj["inner"]),
            noise=NoiseRates(eta0=obj["eta0"], eta1=obj["eta1"]),
        )
    if kind == "mixture":
        bar = BinomialBar(q=obj["q"], s=obj["s"])
        spec = MixtureSpec(
            link=_link_from_dict(obj["link"]),
            eps=tuple((e, w) for e, w in obj["eps"]),
        )
        return Mixture(bar=bar, spec=spec)
    if kind == "normal_approx":
        if "p" in obj:
            base = SlotProbabilities(
                p=tuple(obj["p"]),
                dp=tuple(obj["dp"]) if obj.get("dp") is not None else None,
                mu_ref=obj.get("mu_ref"),
            )
        else:
            base = BinomialBar(q=obj["q"], s=obj["s"])
        return NormalApprox(base=base, s=obj["s"])
    raise ConfigurationError(f"unknown pass model kind {kind!r}")
