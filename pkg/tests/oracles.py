"""Independent oracles for the test suite.

Everything here is deliberately implemented from first principles with
different numerical routes than the package: exact-integer binomial pmf
via math.comb, finite differences for slopes, grid argmax of the creator's
objective for best responses, and a dense vectorized grid search for the
budget problem.  None of it imports the solver paths it is used to check.
"""

from __future__ import annotations

import math
from typing import Sequence, Tuple

import numpy as np


def tail_pmf(q: int, s: int, mu: float) -> float:
    """Pr[Bin(q, mu) >= s] by exact-coefficient summation."""
    if s <= 0:
        return 1.0
    return sum(
        math.comb(q, k) * mu**k * (1.0 - mu) ** (q - k) for k in range(s, q + 1)
    )


def tail_pmf_grid(q: int, s: int, mu: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mu)
    for k in range(s, q + 1):
        out += math.comb(q, k) * mu**k * (1.0 - mu) ** (q - k)
    return out


def slope_factorial(q: int, s: int, mu: float) -> float:
    """Closed-form slope with 1/B(s, q-s+1) from factorials."""
    inv_beta = math.factorial(q) / (math.factorial(s - 1) * math.factorial(q - s))
    return inv_beta * mu ** (s - 1) * (1.0 - mu) ** (q - s)


def slope_fd(q: int, s: int, mu: float, h: float = 1e-6) -> float:
    return (tail_pmf(q, s, mu + h) - tail_pmf(q, s, mu - h)) / (2.0 * h)


def pb_tail_bruteforce(probs: Sequence[float], s: int) -> float:
    """Poisson-Binomial tail by explicit enumeration (use only for small q)."""
    n = len(probs)
    total = 0.0
    for mask in range(1 << n):
        k = bin(mask).count("1")
        if k < s:
            continue
        pr = 1.0
        for t in range(n):
            pr *= probs[t] if (mask >> t) & 1 else 1.0 - probs[t]
        total += pr
    return total


def gap_value(
    mu: float,
    q: float,
    h0: float,
    dh: float,
    alpha: float,
    bounty: float,
    kappa: float,
    mu0: float,
    bar_q: int,
    bar_s: int,
) -> float:
    p = tail_pmf(bar_q, bar_s, mu)
    dp = slope_factorial(bar_q, bar_s, mu)
    return kappa * (mu - mu0) - (
        alpha * (q + h0 + dh * p) + alpha * mu * dh * dp + bounty * dp
    )


def best_response_bisect(
    q: float,
    h0: float,
    dh: float,
    alpha: float,
    bounty: float,
    kappa: float,
    mu0: float = 0.0,
    bar_q: int = 10,
    bar_s: int = 3,
    lo: float = 1e-4,
    hi: float = 0.999,
    iters: int = 60,
) -> float:
    """Plain bisection on the gap over [lo, hi] (corner-aware)."""

    def f(mu):
        return gap_value(mu, q, h0, dh, alpha, bounty, kappa, mu0, bar_q, bar_s)

    f_lo, f_hi = f(lo), f(hi)
    if f_lo > 0.0:
        return lo
    if f_hi < 0.0:
        return hi
    a, b = lo, hi
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if (f(a) < 0.0) == (f(mid) < 0.0):
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def first_best_bisect(
    q: float,
    h0: float,
    dh: float,
    kappa: float,
    mu0: float = 0.0,
    bar_q: int = 10,
    bar_s: int = 3,
    lo: float = 1e-4,
    hi: float = 0.999,
) -> float:
    """Planner's target: best response with alpha=1 and no bounty."""
    return best_response_bisect(q, h0, dh, 1.0, 0.0, kappa, mu0, bar_q, bar_s, lo, hi)


def creator_objective_grid(
    mu: np.ndarray,
    p: np.ndarray,
    q: float,
    h0: float,
    dh: float,
    alpha: float,
    bounty: float,
    kappa: float,
    mu0: float,
) -> np.ndarray:
    return (
        alpha * mu * (q + h0 + dh * p)
        + bounty * p
        - 0.5 * kappa * (mu - mu0) ** 2
    )


def budget_grid_search(
    bar_q: int,
    bar_s: int,
    alpha: float,
    kappa: float,
    mu0: float,
    h0: float,
    dh: float,
    budget_r: float,
    budget_m: float,
    q_step: float = 0.1,
    b_step: float = 0.5,
    b_max: float = 60.0,
    mu_lo: float = 1e-4,
    mu_hi: float = 0.999,
    n_mu: int = 4096,
) -> Tuple[float, float, float, float]:
    """Dense (q, B) grid max of constrained welfare with grid-argmax equilibria.

    The creator's response at each cell is the *global* argmax of the
    private objective on a fine quality grid (so multi-root cells resolve
    honestly), refined by local bisection when interior.  Returns
    (best_welfare, q, B, mu_star).
    """
    mu = np.linspace(mu_lo, mu_hi, n_mu)
    p = tail_pmf_grid(bar_q, bar_s, mu)
    dp_grid = np.array([slope_factorial(bar_q, bar_s, m) for m in mu])
    q_values = np.arange(0.0, budget_r + 1e-9, q_step)
    b_values = np.arange(0.0, b_max + 1e-9, b_step)
    base = alpha * mu * (h0 + dh * p) - 0.5 * kappa * (mu - mu0) ** 2
    best = (-np.inf, 0.0, 0.0, mu_lo)
    for qv in q_values:
        # objective rows: one per B cell
        obj = base[None, :] + alpha * qv * mu[None, :] + b_values[:, None] * p[None, :]
        idx = np.argmax(obj, axis=1)
        mu_star = mu[idx]
        # local bisection refinement for interior argmaxes
        for j, bv in enumerate(b_values):
            i = idx[j]
            if 0 < i < n_mu - 1:
                a_mu, b_mu = mu[i - 1], mu[i + 1]

                def g(m):
                    return gap_value(
                        m, qv, h0, dh, alpha, bv, kappa, mu0, bar_q, bar_s
                    )

                if g(a_mu) < 0.0 < g(b_mu):
                    a2, b2 = a_mu, b_mu
                    for _ in range(50):
                        mid = 0.5 * (a2 + b2)
                        if g(mid) < 0.0:
                            a2 = mid
                        else:
                            b2 = mid
                    mu_star[j] = 0.5 * (a2 + b2)
        p_star = tail_pmf_grid(bar_q, bar_s, mu_star)
        usage = b_values * p_star
        feasible = usage <= budget_m + 1e-9
        w = mu_star * (qv + h0 + dh * p_star) - b_values * p_star
        w = np.where(feasible, w, -np.inf)
        j = int(np.argmax(w))
        if w[j] > best[0]:
            best = (float(w[j]), float(qv), float(b_values[j]), float(mu_star[j]))
    return best


def welfare_value(
    mu: float, q: float, bounty: float, h0: float, dh: float, bar_q: int, bar_s: int
) -> float:
    p = tail_pmf(bar_q, bar_s, mu)
    return mu * (q + h0 + dh * p) - bounty * p


def norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
