"""Estimating the continuation landscape (H0, H1, dH) four ways.

The prize spread dH = H1 - H0 is what makes graduation worth chasing.
Closed forms cover stylized engines; the Monte-Carlo replay handles a real
Thompson sampler against a frozen competitor pool.
"""

import numpy as np

from coldstart import (
    BinomialBar,
    EngineConfig,
    RelaxationParams,
    calibrate_cohort_threshold,
    relaxation_H,
    thompson_replay,
    two_band_H,
    ucb_surrogate,
)

print("== two-band priority rule ==")
tb = two_band_H(pi_high=0.3, pi_low=0.05, gamma=0.95)
print(f"  H1={tb.h1:.2f}  H0={tb.h0:.2f}  dH={tb.dh:.2f}")

print("\n== relaxation to steady state ==")
rx = relaxation_H(RelaxationParams(pi0_pass=0.6, pi0_fail=0.2, pi_inf=0.5, lam=0.1, omega=1.0, gamma=0.9))
print(f"  H1={rx.h1:.3f}  H0={rx.h0:.3f}  dH={rx.dh:.3f}")

print("\n== UCB surrogate (logistic inclusion of optimism-corrected indices) ==")
uc = ucb_surrogate(theta_pass=0.5, theta_fail=-0.5, theta_frontier=0.0,
                   smoothing=4.0, pi_inf=0.3, lam=0.2, omega=1.0, gamma=0.9)
print(f"  H1={uc.h1:.3f}  H0={uc.h0:.3f}  dH={uc.dh:.3f}")

print("\n== Thompson replay: 1 seat vs 20 frozen competitors ==")
engine = EngineConfig(
    competitors=tuple(float(x) for x in np.linspace(0.30, 0.60, 20)),
    gamma=0.95,
    n_reps=4_000,
    seed=20260811,
)
est = thompson_replay(0.35, BinomialBar(q=10, s=3), engine)
print(f"  H1 = {est.h1:.3f} +/- {est.ci_h1:.3f}")
print(f"  H0 = {est.h0:.3f} +/- {est.ci_h0:.3f}")
print(f"  dH = {est.dh:.3f} +/- {est.ci_dh:.3f}  (pass share {est.pass_share:.3f})")

print("\n== multi-winner threshold calibration ==")
cal = calibrate_cohort_threshold([0.3] * 100, q=10, seats=50)
print(f"  K=50 seats from 100 peers at mu=0.3: s_K = {cal.s_k} "
      f"(fill {cal.expected_fill_at_s:.1f} at s_K, {cal.expected_fill_below:.1f} one below)")
