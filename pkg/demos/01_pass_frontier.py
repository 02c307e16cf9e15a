"""Tour of the pass frontier: tails, slopes, curvature, and leverage.

The graduation bar (q=10 trials, s=3 successes) induces an S-shaped pass
probability whose slope is a Beta(3, 8) density peaking at (s-1)/(q-1).
This script walks the closed forms, the heterogeneous-slot and noisy
variants, and saves the frontier curves next to this file.
"""

import numpy as np

from coldstart import (
    Binomial,
    BinomialBar,
    NoiseRates,
    Noisy,
    NormalApprox,
    PoissonBinomial,
    SlotProbabilities,
    leverage,
    mode_location,
    normal_surrogate_error,
    slope,
    tail,
)

bar = BinomialBar(q=10, s=3)
model = Binomial(bar)

print("== plain binomial bar (q=10, s=3) ==")
for mu in (0.1, 0.22, 0.3, 0.5, 0.7):
    print(
        f"  mu={mu:.2f}:  P={tail(model, mu):.4f}   P'={slope(model, mu):.4f}"
        f"   Lambda={leverage(model, mu):7.3f}"
    )
print(f"  slope peaks at mu = {mode_location(bar):.4f} (= 2/9)")

print("\n== heterogeneous slots ==")
slots = SlotProbabilities(
    p=(0.25, 0.28, 0.30, 0.32, 0.35, 0.30, 0.27, 0.33, 0.29, 0.31),
    dp=(1.0,) * 10,
    mu_ref=0.30,
)
pb = PoissonBinomial(slots=slots, s=3)
print(f"  PB tail at anchor:  {tail(pb, 0.30):.4f}")
print(f"  PB slope (leave-one-out identity): {slope(pb, 0.30):.4f}")

print("\n== label noise ==")
noisy = Noisy(inner=model, noise=NoiseRates(eta0=0.10, eta1=0.05))
mu = 0.3
print(f"  clean slope:  {slope(model, mu):.4f}")
print(f"  noisy slope:  {slope(noisy, mu):.4f}  (attenuated by 0.85, shifted evaluation point)")

print("\n== normal surrogate quality ==")
for q, s in ((10, 3), (40, 12), (100, 30)):
    gap = normal_surrogate_error(BinomialBar(q=q, s=s), s, 0.3)
    print(f"  q={q:3d}, s={s:2d}: |exact - normal| = {gap:.5f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    grid = np.linspace(0.01, 0.99, 197)
    p_vals = [tail(model, float(m)) for m in grid]
    dp_vals = [slope(model, float(m)) for m in grid]
    fig, ax1 = plt.subplots(figsize=(7, 4))
    ax1.plot(grid, p_vals, label="P(mu)", color="tab:blue")
    ax1.set_xlabel("quality mu")
    ax1.set_ylabel("pass probability")
    ax2 = ax1.twinx()
    ax2.plot(grid, dp_vals, label="P'(mu)", color="tab:orange")
    ax2.set_ylabel("slope")
    ax1.axvline(mode_location(bar), ls=":", color="gray")
    fig.suptitle("Pass probability and its slope (q=10, s=3)")
    fig.tight_layout()
    fig.savefig("demos_frontier.png", dpi=120)
    print("\nsaved demos_frontier.png")
except ImportError:
    print("\n(matplotlib not installed; skipped the plot)")
