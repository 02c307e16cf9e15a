"""Balanced exploration under impression and cash budgets.

The loop pushes each instrument until its marginal constrained-welfare
gain meets its shadow price: one more discounted early impression vs one
more expected payout dollar.  A greedy water-fill splits budgets across
heterogeneous segments at common prices, and the price ratio quotes the
attention-cash exchange rate.
"""

from coldstart import (
    Binomial,
    BinomialBar,
    Budgets,
    ContinuationLandscape,
    CreatorPrimitives,
    LoopConfig,
    Policy,
    Scenario,
    Segment,
    exchange_rate,
    run_balanced_loop,
    segment_waterfill,
)

model = Binomial(BinomialBar(q=10, s=3))
scenario = Scenario(
    policy=Policy(q=10.0, pass_model=model, bounty=0.0),
    creator=CreatorPrimitives(alpha=0.5, kappa=60.0),
    continuation=ContinuationLandscape(h0=0.0, dh=20.0, gamma=0.9),
)

print("== balanced loop: R=12 impressions, M=50 expected dollars ==")
result = run_balanced_loop(scenario, Budgets(impressions=12.0, cash=50.0), LoopConfig(max_iter=2000))
st = result.state
print(f"  converged={result.converged} in {st.iteration} iterations")
print(f"  q={st.q:.3f}  B={st.b:.3f}  welfare={st.welfare:.4f}")
print(f"  shadow prices: lambda_imp={st.lam_imp:.4f}  lambda_$={st.lam_cash:.4f}")
print(f"  cash usage {st.cash_usage:.3f} of 50 (slack: the optimum is interior in B)")

print("\n== tight cash: M=0.5 ==")
tight = run_balanced_loop(scenario, Budgets(impressions=12.0, cash=0.5), LoopConfig(max_iter=3000))
st = tight.state
print(f"  q={st.q:.3f}  B={st.b:.3f}  usage={st.cash_usage:.3f}  lambda_$={st.lam_cash:.4f}")
rate, compensation = exchange_rate(st.lam_imp, st.lam_cash, delta_r=-1.0)
print(f"  exchange rate lambda_imp/lambda_$ = {rate:.3f}")
print(f"  losing one discounted impression needs ~{compensation:.3f} extra cash budget")

print("\n== water-fill across two segments (low vs high monetization) ==")
segments = [
    Segment(share=0.5, creator=CreatorPrimitives(alpha=0.3, kappa=60.0),
            continuation=scenario.continuation, pass_model=model, q=10.0),
    Segment(share=0.5, creator=CreatorPrimitives(alpha=0.9, kappa=60.0),
            continuation=scenario.continuation, pass_model=model, q=10.0),
]
fill = segment_waterfill(segments, Budgets(impressions=21.0, cash=2.0), delta_q=0.5, delta_cash=0.2)
for label, seg in zip(("alpha=0.3", "alpha=0.9"), fill.segments):
    print(f"  {label}: q={seg.q:.2f}  B={seg.b:.3f}")
print(f"  common prices: lambda_imp={fill.lam_imp:.4f}  lambda_$={fill.lam_cash:.4f}")
print("  (the low-monetization segment buys the bounty: cash substitutes for revenue share)")
