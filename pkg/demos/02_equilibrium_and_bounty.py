"""Best response, planner target, and the discovery bounty that closes the gap.

Reference primitives: q=10 guaranteed impressions, bar (10, 3), revenue
share alpha=0.5, prize spread dH=20, quadratic cost kappa=60.  The creator
under-invests relative to the planner; a single pass-contingent payment
moves the private optimum exactly onto the planner's target.
"""

from coldstart import (
    Binomial,
    BinomialBar,
    ContinuationLandscape,
    CreatorPrimitives,
    Policy,
    check_regularity,
    expected_payout,
    gap,
    implement_bounty,
    solve_best_response,
    solve_first_best,
    targeting_compare,
)

model = Binomial(BinomialBar(q=10, s=3))
policy = Policy(q=10.0, pass_model=model, bounty=0.0)
creator = CreatorPrimitives(alpha=0.5, kappa=60.0)
cont = ContinuationLandscape(h0=0.0, dh=20.0, gamma=0.9)

reg = check_regularity(policy, creator, cont)
print(f"single-crossing bound: kappa_min={reg.kappa_min_required:.1f} vs kappa=60 "
      f"(satisfied={reg.satisfied}; the sufficient condition is conservative)")

rep = solve_best_response(policy, creator, cont)
print(f"\ncreator best response: mu* = {rep.mu_star:.4f} ({rep.corner})")
print(f"  P={rep.p:.4f}  P'={rep.p_prime:.4f}  Lambda={rep.leverage:.3f}")
print(f"  sensitivities: d mu*/dq={rep.mu_q:.4f}  d mu*/dB={rep.mu_b:.4f}  "
      f"d mu*/d(dH)={rep.mu_h:.4f}  d mu*/d alpha={rep.mu_alpha:.4f}")
print(f"  gap at 0.33 (should be near zero): {gap(0.33, policy, creator, cont):+.4f}")

fb = solve_first_best(policy, creator, cont)
print(f"\nplanner first best: mu_fb = {fb.mu_fb:.4f}")

b_star = implement_bounty(creator, policy, cont, fb.mu_fb)
spend = expected_payout(b_star, model, fb.mu_fb)
print(f"discovery bounty: B* = {b_star:.2f}, expected payout {spend:.2f}")

re_solved = solve_best_response(
    Policy(q=10.0, pass_model=model, bounty=b_star), creator, cont
)
print(f"re-solved with B*: mu* = {re_solved.mu_star:.4f}  (target {fb.mu_fb:.4f})")

cmp_ = targeting_compare(1.0, policy, creator, cont, rep.mu_star)
print(f"\ntargeting one unit of incentive at mu*={rep.mu_star:.3f}:")
print(f"  hit-based bounty costs {cmp_.cost_bounty:.3f} expected dollars")
print(f"  flat per-success subsidy costs {cmp_.cost_flat:.3f}")
print(f"  hit-based dominates: {cmp_.hit_dominates} (Lambda >= 1/mu*)")
