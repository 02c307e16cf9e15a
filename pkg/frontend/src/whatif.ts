/**
 * The what-if panel's equilibrium card.
 *
 * A card is a pure view model: labeled display strings lifted verbatim from
 * the /v1/solve and /v1/bounty responses, plus banner text for domain
 * errors. Rendering to DOM happens in main.ts; tests diff the card against
 * the intercepted responses field by field.
 */

import type { BountyResponse, SolveResponse } from './types';
import { ServiceError } from './types';
import { verbatim } from './verbatim';

export interface EquilibriumCard {
  muStar: string;
  corner: string;
  passProbability: string;
  slope: string;
  leverage: string;
  bStar: string;
  expectedSpend: string;
  dominanceVerdict: string;
  warnings: string[];
}

export function buildEquilibriumCard(
  solve: SolveResponse,
  bounty: BountyResponse | null,
): EquilibriumCard {
  const eq = solve.equilibrium;
  return {
    muStar: verbatim(eq.mu_star),
    corner: verbatim(eq.corner),
    passProbability: verbatim(eq.p),
    slope: verbatim(eq.p_prime),
    leverage: verbatim(eq.leverage),
    bStar: verbatim(bounty ? bounty.b_star : null),
    expectedSpend: verbatim(bounty ? bounty.expected_payout : null),
    dominanceVerdict: solve.targeting
      ? solve.targeting.hit_dominates
        ? 'hit-based bounty dominates the flat subsidy'
        : 'flat subsidy is cheaper at this margin'
      : '—',
    warnings: [...eq.warnings],
  };
}

/** Remedial hints for the documented 422 codes. */
const REMEDIES: Record<string, string> = {
  flat_frontier: 'no finite bounty works here: reposition the bar toward the cohort',
  degenerate_pass_rate: 'pass rate pinned at 0 or 1: retune the bar or window',
  ambiguous_equilibrium: 'multiple candidate equilibria: raise cost curvature or adjust instruments',
  insufficient_class_samples: 'a pass/fail class is empty: sample conditionally or move the bar',
  unstable_normalization: 'expected payout is too small to normalize: raise the pass rate first',
  invalid_input: 'check the highlighted inputs',
};

export function bannerFor(error: unknown): string {
  if (error instanceof ServiceError) {
    if (error.status === 422 && error.body.code) {
      const hint = REMEDIES[error.body.code] ?? 'see the service message';
      return `${error.body.code}: ${hint}`;
    }
    if (error.status === 400) {
      return `invalid scenario at ${error.body.pointer ?? '/'}: ${error.body.message ?? ''}`;
    }
    return `service error ${error.status}`;
  }
  return 'service unreachable; retry';
}
