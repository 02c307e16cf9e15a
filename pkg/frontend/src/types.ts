/**
 * Shared types for the policy studio.
 *
 * Domain values are kept as `unknown`-backed JSON and rendered verbatim:
 * the UI never computes policy math locally, so there is no numeric model
 * layer here, just shapes mirroring the service responses.
 */

export interface PassModelDraft {
  kind: 'binomial';
  q: number;
  s?: number;
  mu_bar?: number;
}

export interface ScenarioDraft {
  policy: { q: number; B: number; pass_model: PassModelDraft };
  creator: { alpha: number; kappa: number; mu0: number };
  continuation: { h0: number; dh: number; gamma: number };
}

export interface BudgetsDraft {
  R: number;
  M: number;
}

export interface SolveResponse {
  equilibrium: {
    mu_star: number;
    corner: string;
    p: number;
    p_prime: number;
    leverage: number | null;
    gap_curvature: number;
    sensitivities: Record<string, number>;
    regularity_satisfied: boolean;
    warnings: string[];
  };
  targeting?: {
    cost_bounty_per_unit: number;
    cost_flat_per_unit: number;
    hit_dominates: boolean;
  };
  first_best?: { mu_fb: number; corner: string; p: number; p_prime: number };
  bounty?: { b_star: number; expected_payout: number };
}

export interface BountyResponse {
  b_star: number;
  expected_payout: number;
  mu_fb: number;
}

export interface BudgetStateBlob {
  q: number;
  B: number;
  lambda_imp: number;
  lambda_dollar: number;
  eta_q: number;
  eta_b: number;
  rho: number;
  bounty_cap: number;
  iteration: number;
  residual_q?: number | null;
  residual_dollar?: number | null;
  cash_usage?: number | null;
  welfare?: number | null;
}

export interface BudgetStepResponse {
  state: BudgetStateBlob;
  residuals: { rq: number; rdollar: number; dual_infeasibility: string[] };
}

export interface HeatmapCell {
  q: number;
  s: number;
  mu_star: number | null;
  leverage: number | null;
  flag: string;
}

export interface HeatmapResponse {
  cells: HeatmapCell[];
}

export interface ServiceErrorBody {
  error: string;
  code?: string;
  pointer?: string;
  message?: string;
}

/** Raised by the API client on 4xx/5xx; carries the parsed body. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly body: ServiceErrorBody,
  ) {
    super(body.message ?? `service error ${status}`);
  }
}
