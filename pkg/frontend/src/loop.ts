/**
 * Step-through budget-loop console.
 *
 * Each "advance week" click posts the current state blob to
 * /v1/budget/step and adopts the returned blob wholesale; the console never
 * edits numbers it did not receive, except for explicit manual overrides of
 * q or B, which replace those fields in the blob before the next step (the
 * service re-solves everything downstream).
 */

import type { StudioApi } from './api';
import type { BudgetStateBlob, BudgetsDraft, ScenarioDraft } from './types';
import { verbatim } from './verbatim';

export interface TrajectoryRow {
  iteration: string;
  q: string;
  B: string;
  lambdaImp: string;
  lambdaDollar: string;
  residualQ: string;
  residualDollar: string;
  welfare: string;
}

export function rowFromState(state: BudgetStateBlob, residuals?: { rq: number; rdollar: number }): TrajectoryRow {
  return {
    iteration: verbatim(state.iteration),
    q: verbatim(state.q),
    B: verbatim(state.B),
    lambdaImp: verbatim(state.lambda_imp),
    lambdaDollar: verbatim(state.lambda_dollar),
    residualQ: verbatim(residuals ? residuals.rq : state.residual_q ?? null),
    residualDollar: verbatim(residuals ? residuals.rdollar : state.residual_dollar ?? null),
    welfare: verbatim(state.welfare ?? null),
  };
}

export function initialLoopState(draft: ScenarioDraft, budgets: BudgetsDraft, bountyCap: number): BudgetStateBlob {
  return {
    q: Math.min(draft.policy.q, budgets.R),
    B: draft.policy.B,
    lambda_imp: 0.0,
    lambda_dollar: 0.0,
    eta_q: 0.05,
    eta_b: 0.05,
    rho: 0.05,
    bounty_cap: bountyCap,
    iteration: 0,
  };
}

export class LoopConsole {
  trajectory: TrajectoryRow[] = [];
  state: BudgetStateBlob;
  frozen: string | null = null; // error banner text while frozen

  constructor(
    private api: StudioApi,
    private draft: ScenarioDraft,
    private budgets: BudgetsDraft,
    initial: BudgetStateBlob,
  ) {
    this.state = initial;
    this.trajectory.push(rowFromState(initial));
  }

  /** POST one step; adopt the returned state verbatim. */
  async advance(): Promise<TrajectoryRow> {
    try {
      const resp = await this.api.budgetStep(this.draft, this.budgets, this.state);
      this.state = resp.state;
      const row = rowFromState(resp.state, resp.residuals);
      this.trajectory.push(row);
      this.frozen = null;
      return row;
    } catch (err) {
      this.frozen = 'step failed; console frozen — retry to continue';
      throw err;
    }
  }

  /** Manual steering: replace an instrument in the blob for the next step. */
  override(field: 'q' | 'B', value: number): void {
    this.state = { ...this.state, [field]: value };
  }
}
