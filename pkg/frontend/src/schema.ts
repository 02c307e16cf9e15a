/**
 * Client-side validation mirroring the server's scenario schema.
 *
 * The draft is checked before any request leaves the browser so sliders can
 * never emit an invalid document; violations carry the same JSON-pointer
 * style paths the server would return.
 */

import type { BudgetsDraft, ScenarioDraft } from './types';

export interface Violation {
  pointer: string;
  message: string;
}

function num(
  out: Violation[],
  value: unknown,
  pointer: string,
  opts: { min?: number; max?: number; exclusiveMin?: number; exclusiveMax?: number; integer?: boolean },
): void {
  if (typeof value !== 'number' || Number.isNaN(value) || !Number.isFinite(value)) {
    out.push({ pointer, message: 'expected a finite number' });
    return;
  }
  if (opts.integer && !Number.isInteger(value)) {
    out.push({ pointer, message: 'expected an integer' });
  }
  if (opts.min !== undefined && value < opts.min) {
    out.push({ pointer, message: `must be >= ${opts.min}` });
  }
  if (opts.exclusiveMin !== undefined && value <= opts.exclusiveMin) {
    out.push({ pointer, message: `must be > ${opts.exclusiveMin}` });
  }
  if (opts.max !== undefined && value > opts.max) {
    out.push({ pointer, message: `must be <= ${opts.max}` });
  }
  if (opts.exclusiveMax !== undefined && value >= opts.exclusiveMax) {
    out.push({ pointer, message: `must be < ${opts.exclusiveMax}` });
  }
}

export function validateScenario(draft: ScenarioDraft): Violation[] {
  const out: Violation[] = [];
  num(out, draft.policy.q, '/policy/q', { min: 0 });
  num(out, draft.policy.B, '/policy/B', { min: 0 });
  const pm = draft.policy.pass_model;
  if (pm.kind !== 'binomial') {
    out.push({ pointer: '/policy/pass_model/kind', message: 'studio drafts use binomial bars' });
  }
  num(out, pm.q, '/policy/pass_model/q', { min: 1, integer: true });
  if (pm.s === undefined && pm.mu_bar === undefined) {
    out.push({ pointer: '/policy/pass_model', message: 'needs s or mu_bar' });
  }
  if (pm.s !== undefined) {
    num(out, pm.s, '/policy/pass_model/s', { min: 1, max: pm.q, integer: true });
  }
  if (pm.mu_bar !== undefined) {
    num(out, pm.mu_bar, '/policy/pass_model/mu_bar', { exclusiveMin: 0, exclusiveMax: 1 });
  }
  num(out, draft.creator.alpha, '/creator/alpha', { exclusiveMin: 0, max: 1 });
  num(out, draft.creator.kappa, '/creator/kappa', { exclusiveMin: 0 });
  num(out, draft.creator.mu0, '/creator/mu0', { min: 0 });
  num(out, draft.continuation.h0, '/continuation/h0', { min: 0 });
  num(out, draft.continuation.dh, '/continuation/dh', { min: 0 });
  num(out, draft.continuation.gamma, '/continuation/gamma', { exclusiveMin: 0, exclusiveMax: 1 });
  return out;
}

export function validateBudgets(budgets: BudgetsDraft): Violation[] {
  const out: Violation[] = [];
  num(out, budgets.R, '/budgets/R', { exclusiveMin: 0 });
  num(out, budgets.M, '/budgets/M', { exclusiveMin: 0 });
  return out;
}

/**
 * Serialize a draft to exactly the wire schema: only known fields, in the
 * documented shapes. The output round-trips through the server parser.
 */
export function serializeScenario(draft: ScenarioDraft): Record<string, unknown> {
  const pass_model: Record<string, unknown> = { kind: draft.policy.pass_model.kind, q: draft.policy.pass_model.q };
  if (draft.policy.pass_model.s !== undefined) {
    pass_model.s = draft.policy.pass_model.s;
  }
  if (draft.policy.pass_model.mu_bar !== undefined) {
    pass_model.mu_bar = draft.policy.pass_model.mu_bar;
  }
  return {
    policy: { q: draft.policy.q, B: draft.policy.B, pass_model },
    creator: {
      alpha: draft.creator.alpha,
      kappa: draft.creator.kappa,
      mu0: draft.creator.mu0,
    },
    continuation: {
      h0: draft.continuation.h0,
      dh: draft.continuation.dh,
      gamma: draft.continuation.gamma,
    },
  };
}

/** The reference primitives the studio loads on startup. */
export function fig2Defaults(): ScenarioDraft {
  return {
    policy: { q: 10.0, B: 0.0, pass_model: { kind: 'binomial', q: 10, s: 3 } },
    creator: { alpha: 0.5, kappa: 60.0, mu0: 0.0 },
    continuation: { h0: 0.0, dh: 20.0, gamma: 0.9 },
  };
}
