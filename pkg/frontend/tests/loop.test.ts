/**
 * Loop-console contract: a ten-step run renders the service trajectory with
 * zero locally computed numbers, the returned state blob round-trips into
 * the next request untouched, and manual overrides are pure pass-throughs.
 */

import { describe, expect, it } from 'vitest';

import { StudioApi } from '../src/api';
import { LoopConsole, initialLoopState } from '../src/loop';
import { fig2Defaults } from '../src/schema';
import type { BudgetStateBlob, BudgetStepResponse } from '../src/types';
import { fakeFetch, fixture, numericLeaves } from './helpers';

const steps = fixture<BudgetStepResponse[]>('fig2.steps.json');
const budgets = { R: 12.0, M: 50.0 };

function stepRoutes() {
  return {
    '/v1/budget/step': (_body: unknown, call: number) => steps[call],
  };
}

describe('budget loop console', () => {
  it('ten steps render the service trajectory verbatim', async () => {
    const { fetchImpl, calls } = fakeFetch(stepRoutes());
    const api = new StudioApi('http://service.test', fetchImpl);
    const initial = initialLoopState(fig2Defaults(), budgets, steps[0].state.bounty_cap);
    const console_ = new LoopConsole(api, fig2Defaults(), budgets, initial);
    for (let i = 0; i < 10; i += 1) {
      await console_.advance();
    }
    expect(calls).toHaveLength(10);
    expect(console_.trajectory).toHaveLength(11); // initial row + 10 steps

    // every displayed number is the JSON form of the intercepted response
    for (let i = 0; i < 10; i += 1) {
      const row = console_.trajectory[i + 1];
      const resp = steps[i];
      expect(row.q).toBe(JSON.stringify(resp.state.q));
      expect(row.B).toBe(JSON.stringify(resp.state.B));
      expect(row.lambdaImp).toBe(JSON.stringify(resp.state.lambda_imp));
      expect(row.lambdaDollar).toBe(JSON.stringify(resp.state.lambda_dollar));
      expect(row.residualQ).toBe(JSON.stringify(resp.residuals.rq));
      expect(row.residualDollar).toBe(JSON.stringify(resp.residuals.rdollar));
      expect(row.welfare).toBe(JSON.stringify(resp.state.welfare));
    }

    // zero locally computed numbers: every numeric string in the rendered
    // trajectory appears among the numeric leaves of the intercepted
    // payloads (or the initial blob the console was seeded with)
    const served = new Set<string>();
    for (const resp of steps) {
      for (const s of numericLeaves(resp).values()) {
        served.add(s);
      }
    }
    for (const s of numericLeaves(initial).values()) {
      served.add(s);
    }
    for (const row of console_.trajectory) {
      for (const cell of Object.values(row)) {
        if (cell !== '—') {
          expect(served.has(cell), `cell ${cell} must come from the service`).toBe(true);
        }
      }
    }
  });

  it('feeds each returned state blob into the next request unchanged', async () => {
    const { fetchImpl, calls } = fakeFetch(stepRoutes());
    const api = new StudioApi('http://service.test', fetchImpl);
    const initial = initialLoopState(fig2Defaults(), budgets, steps[0].state.bounty_cap);
    const console_ = new LoopConsole(api, fig2Defaults(), budgets, initial);
    for (let i = 0; i < 5; i += 1) {
      await console_.advance();
    }
    for (let i = 1; i < 5; i += 1) {
      const sent = (calls[i].body as { state: BudgetStateBlob }).state;
      expect(sent).toEqual(steps[i - 1].state);
    }
  });

  it('manual override replaces one field and passes everything else through', async () => {
    const { fetchImpl, calls } = fakeFetch(stepRoutes());
    const api = new StudioApi('http://service.test', fetchImpl);
    const initial = initialLoopState(fig2Defaults(), budgets, steps[0].state.bounty_cap);
    const console_ = new LoopConsole(api, fig2Defaults(), budgets, initial);
    await console_.advance();
    console_.override('B', 0.0);
    await console_.advance();
    const sent = (calls[1].body as { state: BudgetStateBlob }).state;
    expect(sent.B).toBe(0.0);
    expect(sent.q).toBe(steps[0].state.q);
    expect(sent.lambda_imp).toBe(steps[0].state.lambda_imp);
  });

  it('freezes with a banner on service failure and recovers on retry', async () => {
    let failNext = true;
    const { fetchImpl } = fakeFetch({
      '/v1/budget/step': (_body: unknown, call: number) => {
        if (failNext && call === 0) {
          return new Response(JSON.stringify({ error: 'domain', code: 'invalid_input', message: 'boom' }), {
            status: 422,
            headers: { 'content-type': 'application/json' },
          });
        }
        return steps[0];
      },
    });
    const api = new StudioApi('http://service.test', fetchImpl);
    const console_ = new LoopConsole(
      api,
      fig2Defaults(),
      budgets,
      initialLoopState(fig2Defaults(), budgets, 100.0),
    );
    await expect(console_.advance()).rejects.toThrow();
    expect(console_.frozen).not.toBeNull();
    failNext = false;
    await console_.advance();
    expect(console_.frozen).toBeNull();
  });

  it('zero budgets pin the initial instruments at zero', () => {
    const draft = fig2Defaults();
    draft.policy.q = 0.0;
    draft.policy.B = 0.0;
    const state = initialLoopState(draft, { R: 1e-9, M: 1e-9 }, 100.0);
    expect(state.q).toBe(0.0);
    expect(state.B).toBe(0.0);
  });
});
