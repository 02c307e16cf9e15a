/**
 * Typed client for the /v1 endpoints.
 *
 * Each panel keeps at most one request in flight: starting a new call
 * through the same channel aborts the previous one (latest wins), so stale
 * responses can never land on a fresher draft.
 */

import type {
  BountyResponse,
  BudgetStateBlob,
  BudgetStepResponse,
  BudgetsDraft,
  HeatmapResponse,
  ScenarioDraft,
  ServiceErrorBody,
  SolveResponse,
} from './types';
import { ServiceError } from './types';
import { serializeScenario } from './schema';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class StudioApi {
  private controllers = new Map<string, AbortController>();

  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async post<T>(path: string, body: unknown, channel?: string): Promise<T> {
    let signal: AbortSignal | undefined;
    if (channel !== undefined) {
      this.controllers.get(channel)?.abort();
      const controller = new AbortController();
      this.controllers.set(channel, controller);
      signal = controller.signal;
    }
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
      signal,
    });
    const payload = (await resp.json()) as unknown;
    if (!resp.ok) {
      throw new ServiceError(resp.status, payload as ServiceErrorBody);
    }
    return payload as T;
  }

  solve(draft: ScenarioDraft, firstBest = false): Promise<SolveResponse> {
    const body = serializeScenario(draft);
    if (firstBest) {
      body.first_best = true;
    }
    return this.post('/v1/solve', body, 'solve');
  }

  bounty(draft: ScenarioDraft): Promise<BountyResponse> {
    return this.post('/v1/bounty', serializeScenario(draft), 'bounty');
  }

  budgetStep(
    draft: ScenarioDraft,
    budgets: BudgetsDraft,
    state: BudgetStateBlob,
  ): Promise<BudgetStepResponse> {
    const body = serializeScenario(draft);
    body.budgets = { R: budgets.R, M: budgets.M };
    body.state = state;
    return this.post('/v1/budget/step', body, 'budget-step');
  }

  heatmap(
    draft: ScenarioDraft,
    range: { qMin: number; qMax: number; sMin: number; sMax: number },
  ): Promise<HeatmapResponse> {
    const body = serializeScenario(draft);
    body.q_min = range.qMin;
    body.q_max = range.qMax;
    body.s_min = range.sMin;
    body.s_max = range.sMax;
    return this.post('/v1/heatmap', body, 'heatmap');
  }
}
