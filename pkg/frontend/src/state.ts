/**
 * Studio session state: the scenario draft, up to four pinned comparison
 * scenarios, the budget-loop state blob, and a cache of the last responses
 * keyed by endpoint.
 */

import type { BudgetStateBlob, ScenarioDraft } from './types';
import { validateScenario, type Violation } from './schema';

export const MAX_PINNED = 4;

export class StudioSession {
  draft: ScenarioDraft;
  pinned: { label: string; draft: ScenarioDraft }[] = [];
  loopState: BudgetStateBlob | null = null;
  lastResponses = new Map<string, unknown>();

  constructor(draft: ScenarioDraft) {
    this.draft = draft;
  }

  /** Drafts must be schema-valid before any request goes out. */
  violations(): Violation[] {
    return validateScenario(this.draft);
  }

  update(mutate: (draft: ScenarioDraft) => void): Violation[] {
    const next = structuredClone(this.draft);
    mutate(next);
    const violations = validateScenario(next);
    if (violations.length === 0) {
      this.draft = next;
    }
    return violations;
  }

  pin(label: string): boolean {
    if (this.pinned.length >= MAX_PINNED) {
      return false;
    }
    this.pinned.push({ label, draft: structuredClone(this.draft) });
    return true;
  }

  unpin(index: number): void {
    this.pinned.splice(index, 1);
  }

  cache(endpoint: string, payload: unknown): void {
    this.lastResponses.set(endpoint, payload);
  }
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs = 150,
  timers: { set: typeof setTimeout; clear: typeof clearTimeout } = {
    set: setTimeout,
    clear: clearTimeout,
  },
): (...args: A) => void {
  let handle: ReturnType<typeof setTimeout> | null = null;
  return (...args: A) => {
    if (handle !== null) {
      timers.clear(handle);
    }
    handle = timers.set(() => fn(...args), waitMs);
  };
}
