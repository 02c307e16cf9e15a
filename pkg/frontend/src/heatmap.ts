/**
 * Leverage heatmap view: cells from /v1/heatmap, hatched where the solver
 * flagged a corner or a domain failure, clickable to load (q, s) into the
 * scenario draft.
 */

import type { HeatmapCell, HeatmapResponse, ScenarioDraft } from './types';
import { verbatim } from './verbatim';

export interface HeatmapCellView {
  q: number;
  s: number;
  label: string; // verbatim leverage (or the em dash)
  hatched: boolean;
  flag: string;
}

export function buildHeatmapView(resp: HeatmapResponse): HeatmapCellView[] {
  return resp.cells.map((cell: HeatmapCell) => ({
    q: cell.q,
    s: cell.s,
    label: verbatim(cell.leverage),
    hatched: cell.leverage === null || cell.flag !== '',
    flag: cell.flag,
  }));
}

/** Cell click contract: the chosen (q, s) becomes the draft's bar and window. */
export function applyCellToDraft(draft: ScenarioDraft, cell: { q: number; s: number }): ScenarioDraft {
  return {
    ...draft,
    policy: {
      ...draft.policy,
      q: cell.q,
      pass_model: { kind: 'binomial', q: cell.q, s: cell.s },
    },
  };
}
