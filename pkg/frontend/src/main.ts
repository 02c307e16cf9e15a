/**
 * Browser shell: slider wiring, card rendering, loop console, heatmap grid.
 *
 * All policy math lives behind the service; this file only moves strings
 * from responses into the DOM.
 */

import { StudioApi } from './api';
import { buildHeatmapView, applyCellToDraft } from './heatmap';
import { LoopConsole, initialLoopState } from './loop';
import { fig2Defaults } from './schema';
import { StudioSession, debounce } from './state';
import { bannerFor, buildEquilibriumCard, type EquilibriumCard } from './whatif';

const BASE_URL = (window as unknown as { COLDSTART_URL?: string }).COLDSTART_URL ?? 'http://127.0.0.1:8000';

const api = new StudioApi(BASE_URL);
const session = new StudioSession(fig2Defaults());
let loop: LoopConsole | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function renderCard(card: EquilibriumCard): void {
  el('mu-star').textContent = card.muStar;
  el('corner').textContent = card.corner;
  el('pass-prob').textContent = card.passProbability;
  el('slope').textContent = card.slope;
  el('leverage').textContent = card.leverage;
  el('b-star').textContent = card.bStar;
  el('spend').textContent = card.expectedSpend;
  el('dominance').textContent = card.dominanceVerdict;
  el('banner').textContent = card.warnings.join('; ');
}

async function refreshCard(): Promise<void> {
  const violations = session.violations();
  if (violations.length > 0) {
    el('banner').textContent = `fix ${violations[0].pointer}: ${violations[0].message}`;
    return;
  }
  try {
    const solve = await api.solve(session.draft);
    session.cache('/v1/solve', solve);
    let bounty = null;
    try {
      bounty = await api.bounty(session.draft);
      session.cache('/v1/bounty', bounty);
    } catch (err) {
      el('banner').textContent = bannerFor(err);
    }
    renderCard(buildEquilibriumCard(solve, bounty));
  } catch (err) {
    if ((err as Error).name === 'AbortError') {
      return; // superseded by a newer slider move
    }
    el('banner').textContent = bannerFor(err);
  }
}

const refreshDebounced = debounce(() => void refreshCard(), 150);

function bindSlider(id: string, apply: (value: number, draft: ReturnType<typeof fig2Defaults>) => void): void {
  const input = el<HTMLInputElement>(id);
  input.addEventListener('input', () => {
    const value = Number(input.value);
    const violations = session.update((draft) => apply(value, draft));
    if (violations.length > 0) {
      el('banner').textContent = `fix ${violations[0].pointer}: ${violations[0].message}`;
      return;
    }
    refreshDebounced();
  });
}

async function renderHeatmap(): Promise<void> {
  try {
    const resp = await api.heatmap(session.draft, { qMin: 2, qMax: 16, sMin: 1, sMax: 8 });
    session.cache('/v1/heatmap', resp);
    const grid = el('heatmap');
    grid.textContent = '';
    for (const cell of buildHeatmapView(resp)) {
      const div = document.createElement('div');
      div.className = cell.hatched ? 'cell hatched' : 'cell';
      div.title = `q=${cell.q}, s=${cell.s}${cell.flag ? ` (${cell.flag})` : ''}`;
      div.textContent = cell.label;
      div.addEventListener('click', () => {
        session.draft = applyCellToDraft(session.draft, cell);
        void refreshCard();
      });
      grid.appendChild(div);
    }
  } catch (err) {
    el('banner').textContent = bannerFor(err);
  }
}

function renderTrajectory(): void {
  if (!loop) {
    return;
  }
  const tbody = el('trajectory');
  tbody.textContent = '';
  for (const row of loop.trajectory) {
    const tr = document.createElement('tr');
    for (const cell of [row.iteration, row.q, row.B, row.lambdaImp, row.lambdaDollar, row.residualQ, row.residualDollar, row.welfare]) {
      const td = document.createElement('td');
      td.textContent = cell;
      tr.appendChild(td);
    }
    tbody.appendChild(tr);
  }
}

function startLoop(): void {
  const budgets = {
    R: Number(el<HTMLInputElement>('budget-r').value),
    M: Number(el<HTMLInputElement>('budget-m').value),
  };
  loop = new LoopConsole(api, session.draft, budgets, initialLoopState(session.draft, budgets, 100.0));
  renderTrajectory();
}

function wire(): void {
  bindSlider('slider-q', (v, d) => {
    d.policy.q = v;
  });
  bindSlider('slider-s', (v, d) => {
    d.policy.pass_model.s = v;
  });
  bindSlider('slider-bounty', (v, d) => {
    d.policy.B = v;
  });
  bindSlider('slider-alpha', (v, d) => {
    d.creator.alpha = v;
  });
  bindSlider('slider-kappa', (v, d) => {
    d.creator.kappa = v;
  });
  bindSlider('slider-dh', (v, d) => {
    d.continuation.dh = v;
  });
  bindSlider('slider-h0', (v, d) => {
    d.continuation.h0 = v;
  });
  bindSlider('slider-gamma', (v, d) => {
    d.continuation.gamma = v;
  });
  el('loop-start').addEventListener('click', () => startLoop());
  el('loop-step').addEventListener('click', () => {
    if (!loop) {
      startLoop();
    }
    void loop!
      .advance()
      .then(() => renderTrajectory())
      .catch((err) => {
        el('banner').textContent = bannerFor(err);
      });
  });
  el('override-b').addEventListener('change', () => {
    const value = Number(el<HTMLInputElement>('override-b').value);
    loop?.override('B', value);
  });
  el('heatmap-refresh').addEventListener('click', () => void renderHeatmap());
  void refreshCard();
}

document.addEventListener('DOMContentLoaded', wire);
