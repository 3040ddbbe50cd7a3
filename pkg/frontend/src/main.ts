/** Page wiring: fetch, render, and event handling for the scenario explorer. */

import { ApiError, CATEGORIES, ScenarioClient } from './api.js';
import type { Category, DensitySummary } from './api.js';
import {
  applyError,
  applyScenarioResponse,
  buildScenarioRequest,
  displayedProbs,
  initialState,
  nextRequest,
  setAssignment,
} from './state.js';
import type { AppState } from './state.js';
import { histogramSvg } from './charts.js';

const params = new URLSearchParams(window.location.search);
const client = new ScenarioClient(params.get('api') ?? 'http://127.0.0.1:8040');

let state: AppState = initialState();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderError(): void {
  const banner = el<HTMLDivElement>('error-banner');
  banner.textContent = state.error ?? '';
  banner.hidden = state.error === null;
}

function probTable(summary: DensitySummary): string {
  const rows = displayedProbs(summary)
    .map(
      (r) =>
        `<tr class="cat-${r.category.toLowerCase()}">` +
        `<td>${r.category}</td><td class="num">${r.percent}</td></tr>`,
    )
    .join('');
  return `<table class="probs"><tbody>${rows}</tbody></table>`;
}

function assignmentControls(horizon: number): string {
  const current = state.assignments.get(horizon);
  const buttons = CATEGORIES.map((c) => {
    const active = current === c ? ' active' : '';
    return (
      `<button class="assign${active}" data-horizon="${horizon}" ` +
      `data-category="${c}">${c}</button>`
    );
  }).join('');
  const clear = current
    ? `<button class="assign clear" data-horizon="${horizon}" data-category="">×</button>`
    : '';
  return `<div class="controls">${buttons}${clear}</div>`;
}

function renderPanels(): void {
  const meta = state.meta;
  const root = el<HTMLDivElement>('panels');
  if (!meta) {
    root.innerHTML = '';
    return;
  }
  const observed = new Set(meta.observed_horizons);
  const panels: string[] = [];
  for (let h = 1; h <= meta.k; h++) {
    const season = meta.horizon_seasons[h - 1];
    const assigned = state.assignments.get(h);
    let body: string;
    if (observed.has(h)) {
      body = '<p class="note">observed — weights already conditioned</p>';
    } else if (assigned) {
      body = `<p class="note">scenario: <strong>${assigned}</strong></p>`;
    } else {
      const summary = state.summaries.get(h);
      body = summary ? histogramSvg(summary) + probTable(summary) : '<p class="note">loading…</p>';
    }
    panels.push(
      `<section class="panel"><h2>+${h} · ${season}</h2>` +
        body +
        (observed.has(h) ? '' : assignmentControls(h)) +
        '</section>',
    );
  }
  root.innerHTML = panels.join('');
  for (const btn of root.querySelectorAll<HTMLButtonElement>('button.assign')) {
    btn.addEventListener('click', () => {
      const horizon = Number(btn.dataset.horizon);
      const category = (btn.dataset.category || null) as Category | null;
      state = setAssignment(state, horizon, category);
      void refresh();
    });
  }
}

function renderHeader(): void {
  const meta = state.meta;
  el<HTMLSpanElement>('anchor-label').textContent = meta
    ? `${meta.target} from ${meta.anchor.season} ${meta.anchor.year} ` +
      `(${meta.n_threads} threads, snapshot ${state.snapshot ?? meta.snapshot})`
    : 'connecting…';
}

function render(): void {
  renderHeader();
  renderPanels();
  renderError();
}

async function refresh(): Promise<void> {
  const issued = nextRequest(state);
  state = issued.state;
  render();
  try {
    const resp = await client.postScenario(buildScenarioRequest(state));
    state = applyScenarioResponse(state, issued.seq, resp);
  } catch (err) {
    const msg =
      err instanceof ApiError
        ? `service error ${err.status}: ${err.message}`
        : 'service unreachable — is `tapestry serve` running?';
    state = applyError(state, issued.seq, msg);
  }
  render();
}

async function observe(): Promise<void> {
  const horizon = Number(el<HTMLInputElement>('observe-horizon').value);
  const value = Number(el<HTMLInputElement>('observe-value').value);
  if (!Number.isFinite(horizon) || !Number.isFinite(value)) return;
  try {
    const resp = await client.postObserve(horizon, value, state.snapshot ?? undefined);
    state = { ...state, snapshot: resp.snapshot, assignments: new Map(), error: null };
    state.meta = await client.getTapestry(resp.snapshot);
  } catch (err) {
    const msg =
      err instanceof ApiError ? `observe failed: ${err.message}` : 'service unreachable';
    state = { ...state, error: msg };
  }
  void refresh();
}

async function init(): Promise<void> {
  el<HTMLInputElement>('alpha').addEventListener('input', (ev) => {
    state = { ...state, alpha: Number((ev.target as HTMLInputElement).value) };
    el<HTMLSpanElement>('alpha-label').textContent = state.alpha.toFixed(2);
    void refresh();
  });
  el<HTMLButtonElement>('observe-submit').addEventListener('click', () => void observe());
  try {
    state.meta = await client.getTapestry();
  } catch {
    state = applyError(nextRequest(state).state, state.seq + 1, 'service unreachable — is `tapestry serve` running?');
    render();
    return;
  }
  await refresh();
}

void init();
