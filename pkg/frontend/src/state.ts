/** Pure application state: assignment tracking, request construction, and
 * stale-response protection. Rendering and fetching live elsewhere so this
 * module stays testable without a DOM. */

import type {
  Assignment,
  Category,
  DensitySummary,
  ScenarioRequest,
  ScenarioResponse,
  TapestryMeta,
} from './api.js';

export interface AppState {
  meta: TapestryMeta | null;
  assignments: Map<number, Category>;
  alpha: number;
  bins: number;
  snapshot: string | null;
  /** Per-horizon summaries currently on screen. */
  summaries: Map<number, DensitySummary>;
  /** Sequence number of the newest request in flight. */
  seq: number;
  /** Sequence number of the response the summaries came from. */
  appliedSeq: number;
  error: string | null;
}

export function initialState(): AppState {
  return {
    meta: null,
    assignments: new Map(),
    alpha: 0.1,
    bins: 20,
    snapshot: null,
    summaries: new Map(),
    seq: 0,
    appliedSeq: -1,
    error: null,
  };
}

export function setAssignment(
  state: AppState,
  horizon: number,
  category: Category | null,
): AppState {
  const assignments = new Map(state.assignments);
  if (category === null) assignments.delete(horizon);
  else assignments.set(horizon, category);
  return { ...state, assignments };
}

export function buildScenarioRequest(state: AppState): ScenarioRequest {
  const assignments: Assignment[] = [...state.assignments.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([horizon, category]) => ({ horizon, category }));
  return {
    assignments,
    alpha: state.alpha,
    bins: state.bins,
    snapshot: state.snapshot,
  };
}

/** Bump the sequence counter before sending; the returned seq tags the
 * request so its response can be rejected if a newer one was issued. */
export function nextRequest(state: AppState): { state: AppState; seq: number } {
  const seq = state.seq + 1;
  return { state: { ...state, seq }, seq };
}

/** Merge a scenario response, unless a newer request has been issued since
 * (out-of-order completion must not clobber fresher data). */
export function applyScenarioResponse(
  state: AppState,
  seq: number,
  resp: ScenarioResponse,
): AppState {
  if (seq < state.seq || seq <= state.appliedSeq) return state;
  const summaries = new Map<number, DensitySummary>();
  for (const [h, summary] of Object.entries(resp.horizons)) {
    summaries.set(Number(h), summary);
  }
  return { ...state, summaries, appliedSeq: seq, error: null };
}

export function applyError(state: AppState, seq: number, message: string): AppState {
  if (seq < state.seq) return state;
  return { ...state, error: message };
}

/** What the probability readout shows for one horizon. Values pass through
 * untouched; only the percent strings are derived. */
export interface ProbRow {
  category: Category;
  probability: number;
  percent: string;
}

export function displayedProbs(summary: DensitySummary): ProbRow[] {
  const cats: Category[] = ['Low', 'Medium', 'High'];
  return cats.map((category) => {
    const probability = summary.category_probs[category];
    return { category, probability, percent: `${(100 * probability).toFixed(1)}%` };
  });
}

/** Horizons still open for conditioning: not observed, not assigned. */
export function openHorizons(state: AppState): number[] {
  if (!state.meta) return [];
  const observed = new Set(state.meta.observed_horizons);
  const out: number[] = [];
  for (let h = 1; h <= state.meta.k; h++) {
    if (!observed.has(h) && !state.assignments.has(h)) out.push(h);
  }
  return out;
}
