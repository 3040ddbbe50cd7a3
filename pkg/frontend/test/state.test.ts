import { describe, expect, it } from 'vitest';

import type { DensitySummary, ScenarioResponse, TapestryMeta } from '../src/api.js';
import {
  applyError,
  applyScenarioResponse,
  buildScenarioRequest,
  displayedProbs,
  initialState,
  nextRequest,
  openHorizons,
  setAssignment,
} from '../src/state.js';

function summary(horizon: number, probs: [number, number, number]): DensitySummary {
  return {
    horizon,
    season: 'Summer',
    bin_edges: [0, 1, 2],
    bin_weights: [0.4, 0.6],
    category_probs: { Low: probs[0], Medium: probs[1], High: probs[2] },
    tercile_bounds: [-0.43, 0.43],
  };
}

function scenarioResponse(horizons: number[]): ScenarioResponse {
  const out: ScenarioResponse = { assignments: [], alpha: 0.1, horizons: {} };
  for (const h of horizons) out.horizons[String(h)] = summary(h, [0.2, 0.3, 0.5]);
  return out;
}

describe('assignments and request building', () => {
  it('sorts assignments by horizon in the request body', () => {
    let s = initialState();
    s = setAssignment(s, 3, 'Low');
    s = setAssignment(s, 1, 'High');
    const req = buildScenarioRequest(s);
    expect(req.assignments).toEqual([
      { horizon: 1, category: 'High' },
      { horizon: 3, category: 'Low' },
    ]);
    expect(req.alpha).toBe(0.1);
  });

  it('clearing an assignment removes it without touching others', () => {
    let s = initialState();
    s = setAssignment(s, 2, 'Medium');
    s = setAssignment(s, 4, 'High');
    s = setAssignment(s, 2, null);
    expect([...s.assignments.keys()]).toEqual([4]);
  });

  it('reassigning a horizon replaces its category', () => {
    let s = initialState();
    s = setAssignment(s, 2, 'Low');
    s = setAssignment(s, 2, 'High');
    expect(buildScenarioRequest(s).assignments).toEqual([{ horizon: 2, category: 'High' }]);
  });
});

describe('stale response protection', () => {
  it('applies a fresh response', () => {
    let s = initialState();
    const { state, seq } = nextRequest(s);
    s = applyScenarioResponse(state, seq, scenarioResponse([1, 2]));
    expect([...s.summaries.keys()]).toEqual([1, 2]);
    expect(s.appliedSeq).toBe(seq);
  });

  it('ignores a response that arrives after a newer request was issued', () => {
    let s = initialState();
    const first = nextRequest(s);
    const second = nextRequest(first.state);
    s = applyScenarioResponse(second.state, second.seq, scenarioResponse([3]));
    const clobbered = applyScenarioResponse(s, first.seq, scenarioResponse([1]));
    expect(clobbered).toBe(s);
    expect([...clobbered.summaries.keys()]).toEqual([3]);
  });

  it('ignores stale errors but keeps fresh ones', () => {
    let s = initialState();
    const first = nextRequest(s);
    const second = nextRequest(first.state);
    expect(applyError(second.state, first.seq, 'old failure').error).toBeNull();
    expect(applyError(second.state, second.seq, 'new failure').error).toBe('new failure');
  });

  it('a successful response clears a previous error', () => {
    let s = initialState();
    const first = nextRequest(s);
    s = applyError(first.state, first.seq, 'down');
    const second = nextRequest(s);
    s = applyScenarioResponse(second.state, second.seq, scenarioResponse([1]));
    expect(s.error).toBeNull();
  });
});

describe('derived views', () => {
  it('probability rows pass values through and format percents', () => {
    const rows = displayedProbs(summary(1, [0.25, 0.5, 0.25]));
    expect(rows.map((r) => r.probability)).toEqual([0.25, 0.5, 0.25]);
    expect(rows.map((r) => r.percent)).toEqual(['25.0%', '50.0%', '25.0%']);
  });

  it('open horizons exclude observed and assigned ones', () => {
    const meta: TapestryMeta = {
      snapshot: 'base',
      anchor: { year: 2038, season: 'Spring' },
      k: 4,
      n_threads: 30,
      target: 'x',
      observed_horizons: [1],
      horizon_seasons: ['Summer', 'Fall', 'Winter', 'Spring'],
      category_bounds: null,
    };
    let s = { ...initialState(), meta };
    s = setAssignment(s, 3, 'High');
    expect(openHorizons(s)).toEqual([2, 4]);
  });
});
