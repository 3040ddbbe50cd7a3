/** Typed client for the scenario-conditioning HTTP API. */

export type Category = 'Low' | 'Medium' | 'High';

export const CATEGORIES: Category[] = ['Low', 'Medium', 'High'];

export interface TapestryMeta {
  snapshot: string;
  anchor: { year: number; season: string };
  k: number;
  n_threads: number;
  target: string;
  observed_horizons: number[];
  horizon_seasons: string[];
  category_bounds: number[][] | null;
}

export interface DensitySummary {
  horizon: number;
  season: string;
  bin_edges: number[];
  bin_weights: number[];
  category_probs: Record<Category, number>;
  tercile_bounds: [number, number];
}

export interface Assignment {
  horizon: number;
  category: Category;
}

export interface ScenarioRequest {
  assignments: Assignment[];
  alpha: number;
  bins: number;
  snapshot?: string | null;
}

export interface ScenarioResponse {
  assignments: Assignment[];
  alpha: number;
  horizons: Record<string, DensitySummary>;
}

export interface ObserveResponse {
  snapshot: string;
  previous: string;
  observed: [number, number][];
  degeneracy_events: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === 'string') detail = body.detail;
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

export class ScenarioClient {
  constructor(readonly baseUrl: string = '') {}

  getTapestry(snapshot?: string): Promise<TapestryMeta> {
    const q = snapshot ? `?snapshot=${encodeURIComponent(snapshot)}` : '';
    return fetch(`${this.baseUrl}/tapestry${q}`).then((r) => asJson<TapestryMeta>(r));
  }

  getDensity(horizon: number, bins = 20, snapshot?: string): Promise<DensitySummary> {
    const params = new URLSearchParams({ horizon: String(horizon), bins: String(bins) });
    if (snapshot) params.set('snapshot', snapshot);
    return fetch(`${this.baseUrl}/density?${params}`).then((r) => asJson<DensitySummary>(r));
  }

  postScenario(req: ScenarioRequest): Promise<ScenarioResponse> {
    return fetch(`${this.baseUrl}/scenario`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(req),
    }).then((r) => asJson<ScenarioResponse>(r));
  }

  postObserve(horizon: number, value: number, snapshot?: string): Promise<ObserveResponse> {
    return fetch(`${this.baseUrl}/observe`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ horizon, value, snapshot: snapshot ?? null }),
    }).then((r) => asJson<ObserveResponse>(r));
  }
}
