/**
 * Typed client for the gridfence HTTP/JSON API.
 *
 * Every number the studio displays comes out of these response payloads;
 * the client never recomputes objective terms or coverage locally.
 */

export type RunStatus = 'queued' | 'running' | 'done' | 'failed';
export type RunKind = 'discrete' | 'circular';
export type SolverChoice = 'exact' | 'anneal' | 'hier';

export type DatasetMeta = {
  id: string;
  name: string;
  status: string;
  n_users: number;
  n_points: number;
  bbox: [number, number, number, number];
  pois: number[][] | null;
  created_at: string;
};

export type GridPayload = {
  d: number;
  L: number;
  bbox: [number, number, number, number];
  values: number[][];
  pois: number[][] | null;
};

export type SolveResultDoc = {
  x: number[][];
  spec: { d: number; bbox: number[] };
  breakdown: Record<string, number | null>;
  feasible: boolean;
  solver_id: string;
  seed: number | null;
};

export type CircularResultDoc = {
  cx: number;
  cy: number;
  r: number;
  objective: number;
  coverage: number;
};

export type PerUserFraction = { uid: string; fraction: number };

export type CoverageDoc = {
  ucr: number;
  upcr_mean: number;
  upcr_std: number;
  per_user: PerUserFraction[];
  geofence_kind: string;
};

export type RunRecord = {
  run_id: string;
  kind: RunKind;
  status: RunStatus;
  request: Record<string, unknown>;
  result: SolveResultDoc | CircularResultDoc | null;
  metrics: CoverageDoc | null;
  error: string | null;
  created_at: string;
  wall_time?: number;
  poi_cell?: [number, number];
};

export type RunSummary = {
  run_id: string;
  kind: RunKind;
  status: RunStatus;
  dataset_id: string | null;
  created_at: string;
  error: string | null;
};

export type WeightsBody = {
  a_area: number;
  a_cover: number;
  a_2dw: number;
  a_ng: number;
  alpha: number;
  sigma: number;
};

export type WindowBody = { min_pct: number; max_pct: number };

export type FlagsBody = {
  poi_hard: boolean;
  dw_directions: string[];
  forbidden_cells: number[][];
};

export type SolveBody = {
  dataset_id: string;
  d: number;
  poi_cell: [number, number];
  weights: WeightsBody;
  window: WindowBody | null;
  flags: FlagsBody;
  solver: SolverChoice;
  seed: number;
};

export type CircularBody = {
  dataset_id: string;
  poi: [number, number];
  cr_limit?: number;
  mu?: number;
  cover_oriented?: boolean;
  r_star?: number;
  epsilon?: number;
  seed: number;
};

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private async call<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    if (!response.ok) {
      let detail = await response.text();
      try {
        const doc = JSON.parse(detail);
        if (doc.detail !== undefined) {
          detail = typeof doc.detail === 'string' ? doc.detail : JSON.stringify(doc.detail);
        }
      } catch {
        // plain-text error body
      }
      throw new ApiError(response.status, detail);
    }
    return response.json() as Promise<T>;
  }

  schema(): Promise<Record<string, any>> {
    return this.call('/api/schema');
  }

  listDatasets(): Promise<DatasetMeta[]> {
    return this.call('/api/datasets');
  }

  createDataset(body: Record<string, unknown>): Promise<DatasetMeta> {
    return this.call('/api/datasets', { method: 'POST', body: JSON.stringify(body) });
  }

  grid(datasetId: string, d: number): Promise<GridPayload> {
    return this.call(`/api/datasets/${datasetId}/grid?d=${d}`);
  }

  solve(body: SolveBody): Promise<RunRecord> {
    return this.call('/api/solve', { method: 'POST', body: JSON.stringify(body) });
  }

  solveCircular(body: CircularBody): Promise<RunRecord> {
    return this.call('/api/solve/circular', { method: 'POST', body: JSON.stringify(body) });
  }

  listRuns(): Promise<RunSummary[]> {
    return this.call('/api/runs');
  }

  run(runId: string): Promise<RunRecord> {
    return this.call(`/api/runs/${runId}`);
  }

  deleteRun(runId: string): Promise<{ deleted: string }> {
    return this.call(`/api/runs/${runId}`, { method: 'DELETE' });
  }
}

export function isDiscreteResult(r: SolveResultDoc | CircularResultDoc): r is SolveResultDoc {
  return (r as SolveResultDoc).x !== undefined;
}
