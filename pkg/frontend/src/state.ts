/**
 * Session state for the tuning loop.
 *
 * The form starts at the guideline defaults (a_2dw = 1, a_ng = 1, 15% area
 * window) so the first solve reproduces the recommended starting point. The
 * history keeps at most the 50 newest completed runs client-side, ordered by
 * creation time; the service retains the full set.
 */

import type { RunRecord, SolveBody, SolverChoice, WeightsBody, WindowBody } from './api.js';
import type { Cell } from './grid.js';

export const HISTORY_CAP = 50;

export type HistoryEntry = {
  run_id: string;
  kind: string;
  created_at: string;
  label: string;
};

export type SessionState = {
  datasetId: string | null;
  d: number;
  poiCell: Cell | null;
  weights: WeightsBody;
  window: WindowBody;
  useWindow: boolean;
  poiHard: boolean;
  dwDirections: string[];
  forbiddenCells: Cell[];
  solver: SolverChoice;
  seed: number;
  history: HistoryEntry[];
  pinnedRunId: string | null;
  inFlight: boolean;
};

export function initialState(): SessionState {
  return {
    datasetId: null,
    d: 4,
    poiCell: null,
    weights: { a_area: 1.0, a_cover: 60.0, a_2dw: 1.0, a_ng: 1.0, alpha: 0.5, sigma: 0.5 },
    window: { min_pct: 12.0, max_pct: 15.0 },
    useWindow: true,
    poiHard: false,
    dwDirections: ['RD', 'LU'],
    forbiddenCells: [],
    solver: 'anneal',
    seed: 0,
    history: [],
    pinnedRunId: null,
    inFlight: false,
  };
}

export function canSubmit(state: SessionState): boolean {
  return !state.inFlight && state.datasetId !== null && state.poiCell !== null;
}

export function solveBodyFromState(state: SessionState): SolveBody {
  if (state.datasetId === null || state.poiCell === null) {
    throw new Error('dataset and POI cell must be set before solving');
  }
  return {
    dataset_id: state.datasetId,
    d: state.d,
    poi_cell: [state.poiCell.row, state.poiCell.col],
    weights: { ...state.weights },
    window: state.useWindow ? { ...state.window } : null,
    flags: {
      poi_hard: state.poiHard,
      dw_directions: [...state.dwDirections],
      forbidden_cells: state.forbiddenCells.map((c) => [c.row, c.col]),
    },
    solver: state.solver,
    seed: state.seed,
  };
}

/** Only completed runs enter the history; failures surface as banners. */
export function historyEligible(rec: RunRecord): boolean {
  return rec.status === 'done';
}

export function historyLabel(rec: RunRecord): string {
  const req = rec.request as Record<string, any>;
  if (rec.kind === 'circular') {
    return `circular seed=${req.seed}`;
  }
  const w = req.window;
  const windowText = w ? `${w.min_pct}-${w.max_pct}%` : 'no window';
  return `${req.solver} d=${req.d} ${windowText} seed=${req.seed}`;
}

export function pushHistory(state: SessionState, rec: RunRecord): void {
  state.history.push({
    run_id: rec.run_id,
    kind: rec.kind,
    created_at: rec.created_at,
    label: historyLabel(rec),
  });
  state.history.sort((a, b) => a.created_at.localeCompare(b.created_at));
  if (state.history.length > HISTORY_CAP) {
    state.history.splice(0, state.history.length - HISTORY_CAP);
  }
  if (state.pinnedRunId && !state.history.some((h) => h.run_id === state.pinnedRunId)) {
    state.pinnedRunId = null;
  }
}
