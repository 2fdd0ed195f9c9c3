/**
 * App wiring for the tuning studio. All solver math happens server-side;
 * this file moves payloads between the API client, the session state, and
 * the pure view-model renderers.
 */

import {
  ApiClient,
  ApiError,
  isDiscreteResult,
} from './api.js';
import type {
  CircularBody,
  CircularResultDoc,
  DatasetMeta,
  GridPayload,
  RunRecord,
  SolveResultDoc,
} from './api.js';
import { canCompare, metricDeltas, renderScatterSvg, scatterPairs } from './compare.js';
import type { Cell } from './grid.js';
import {
  buildGridView,
  cellAtPoint,
  cellCenterData,
  cellKey,
  renderGridSvg,
  ringFromCircular,
  selectionFromResult,
  validateGridPayload,
} from './grid.js';
import { pollRun } from './poll.js';
import { applyBounds, boundsOf, choicesOf, fieldSpec } from './schema.js';
import {
  canSubmit,
  historyEligible,
  initialState,
  pushHistory,
  solveBodyFromState,
} from './state.js';

const state = initialState();
let api = new ApiClient('http://127.0.0.1:8000');
let gridPayload: GridPayload | null = null;
let currentRun: RunRecord | null = null;
let lastDiscrete: RunRecord | null = null;
let compareA: RunRecord | null = null;
let compareB: RunRecord | null = null;

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

// ---- banners and inline messages ----

function showBanner(message: string): void {
  const banner = $('banner');
  banner.textContent = message;
  banner.classList.remove('hidden');
}

function clearBanner(): void {
  $('banner').classList.add('hidden');
}

function showSolveMsg(message: string): void {
  $('solveMsg').textContent = message;
}

// ---- grid panel ----

function displayedSelection(): Cell[] {
  if (!currentRun || !currentRun.result || currentRun.kind !== 'discrete') return [];
  const result = currentRun.result as SolveResultDoc;
  if (result.spec.d !== state.d) return [];
  return selectionFromResult(result);
}

function displayedRing() {
  if (!currentRun || !currentRun.result || currentRun.kind !== 'circular') return null;
  return ringFromCircular(currentRun.result as CircularResultDoc);
}

function renderGrid(): void {
  const host = $('gridHost');
  if (!gridPayload) {
    host.innerHTML = '<p class="muted">load a dataset to see its density</p>';
    return;
  }
  const view = buildGridView(gridPayload, displayedSelection(), state.poiCell, displayedRing());
  host.innerHTML = renderGridSvg(view);
  const svg = host.querySelector('svg');
  if (svg) svg.addEventListener('click', (e) => onGridClick(e as MouseEvent, view.side));
  const forbidden = state.forbiddenCells.map((c) => `(${c.row},${c.col})`).join(' ');
  $('forbiddenList').textContent = forbidden ? `forbidden: ${forbidden}` : '';
}

function onGridClick(e: MouseEvent, side: number): void {
  if (!gridPayload) return;
  const svg = e.currentTarget as SVGSVGElement;
  const rect = svg.getBoundingClientRect();
  const px = ((e.clientX - rect.left) / rect.width) * side;
  const py = ((e.clientY - rect.top) / rect.height) * side;
  const cell = cellAtPoint(gridPayload.L, px, py);
  if (!cell) return;
  if (e.shiftKey) {
    const key = cellKey(cell);
    const idx = state.forbiddenCells.findIndex((c) => cellKey(c) === key);
    if (idx >= 0) state.forbiddenCells.splice(idx, 1);
    else state.forbiddenCells.push(cell);
  } else {
    state.poiCell = cell;
  }
  renderGrid();
  renderButtons();
}

async function refreshGrid(): Promise<void> {
  if (!state.datasetId) return;
  try {
    const doc = await api.grid(state.datasetId, state.d);
    const problem = validateGridPayload(doc);
    if (problem) {
      showBanner(`grid payload mismatch: ${problem}`);
      return;
    }
    gridPayload = doc;
    clearBanner();
    renderGrid();
  } catch (e) {
    showBanner(`failed to load grid: ${e}`);
  }
}

// ---- datasets ----

async function refreshDatasets(selectId?: string): Promise<void> {
  const select = $<HTMLSelectElement>('datasetSelect');
  const datasets = await api.listDatasets();
  select.innerHTML = '';
  for (const meta of datasets) {
    const option = document.createElement('option');
    option.value = meta.id;
    option.textContent = `${meta.name} (${meta.id})`;
    select.appendChild(option);
  }
  if (selectId) select.value = selectId;
  if (select.value) await selectDataset(select.value, datasets);
}

async function selectDataset(id: string, datasets?: DatasetMeta[]): Promise<void> {
  state.datasetId = id;
  state.poiCell = null;
  state.forbiddenCells = [];
  currentRun = null;
  const all = datasets ?? (await api.listDatasets());
  const meta = all.find((m) => m.id === id);
  $('datasetMeta').textContent = meta
    ? `${meta.n_users} users, ${meta.n_points} points`
    : '';
  await refreshGrid();
  renderButtons();
}

async function loadPreset(name: 'data1' | 'data2'): Promise<void> {
  try {
    const meta = await api.createDataset({ synth: { preset: name } });
    await refreshDatasets(meta.id);
  } catch (e) {
    showBanner(`failed to load preset: ${e}`);
  }
}

// ---- solve flow ----

function renderButtons(): void {
  $<HTMLButtonElement>('solveBtn').disabled = !canSubmit(state);
  $<HTMLButtonElement>('circularBtn').disabled =
    state.inFlight || !state.datasetId || !state.poiCell;
}

async function runSolve(): Promise<void> {
  if (!canSubmit(state)) return;
  state.inFlight = true;
  renderButtons();
  showSolveMsg('');
  clearBanner();
  $('runStatus').textContent = 'submitting...';
  try {
    const submitted = await api.solve(solveBodyFromState(state));
    $('runStatus').textContent = `run ${submitted.run_id} queued`;
    const rec = await pollRun((id) => api.run(id), submitted.run_id);
    finishRun(rec);
  } catch (e) {
    if (e instanceof ApiError && e.status === 422) {
      showSolveMsg(
        `infeasible request: ${e.detail}; try widening the area window ` +
          'or easing the cover/area weights',
      );
    } else {
      showBanner(`solve failed: ${e}`);
    }
    $('runStatus').textContent = 'no run';
  } finally {
    state.inFlight = false;
    renderButtons();
  }
}

async function runCircular(): Promise<void> {
  if (!gridPayload || !state.datasetId || !state.poiCell || state.inFlight) return;
  state.inFlight = true;
  renderButtons();
  clearBanner();
  const poi = cellCenterData(gridPayload.bbox, gridPayload.L, state.poiCell);
  const body: CircularBody = { dataset_id: state.datasetId, poi, seed: state.seed };
  if ($<HTMLInputElement>('equalArea').checked && lastDiscrete?.result) {
    const x = (lastDiscrete.result as SolveResultDoc).x;
    const nSelected = x.flat().reduce((s, v) => s + v, 0);
    const cells = x.length * x.length;
    body.cover_oriented = true;
    body.r_star = Math.sqrt(nSelected / cells / Math.PI);
    body.epsilon = 0.01;
  }
  try {
    const submitted = await api.solveCircular(body);
    $('runStatus').textContent = `run ${submitted.run_id} queued`;
    const rec = await pollRun((id) => api.run(id), submitted.run_id);
    finishRun(rec);
  } catch (e) {
    showBanner(`circular solve failed: ${e}`);
  } finally {
    state.inFlight = false;
    renderButtons();
  }
}

function finishRun(rec: RunRecord): void {
  if (rec.status === 'failed') {
    showBanner(`run ${rec.run_id} failed: ${rec.error}`);
    $('runStatus').textContent = 'run failed';
    return;
  }
  currentRun = rec;
  if (rec.kind === 'discrete') lastDiscrete = rec;
  if (historyEligible(rec)) {
    pushHistory(state, rec);
    renderHistory();
  }
  renderResult(rec);
  renderGrid();
}

// ---- result panel ----

function renderResult(rec: RunRecord): void {
  $('runStatus').innerHTML =
    `run <code>${rec.run_id}</code> ${rec.kind}, ` +
    (rec.wall_time !== undefined ? `${rec.wall_time.toFixed(2)} s` : 'done');
  const metrics = rec.metrics;
  const rows: string[] = [];
  if (rec.result && isDiscreteResult(rec.result)) {
    const feasible = rec.result.feasible;
    rows.push(
      `<p>feasible: <span class="badge ${feasible ? 'ok' : 'bad'}">${feasible}</span> ` +
        `solver: ${rec.result.solver_id} seed: ${rec.result.seed}</p>`,
    );
  } else if (rec.result) {
    const c = rec.result as CircularResultDoc;
    rows.push(
      `<p>center (${c.cx.toFixed(3)}, ${c.cy.toFixed(3)}), r=${c.r.toFixed(3)}</p>`,
    );
  }
  if (metrics) {
    rows.push('<table><tr><th></th><th>value</th></tr>');
    rows.push(`<tr><td>UCR</td><td>${metrics.ucr.toFixed(4)}</td></tr>`);
    rows.push(`<tr><td>UPCR mean</td><td>${metrics.upcr_mean.toFixed(4)}</td></tr>`);
    rows.push(`<tr><td>UPCR std</td><td>${metrics.upcr_std.toFixed(4)}</td></tr>`);
    rows.push('</table>');
  }
  if (rec.result && isDiscreteResult(rec.result)) {
    rows.push('<table><tr><th>term</th><th>raw value</th></tr>');
    for (const [key, value] of Object.entries(rec.result.breakdown)) {
      rows.push(`<tr><td>${key}</td><td>${value === null ? 'nan' : value.toFixed(4)}</td></tr>`);
    }
    rows.push('</table>');
  }
  $('metrics').innerHTML = rows.join('');
}

// ---- history and compare ----

function renderHistory(): void {
  const list = $('history');
  list.innerHTML = '';
  for (const entry of [...state.history].reverse()) {
    const item = document.createElement('li');
    if (entry.run_id === state.pinnedRunId) item.classList.add('pinned');
    const label = document.createElement('span');
    label.textContent = `${entry.label} `;
    const tools = document.createElement('span');
    tools.className = 'tools';
    for (const [name, handler] of [
      ['view', () => viewRun(entry.run_id)],
      ['pin', () => pinRun(entry.run_id)],
      ['A', () => setCompare('A', entry.run_id)],
      ['B', () => setCompare('B', entry.run_id)],
    ] as [string, () => void][]) {
      const btn = document.createElement('button');
      btn.textContent = name;
      btn.addEventListener('click', handler);
      tools.appendChild(btn);
    }
    item.appendChild(label);
    item.appendChild(tools);
    list.appendChild(item);
  }
}

async function viewRun(runId: string): Promise<void> {
  try {
    const rec = await api.run(runId);
    currentRun = rec;
    const req = rec.request as Record<string, any>;
    if (rec.kind === 'discrete' && typeof req.d === 'number' && req.d !== state.d) {
      state.d = req.d;
      syncSliderLabels();
      await refreshGrid();
    }
    renderResult(rec);
    renderGrid();
  } catch (e) {
    showBanner(`failed to load run: ${e}`);
  }
}

function pinRun(runId: string): void {
  state.pinnedRunId = state.pinnedRunId === runId ? null : runId;
  renderHistory();
  if (state.pinnedRunId) setCompare('A', state.pinnedRunId);
}

async function setCompare(slot: 'A' | 'B', runId: string): Promise<void> {
  try {
    const rec = await api.run(runId);
    if (slot === 'A') compareA = rec;
    else compareB = rec;
  } catch (e) {
    showBanner(`failed to load run: ${e}`);
    return;
  }
  $('compareAName').textContent = compareA ? compareA.run_id : 'none';
  $('compareBName').textContent = compareB ? compareB.run_id : 'none';
  const gate = canCompare(compareA, compareB);
  const btn = $<HTMLButtonElement>('compareBtn');
  btn.disabled = !gate.ok;
  btn.title = gate.reason ?? '';
}

async function runViewSvg(rec: RunRecord): Promise<string> {
  if (!state.datasetId) return '';
  const req = rec.request as Record<string, any>;
  if (rec.kind === 'discrete' && rec.result) {
    const payload = await api.grid(state.datasetId, req.d);
    const result = rec.result as SolveResultDoc;
    const poi = rec.poi_cell ? { row: rec.poi_cell[0], col: rec.poi_cell[1] } : null;
    return renderGridSvg(buildGridView(payload, selectionFromResult(result), poi));
  }
  if (rec.kind === 'circular' && rec.result) {
    const payload = await api.grid(state.datasetId, state.d);
    const ring = ringFromCircular(rec.result as CircularResultDoc);
    return renderGridSvg(buildGridView(payload, [], null, ring));
  }
  return '';
}

async function renderCompare(): Promise<void> {
  if (!compareA || !compareB) return;
  const gate = canCompare(compareA, compareB);
  if (!gate.ok) return;
  $('compareBody').classList.remove('hidden');
  $('gridATitle').textContent = `${compareA.run_id} (${compareA.kind})`;
  $('gridBTitle').textContent = `${compareB.run_id} (${compareB.kind})`;
  $('gridA').innerHTML = await runViewSvg(compareA);
  $('gridB').innerHTML = await runViewSvg(compareB);
  const rows = ['<tr><th>metric</th><th>A</th><th>B</th><th>delta</th></tr>'];
  for (const d of metricDeltas(compareA, compareB)) {
    rows.push(
      `<tr><td>${d.label}</td><td>${d.a.toFixed(3)}</td>` +
        `<td>${d.b.toFixed(3)}</td><td>${d.delta}</td></tr>`,
    );
  }
  $('deltaTable').innerHTML = rows.join('');
  if (compareA.metrics && compareB.metrics) {
    const pairs = scatterPairs(compareA.metrics, compareB.metrics);
    $('scatterHost').innerHTML = renderScatterSvg(pairs);
  }
}

// ---- controls ----

const WEIGHT_STEPS: Record<string, number> = {
  a_area: 0.5,
  a_cover: 1,
  a_2dw: 0.5,
  a_ng: 0.5,
  alpha: 0.1,
  sigma: 0.1,
};

function syncSliderLabels(): void {
  $<HTMLInputElement>('d').value = String(state.d);
  $('dVal').textContent = `${state.d} (L=${2 ** state.d})`;
  for (const key of Object.keys(WEIGHT_STEPS)) {
    const value = (state.weights as any)[key];
    $<HTMLInputElement>(key).value = String(value);
    $(`${key}Val`).textContent = String(value);
  }
  $<HTMLInputElement>('minPct').value = String(state.window.min_pct);
  $('minPctVal').textContent = `${state.window.min_pct}%`;
  $<HTMLInputElement>('maxPct').value = String(state.window.max_pct);
  $('maxPctVal').textContent = `${state.window.max_pct}%`;
}

async function applySchema(): Promise<void> {
  const schema = await api.schema();
  $('apiVersion').textContent = `service ${schema.version}`;
  const solve = schema.solve;
  applyBounds($<HTMLInputElement>('d'), boundsOf(fieldSpec(solve, ['d'])), 1);
  for (const [key, step] of Object.entries(WEIGHT_STEPS)) {
    applyBounds(
      $<HTMLInputElement>(key),
      boundsOf(fieldSpec(solve, ['weights', key])),
      step,
    );
  }
  applyBounds($<HTMLInputElement>('minPct'), boundsOf(fieldSpec(solve, ['window', 'min_pct'])), 1);
  applyBounds($<HTMLInputElement>('maxPct'), boundsOf(fieldSpec(solve, ['window', 'max_pct'])), 1);
  const solverSelect = $<HTMLSelectElement>('solver');
  solverSelect.innerHTML = '';
  for (const choice of choicesOf(fieldSpec(solve, ['solver'])) ?? []) {
    const option = document.createElement('option');
    option.value = choice;
    option.textContent = choice;
    solverSelect.appendChild(option);
  }
  solverSelect.value = state.solver;
  const dwHost = $('dwChoices');
  dwHost.innerHTML = '';
  for (const dir of choicesOf(fieldSpec(solve, ['flags', 'dw_directions'])) ?? []) {
    const label = document.createElement('label');
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.value = dir;
    box.checked = state.dwDirections.includes(dir);
    box.addEventListener('change', () => {
      state.dwDirections = Array.from(
        dwHost.querySelectorAll<HTMLInputElement>('input:checked'),
      ).map((i) => i.value);
    });
    label.appendChild(box);
    label.appendChild(document.createTextNode(` ${dir}`));
    dwHost.appendChild(label);
  }
}

function wireControls(): void {
  $<HTMLInputElement>('d').addEventListener('input', async (e) => {
    state.d = Number((e.target as HTMLInputElement).value);
    syncSliderLabels();
    await refreshGrid();
  });
  for (const key of Object.keys(WEIGHT_STEPS)) {
    $<HTMLInputElement>(key).addEventListener('input', (e) => {
      (state.weights as any)[key] = Number((e.target as HTMLInputElement).value);
      syncSliderLabels();
    });
  }
  $<HTMLInputElement>('minPct').addEventListener('input', (e) => {
    state.window.min_pct = Number((e.target as HTMLInputElement).value);
    syncSliderLabels();
  });
  $<HTMLInputElement>('maxPct').addEventListener('input', (e) => {
    state.window.max_pct = Number((e.target as HTMLInputElement).value);
    syncSliderLabels();
  });
  $<HTMLInputElement>('useWindow').addEventListener('change', (e) => {
    state.useWindow = (e.target as HTMLInputElement).checked;
  });
  $<HTMLInputElement>('poiHard').addEventListener('change', (e) => {
    state.poiHard = (e.target as HTMLInputElement).checked;
  });
  $<HTMLSelectElement>('solver').addEventListener('change', (e) => {
    state.solver = (e.target as HTMLSelectElement).value as typeof state.solver;
  });
  $<HTMLInputElement>('seed').addEventListener('change', (e) => {
    state.seed = Number((e.target as HTMLInputElement).value) || 0;
  });
  $('solveForm').addEventListener('submit', (e) => {
    e.preventDefault();
    void runSolve();
  });
  $('circularForm').addEventListener('submit', (e) => {
    e.preventDefault();
    void runCircular();
  });
  $('loadData1').addEventListener('click', () => void loadPreset('data1'));
  $('loadData2').addEventListener('click', () => void loadPreset('data2'));
  $<HTMLSelectElement>('datasetSelect').addEventListener('change', (e) => {
    void selectDataset((e.target as HTMLSelectElement).value);
  });
  $('compareBtn').addEventListener('click', () => void renderCompare());
  $<HTMLInputElement>('apiBase').addEventListener('change', (e) => {
    api = new ApiClient((e.target as HTMLInputElement).value.replace(/\/$/, ''));
    void init();
  });
}

async function init(): Promise<void> {
  const fromQuery = new URLSearchParams(location.search).get('api');
  if (fromQuery) {
    api = new ApiClient(fromQuery.replace(/\/$/, ''));
    $<HTMLInputElement>('apiBase').value = api.baseUrl;
  }
  try {
    await applySchema();
    await refreshDatasets();
    clearBanner();
  } catch (e) {
    showBanner(`cannot reach the API at ${api.baseUrl}: ${e}`);
  }
  syncSliderLabels();
  renderGrid();
  renderButtons();
}

wireControls();
void init();
