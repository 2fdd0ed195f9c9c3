/**
 * Grid view model and SVG rendering.
 *
 * Pure string-producing functions: payload in, markup out. Row 0 of the
 * density matrix is the minimum-y row, so it renders at the bottom of the
 * view; clicks invert the same mapping. Rendering never touches the model
 * terms; shading is the payload's V values rescaled to [0, 1] for display.
 */

import type { CircularResultDoc, GridPayload, SolveResultDoc } from './api.js';

export const CELL_PX = 16;

export type Cell = { row: number; col: number };

export type Ring = { cx: number; cy: number; r: number };

export type CellView = {
  row: number;
  col: number;
  x: number;
  y: number;
  shade: number;
  selected: boolean;
};

export type GridView = {
  L: number;
  side: number;
  cells: CellView[];
  poi: Cell | null;
  ring: Ring | null;
  markers: { x: number; y: number }[];
};

export function cellKey(cell: Cell): string {
  return `${cell.row},${cell.col}`;
}

export function cellSetOf(cells: Cell[]): Set<string> {
  return new Set(cells.map(cellKey));
}

/** Shape check for GET /api/datasets/{id}/grid; returns a message or null. */
export function validateGridPayload(doc: any): string | null {
  if (doc === null || typeof doc !== 'object') return 'grid payload is not an object';
  if (typeof doc.L !== 'number' || typeof doc.d !== 'number') {
    return 'grid payload missing L or d';
  }
  if (!Array.isArray(doc.bbox) || doc.bbox.length !== 4) {
    return 'grid payload bbox must have 4 entries';
  }
  if (!Array.isArray(doc.values) || doc.values.length !== doc.L) {
    return `grid payload needs ${doc.L} value rows`;
  }
  for (const row of doc.values) {
    if (!Array.isArray(row) || row.length !== doc.L) {
      return `grid payload rows must each have ${doc.L} entries`;
    }
  }
  return null;
}

/** Cells set to 1 in a discrete result's X matrix, row-major. */
export function selectionFromResult(result: SolveResultDoc): Cell[] {
  const out: Cell[] = [];
  for (let row = 0; row < result.x.length; row++) {
    for (let col = 0; col < result.x[row].length; col++) {
      if (result.x[row][col] === 1) out.push({ row, col });
    }
  }
  return out;
}

export function ringFromCircular(result: CircularResultDoc): Ring {
  return { cx: result.cx, cy: result.cy, r: result.r };
}

export function buildGridView(
  payload: GridPayload,
  selection: Cell[],
  poi: Cell | null,
  ring: Ring | null = null,
): GridView {
  const L = payload.L;
  const side = L * CELL_PX;
  let vmax = 0;
  for (const row of payload.values) {
    for (const v of row) if (v > vmax) vmax = v;
  }
  const selected = cellSetOf(selection);
  const cells: CellView[] = [];
  for (let row = 0; row < L; row++) {
    for (let col = 0; col < L; col++) {
      cells.push({
        row,
        col,
        x: col * CELL_PX,
        y: (L - 1 - row) * CELL_PX,
        shade: vmax > 0 ? payload.values[row][col] / vmax : 0,
        selected: selected.has(`${row},${col}`),
      });
    }
  }
  const markers = (payload.pois ?? []).map(([px, py]) => dataToView(payload.bbox, side, px, py));
  return { L, side, cells, poi, ring, markers };
}

function dataToView(
  bbox: [number, number, number, number],
  side: number,
  x: number,
  y: number,
): { x: number; y: number } {
  const [xmin, ymin, xmax, ymax] = bbox;
  const fx = xmax > xmin ? (x - xmin) / (xmax - xmin) : 0.5;
  const fy = ymax > ymin ? (y - ymin) / (ymax - ymin) : 0.5;
  return { x: fx * side, y: side - fy * side };
}

function shadeColor(t: number): string {
  // light slate to deep indigo ramp
  const from = [238, 242, 255];
  const to = [49, 46, 129];
  const c = from.map((f, i) => Math.round(f + (to[i] - f) * t));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export function renderGridSvg(view: GridView): string {
  const parts: string[] = [];
  parts.push(
    `<svg class="grid" viewBox="0 0 ${view.side} ${view.side}" ` +
      `xmlns="http://www.w3.org/2000/svg" data-l="${view.L}">`,
  );
  for (const c of view.cells) {
    const cls = c.selected ? 'cell sel' : 'cell';
    parts.push(
      `<rect class="${cls}" data-row="${c.row}" data-col="${c.col}" ` +
        `x="${c.x}" y="${c.y}" width="${CELL_PX}" height="${CELL_PX}" ` +
        `fill="${shadeColor(c.shade)}"><title>(${c.row},${c.col}) v=${c.shade.toFixed(3)}</title></rect>`,
    );
  }
  for (const m of view.markers) {
    parts.push(`<circle class="poi-hint" cx="${m.x}" cy="${m.y}" r="2.5"/>`);
  }
  if (view.ring) {
    const cx = view.ring.cx * view.side;
    const cy = view.side - view.ring.cy * view.side;
    const r = view.ring.r * view.side;
    parts.push(`<circle class="ring" cx="${cx}" cy="${cy}" r="${r}"/>`);
  }
  if (view.poi) {
    const px = view.poi.col * CELL_PX + CELL_PX / 2;
    const py = (view.L - 1 - view.poi.row) * CELL_PX + CELL_PX / 2;
    parts.push(`<circle class="poi" cx="${px}" cy="${py}" r="${CELL_PX / 3}"/>`);
    parts.push(
      `<line class="poi" x1="${px - CELL_PX / 2}" y1="${py}" x2="${px + CELL_PX / 2}" y2="${py}"/>`,
    );
    parts.push(
      `<line class="poi" x1="${px}" y1="${py - CELL_PX / 2}" x2="${px}" y2="${py + CELL_PX / 2}"/>`,
    );
  }
  parts.push('</svg>');
  return parts.join('\n');
}

/** Read the outlined cells back out of rendered grid markup. */
export function selectedCellsFromSvg(svg: string): Cell[] {
  const out: Cell[] = [];
  const tag = /<rect class="cell sel" data-row="(\d+)" data-col="(\d+)"/g;
  let m: RegExpExecArray | null;
  while ((m = tag.exec(svg)) !== null) {
    out.push({ row: Number(m[1]), col: Number(m[2]) });
  }
  return out;
}

/** Map view coordinates (same units as the svg viewBox) back to a cell. */
export function cellAtPoint(L: number, px: number, py: number): Cell | null {
  const side = L * CELL_PX;
  if (px < 0 || py < 0 || px >= side || py >= side) return null;
  const col = Math.floor(px / CELL_PX);
  const row = L - 1 - Math.floor(py / CELL_PX);
  return { row, col };
}

/** Data-space center of a cell, for endpoints that take a raw-coordinate POI. */
export function cellCenterData(
  bbox: [number, number, number, number],
  L: number,
  cell: Cell,
): [number, number] {
  const [xmin, ymin, xmax, ymax] = bbox;
  const fx = (cell.col + 0.5) / L;
  const fy = (cell.row + 0.5) / L;
  return [xmin + fx * (xmax - xmin), ymin + fy * (ymax - ymin)];
}
