import { describe, expect, it } from 'vitest';

import type { GridPayload, RunRecord, SolveResultDoc } from '../src/api.js';
import {
  CELL_PX,
  buildGridView,
  cellAtPoint,
  cellCenterData,
  cellSetOf,
  renderGridSvg,
  selectedCellsFromSvg,
  selectionFromResult,
  validateGridPayload,
} from '../src/grid.js';
import { fixture } from './helpers.js';

const tiny: GridPayload = {
  d: 1,
  L: 2,
  bbox: [0, 0, 10, 10],
  values: [
    [0, 1],
    [2, 4],
  ],
  pois: null,
};

describe('payload validation', () => {
  it('accepts a well-formed payload', () => {
    expect(validateGridPayload(tiny)).toBeNull();
    expect(validateGridPayload(fixture('grid_data1_d4.json'))).toBeNull();
  });

  it('rejects shape mismatches with a message', () => {
    expect(validateGridPayload(null)).toMatch(/not an object/);
    expect(validateGridPayload({ L: 2, d: 1, bbox: [0, 0, 1, 1] })).toMatch(/value rows/);
    expect(validateGridPayload({ ...tiny, values: [[0, 1]] })).toMatch(/2 value rows/);
    expect(
      validateGridPayload({ ...tiny, values: [[0, 1], [2]] }),
    ).toMatch(/each have 2 entries/);
    expect(validateGridPayload({ ...tiny, bbox: [0, 0, 1] })).toMatch(/bbox/);
  });
});

describe('view geometry', () => {
  it('renders row 0 at the bottom of the view', () => {
    const view = buildGridView(tiny, [], null);
    const at = (row: number, col: number) =>
      view.cells.find((c) => c.row === row && c.col === col)!;
    expect(at(0, 0).y).toBe(CELL_PX);
    expect(at(1, 0).y).toBe(0);
    expect(at(0, 1).x).toBe(CELL_PX);
  });

  it('shades proportionally to V', () => {
    const view = buildGridView(tiny, [], null);
    const shade = (row: number, col: number) =>
      view.cells.find((c) => c.row === row && c.col === col)!.shade;
    expect(shade(0, 0)).toBe(0);
    expect(shade(0, 1)).toBeCloseTo(0.25, 12);
    expect(shade(1, 0)).toBeCloseTo(0.5, 12);
    expect(shade(1, 1)).toBe(1);
  });

  it('handles an all-zero grid without dividing by zero', () => {
    const flat = { ...tiny, values: [[0, 0], [0, 0]] };
    const view = buildGridView(flat, [], null);
    expect(view.cells.every((c) => c.shade === 0)).toBe(true);
  });

  it('maps clicks back to the cell the rect covers', () => {
    const L = 4;
    for (let row = 0; row < L; row++) {
      for (let col = 0; col < L; col++) {
        const px = col * CELL_PX + CELL_PX / 2;
        const py = (L - 1 - row) * CELL_PX + CELL_PX / 2;
        expect(cellAtPoint(L, px, py)).toEqual({ row, col });
      }
    }
    expect(cellAtPoint(L, -1, 5)).toBeNull();
    expect(cellAtPoint(L, L * CELL_PX, 5)).toBeNull();
  });

  it('computes data-space cell centers from the bbox', () => {
    expect(cellCenterData([0, 0, 10, 10], 4, { row: 0, col: 0 })).toEqual([1.25, 1.25]);
    expect(cellCenterData([0, 0, 10, 10], 4, { row: 3, col: 2 })).toEqual([6.25, 8.75]);
    expect(cellCenterData([-5, 10, 5, 30], 2, { row: 1, col: 0 })).toEqual([-2.5, 25]);
  });
});

describe('svg rendering', () => {
  it('outlines nothing for an empty selection and everything for a full one', () => {
    expect(selectedCellsFromSvg(renderGridSvg(buildGridView(tiny, [], null)))).toEqual([]);
    const all = [
      { row: 0, col: 0 },
      { row: 0, col: 1 },
      { row: 1, col: 0 },
      { row: 1, col: 1 },
    ];
    const svg = renderGridSvg(buildGridView(tiny, all, null));
    expect(cellSetOf(selectedCellsFromSvg(svg))).toEqual(cellSetOf(all));
  });

  it('draws the POI marker and the circular ring overlay', () => {
    const ring = { cx: 0.5, cy: 0.25, r: 0.1 };
    const view = buildGridView(tiny, [], { row: 1, col: 0 }, ring);
    const svg = renderGridSvg(view);
    expect(svg).toContain('class="poi"');
    const side = view.side;
    expect(svg).toContain(
      `<circle class="ring" cx="${0.5 * side}" cy="${side - 0.25 * side}" r="${0.1 * side}"/>`,
    );
  });

  it('marks dataset POIs as hint dots in view coordinates', () => {
    const withPois = { ...tiny, pois: [[5, 5]] };
    const svg = renderGridSvg(buildGridView(withPois, [], null));
    const side = 2 * CELL_PX;
    expect(svg).toContain(`<circle class="poi-hint" cx="${side / 2}" cy="${side / 2}"`);
  });
});

describe('selection extraction', () => {
  it('reads exactly the 1-cells of a recorded result', () => {
    const rec = fixture<RunRecord>('run_discrete.json');
    const result = rec.result as SolveResultDoc;
    const cells = selectionFromResult(result);
    const expected = result.x.flat().reduce((s, v) => s + v, 0);
    expect(cells.length).toBe(expected);
    for (const c of cells) expect(result.x[c.row][c.col]).toBe(1);
  });
});
