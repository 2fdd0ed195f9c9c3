import { describe, expect, it } from 'vitest';

import {
  boundsOf,
  choicesOf,
  defaultOf,
  fieldSpec,
  requiredOf,
} from '../src/schema.js';
import { initialState } from '../src/state.js';
import { fixture } from './helpers.js';

const schema = fixture<Record<string, any>>('schema.json');
const solve = schema.solve;

describe('bounds from the recorded request schema', () => {
  it('reads the grid-level range', () => {
    const b = boundsOf(fieldSpec(solve, ['d']));
    expect(b).toEqual({ min: 1, max: 7, exclusiveMin: false, integer: true });
  });

  it('reads nested weight ranges through $defs', () => {
    const cover = boundsOf(fieldSpec(solve, ['weights', 'a_cover']));
    expect(cover.min).toBe(0);
    expect(cover.max).toBe(1000);
    expect(cover.integer).toBe(false);
    const alpha = boundsOf(fieldSpec(solve, ['weights', 'alpha']));
    expect(alpha.min).toBe(0);
    expect(alpha.exclusiveMin).toBe(true);
    expect(alpha.max).toBe(10);
  });

  it('reads the nullable window branch', () => {
    for (const field of ['min_pct', 'max_pct']) {
      const b = boundsOf(fieldSpec(solve, ['window', field]));
      expect(b.min).toBe(0);
      expect(b.max).toBe(100);
    }
  });

  it('exposes solver and wall-direction choices', () => {
    expect(choicesOf(fieldSpec(solve, ['solver']))).toEqual(['exact', 'anneal', 'hier']);
    expect(choicesOf(fieldSpec(solve, ['flags', 'dw_directions']))).toEqual([
      'RD',
      'LU',
      'RU',
      'LD',
    ]);
  });

  it('marks seed as required', () => {
    const required = requiredOf(solve);
    expect(required).toContain('seed');
    expect(required).toContain('dataset_id');
  });

  it('rejects unknown fields loudly', () => {
    expect(() => fieldSpec(solve, ['no_such_field'])).toThrow(/no field/);
  });
});

describe('form defaults match the API defaults', () => {
  it('prefills the guideline starting point', () => {
    const s = initialState();
    expect(defaultOf(solve, ['d'])).toBe(s.d);
    expect(defaultOf(solve, ['solver'])).toBe(s.solver);
    expect(defaultOf(solve, ['weights'])).toEqual(s.weights);
    expect(defaultOf(solve, ['window'])).toEqual(s.window);
    expect(defaultOf(solve, ['flags', 'dw_directions'])).toEqual(s.dwDirections);
    expect((s.weights as any).a_2dw).toBe(1.0);
    expect((s.weights as any).a_ng).toBe(1.0);
    expect(s.window.max_pct).toBe(15.0);
  });
});
