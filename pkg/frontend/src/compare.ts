/**
 * Run comparison: metric deltas and the per-user coverage scatter.
 *
 * Scatter convention: x is run A's per-user covered fraction, y is run B's,
 * joined on uid. Points above the y = x diagonal are users B covers better.
 */

import type { CoverageDoc, RunRecord } from './api.js';
import { isDiscreteResult } from './api.js';

export type ScatterPoint = { uid: string; x: number; y: number };

export type MetricDelta = { label: string; a: number; b: number; delta: string };

export type CompareGate = { ok: boolean; reason: string | null };

/** Signed fixed-point formatting used by the delta panel. */
export function fmt3(v: number): string {
  let text = v.toFixed(3);
  if (text === '-0.000') text = '0.000';
  return v > 0 && text !== '0.000' ? `+${text}` : text;
}

export function canCompare(a: RunRecord | null, b: RunRecord | null): CompareGate {
  if (!a || !b) return { ok: false, reason: 'pick two runs to compare' };
  if (a.status !== 'done' || b.status !== 'done') {
    return { ok: false, reason: 'both runs must be done' };
  }
  const dsA = a.request['dataset_id'];
  const dsB = b.request['dataset_id'];
  if (dsA !== dsB) {
    return { ok: false, reason: 'runs use different datasets' };
  }
  return { ok: true, reason: null };
}

export function scatterPairs(a: CoverageDoc, b: CoverageDoc): ScatterPoint[] {
  const byUid = new Map(b.per_user.map((p) => [p.uid, p.fraction]));
  const out: ScatterPoint[] = [];
  for (const p of a.per_user) {
    const y = byUid.get(p.uid);
    if (y !== undefined) out.push({ uid: p.uid, x: p.fraction, y });
  }
  return out;
}

export function metricDeltas(a: RunRecord, b: RunRecord): MetricDelta[] {
  const out: MetricDelta[] = [];
  const ma = a.metrics;
  const mb = b.metrics;
  if (ma && mb) {
    out.push({ label: 'UCR', a: ma.ucr, b: mb.ucr, delta: fmt3(mb.ucr - ma.ucr) });
    out.push({
      label: 'UPCR mean',
      a: ma.upcr_mean,
      b: mb.upcr_mean,
      delta: fmt3(mb.upcr_mean - ma.upcr_mean),
    });
    out.push({
      label: 'UPCR std',
      a: ma.upcr_std,
      b: mb.upcr_std,
      delta: fmt3(mb.upcr_std - ma.upcr_std),
    });
  }
  if (
    a.result && b.result &&
    isDiscreteResult(a.result) && isDiscreteResult(b.result)
  ) {
    const count = (x: number[][]) => x.flat().reduce((s, v) => s + v, 0);
    const na = count(a.result.x);
    const nb = count(b.result.x);
    out.push({ label: 'cells', a: na, b: nb, delta: fmt3(nb - na) });
  }
  return out;
}

export const SCATTER_SIDE = 220;

export function renderScatterSvg(points: ScatterPoint[], side: number = SCATTER_SIDE): string {
  const parts: string[] = [];
  parts.push(
    `<svg class="scatter" viewBox="0 0 ${side} ${side}" xmlns="http://www.w3.org/2000/svg">`,
  );
  parts.push(`<rect class="frame" x="0" y="0" width="${side}" height="${side}"/>`);
  parts.push(`<line class="diag" x1="0" y1="${side}" x2="${side}" y2="0"/>`);
  for (const p of points) {
    const cx = p.x * side;
    const cy = side - p.y * side;
    parts.push(
      `<circle class="pt" data-uid="${p.uid}" cx="${cx}" cy="${cy}" r="3">` +
        `<title>${p.uid}: ${p.x.toFixed(3)} vs ${p.y.toFixed(3)}</title></circle>`,
    );
  }
  parts.push('</svg>');
  return parts.join('\n');
}

/** Parse plotted points back out of scatter markup (coordinates in view units). */
export function pointsFromScatterSvg(svg: string): { uid: string; cx: number; cy: number }[] {
  const out: { uid: string; cx: number; cy: number }[] = [];
  const tag = /<circle class="pt" data-uid="([^"]*)" cx="([^"]+)" cy="([^"]+)"/g;
  let m: RegExpExecArray | null;
  while ((m = tag.exec(svg)) !== null) {
    out.push({ uid: m[1], cx: Number(m[2]), cy: Number(m[3]) });
  }
  return out;
}
