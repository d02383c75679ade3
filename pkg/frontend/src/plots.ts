/** The three figure builders. Each takes parsed CSV rows and returns SVG.
 *
 * PVAL_ECDF  — per-group ECDF of balance-test p-values with the 45-degree
 *              dashed red uniform reference.
 * SMD_BOX    — per-feature boxplots of SMDs with dashed red +/-0.2 thresholds.
 * GATE_CURVE — binned means with 95% CIs and a centered moving-average smooth.
 */

import { CsvError, num, numOrNull, Row } from './csv.js';
import { boxStats, ecdfPoints, movingAverage } from './stats.js';
import { assemble, el, makeFrame, PALETTE, STYLE } from './svg.js';

export type PlotKind = 'PVAL_ECDF' | 'SMD_BOX' | 'GATE_CURVE';

export const REQUIRED_COLUMNS: Record<PlotKind, string[]> = {
  PVAL_ECDF: ['p'],
  SMD_BOX: ['feature_id', 'kind', 'smd'],
  GATE_CURVE: ['bin_center', 'n_tests', 'mean_frac_sig', 'ci_lo', 'ci_hi'],
};

function groupRows(rows: Row[], column: string): Map<string, Row[]> {
  const groups = new Map<string, Row[]>();
  for (const row of rows) {
    const key = String(row[column] ?? 'all');
    const bucket = groups.get(key);
    if (bucket) bucket.push(row);
    else groups.set(key, [row]);
  }
  return new Map([...groups.entries()].sort((a, b) => a[0].localeCompare(b[0])));
}

export function renderPvalEcdf(rows: Row[], groupBy = 'kind'): string {
  const byGroup = rows.length && rows[0][groupBy] !== undefined
    ? groupRows(rows, groupBy)
    : new Map([['all', rows]]);
  const frame = makeFrame([0, 1], [0, 1]);
  const body: string[] = [];
  // uniform reference first so data draws on top of it
  body.push(el.line(frame.x(0), frame.y(0), frame.x(1), frame.y(1),
    STYLE.refDashedRed, 'uniform-reference'));
  let gi = 0;
  for (const [name, groupRowsList] of byGroup) {
    const pvals = groupRowsList.map((row) => {
      const p = num(row, 'p');
      if (p < 0 || p > 1) throw new CsvError(`p-value out of [0,1]: ${p}`);
      return p;
    });
    const pts = ecdfPoints(pvals);
    const color = PALETTE[gi % PALETTE.length];
    let d = `M ${frame.x(0)} ${frame.y(0)}`;
    let prevY = 0;
    for (const [xv, yv] of pts) {
      d += ` L ${frame.x(xv).toFixed(2)} ${frame.y(prevY).toFixed(2)}`;
      d += ` L ${frame.x(xv).toFixed(2)} ${frame.y(yv).toFixed(2)}`;
      prevY = yv;
    }
    d += ` L ${frame.x(1)} ${frame.y(1)}`;
    body.push(el.path(d, `stroke="${color}" stroke-width="1.5" fill="none"`, `ecdf-${name}`));
    body.push(el.text(frame.width - 150, 56 + 16 * gi,
      `${name} (n=${pvals.length})`, `font-size="11" fill="${color}"`, 'start'));
    gi += 1;
  }
  return assemble(frame, 'Empirical CDF of balance-test p-values', 'p-value',
    'cumulative fraction', body);
}

export function renderSmdBox(rows: Row[]): string {
  const byFeature = groupRows(rows, 'feature_id');
  // structured features first (as emitted), then embeddings; both stable
  const order = [...byFeature.keys()].sort((a, b) => {
    const ka = String(byFeature.get(a)![0]['kind']);
    const kb = String(byFeature.get(b)![0]['kind']);
    if (ka !== kb) return ka === 'structured' ? -1 : 1;
    return a.localeCompare(b);
  });
  let lo = -0.25;
  let hi = 0.25;
  const stats = order.map((f) => {
    const values = byFeature.get(f)!.map((row) => num(row, 'smd'));
    const s = boxStats(values);
    lo = Math.min(lo, s.whiskerLo, ...s.outliers);
    hi = Math.max(hi, s.whiskerHi, ...s.outliers);
    return s;
  });
  const frame = makeFrame([-0.5, order.length - 0.5], [lo - 0.02, hi + 0.02],
    Math.max(760, 18 + 11 * order.length), 480);
  const body: string[] = [];
  for (const t of [-0.2, 0.2]) {
    body.push(el.line(frame.x(-0.5), frame.y(t), frame.x(order.length - 0.5),
      frame.y(t), STYLE.refDashedRed, 'smd-threshold'));
  }
  const bw = Math.min(8, (frame.x(1) - frame.x(0)) * 0.7);
  stats.forEach((s, i) => {
    const cx = frame.x(i);
    const boxStyle = 'stroke="#1f77b4" stroke-width="1" fill="#aec7e8"';
    body.push(el.line(cx, frame.y(s.whiskerLo), cx, frame.y(s.q1), 'stroke="#1f77b4" stroke-width="1"'));
    body.push(el.line(cx, frame.y(s.q3), cx, frame.y(s.whiskerHi), 'stroke="#1f77b4" stroke-width="1"'));
    body.push(el.rect(cx - bw / 2, frame.y(s.q3), bw,
      Math.max(0.5, frame.y(s.q1) - frame.y(s.q3)), boxStyle, `box-${order[i]}`));
    body.push(el.line(cx - bw / 2, frame.y(s.median), cx + bw / 2, frame.y(s.median),
      'stroke="#10426b" stroke-width="1.5"'));
    for (const o of s.outliers.slice(0, 40)) {
      body.push(el.circle(cx, frame.y(o), 1.5, 'fill="#1f77b4" fill-opacity="0.5"'));
    }
  });
  // sparse x labels so 86 features stay readable
  const step = Math.max(1, Math.floor(order.length / 24));
  order.forEach((f, i) => {
    if (i % step === 0) {
      body.push(`<g transform="rotate(-60 ${frame.x(i).toFixed(2)} ${frame.height - frame.margin.bottom + 14})">`
        + el.text(frame.x(i), frame.height - frame.margin.bottom + 14, f,
          'font-size="8" fill="#333"', 'end') + '</g>');
    }
  });
  return assemble(frame, 'Standardized mean differences by feature', '',
    'SMD', body, []);
}

export function renderGateCurve(rows: Row[]): string {
  const pts = rows
    .map((row) => ({
      x: num(row, 'bin_center'),
      n: num(row, 'n_tests'),
      mean: numOrNull(row, 'mean_frac_sig'),
      lo: numOrNull(row, 'ci_lo'),
      hi: numOrNull(row, 'ci_hi'),
    }))
    .filter((p) => p.n > 0 && p.mean !== null);
  if (pts.length === 0) {
    throw new CsvError('gate curve has no populated bins');
  }
  const ys = pts.flatMap((p) => [p.mean!, p.lo ?? p.mean!, p.hi ?? p.mean!]);
  const frame = makeFrame(
    [Math.min(...pts.map((p) => p.x)), Math.max(...pts.map((p) => p.x))],
    [Math.min(0, ...ys), Math.max(0.1, ...ys) + 0.02]);
  const body: string[] = [];
  body.push(el.line(frame.x(frame.x.domain[0]), frame.y(0.05),
    frame.x(frame.x.domain[1]), frame.y(0.05), STYLE.refDashedRed, 'null-rate'));
  for (const p of pts) {
    if (p.lo !== null && p.hi !== null) {
      body.push(el.line(frame.x(p.x), frame.y(p.lo), frame.x(p.x), frame.y(p.hi),
        'stroke="#777" stroke-width="1"', 'ci'));
    }
  }
  const smooth = movingAverage(pts.map((p) => p.mean!), 3);
  const d = pts.map((p, i) =>
    `${i === 0 ? 'M' : 'L'} ${frame.x(p.x).toFixed(2)} ${frame.y(smooth[i]).toFixed(2)}`).join(' ');
  body.push(el.path(d, 'stroke="#ff7f0e" stroke-width="2" fill="none"', 'smooth'));
  for (const p of pts) {
    body.push(el.circle(frame.x(p.x), frame.y(p.mean!), 3,
      'fill="#1f77b4"', 'bin-mean'));
  }
  return assemble(frame, 'Significant unobservable t-tests vs max observable t',
    'max |t| over gender and age bins', 'fraction of other |t| > 1.965', body);
}

export function render(kind: PlotKind, rows: Row[], groupBy?: string): string {
  switch (kind) {
    case 'PVAL_ECDF':
      return renderPvalEcdf(rows, groupBy ?? 'kind');
    case 'SMD_BOX':
      return renderSmdBox(rows);
    case 'GATE_CURVE':
      return renderGateCurve(rows);
  }
}
