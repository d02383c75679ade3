/** Small numeric helpers shared by the plot builders. */

export function quantile(sorted: number[], q: number): number {
  if (sorted.length === 0) return NaN;
  if (q <= 0) return sorted[0];
  if (q >= 1) return sorted[sorted.length - 1];
  const pos = (sorted.length - 1) * q;
  const base = Math.floor(pos);
  const rest = pos - base;
  const next = sorted[base + 1];
  return next === undefined ? sorted[base] : sorted[base] + rest * (next - sorted[base]);
}

export interface BoxStats {
  q1: number;
  median: number;
  q3: number;
  whiskerLo: number;
  whiskerHi: number;
  outliers: number[];
}

/** Tukey box: quartiles, 1.5*IQR whiskers clamped to data, the rest outliers. */
export function boxStats(values: number[]): BoxStats {
  const sorted = [...values].sort((a, b) => a - b);
  const q1 = quantile(sorted, 0.25);
  const median = quantile(sorted, 0.5);
  const q3 = quantile(sorted, 0.75);
  const iqr = q3 - q1;
  const loLimit = q1 - 1.5 * iqr;
  const hiLimit = q3 + 1.5 * iqr;
  const inside = sorted.filter((v) => v >= loLimit && v <= hiLimit);
  const whiskerLo = inside.length ? inside[0] : q1;
  const whiskerHi = inside.length ? inside[inside.length - 1] : q3;
  return {
    q1,
    median,
    q3,
    whiskerLo,
    whiskerHi,
    outliers: sorted.filter((v) => v < loLimit || v > hiLimit),
  };
}

/** ECDF as step points: for each sorted x, the fraction of values <= x. */
export function ecdfPoints(values: number[]): Array<[number, number]> {
  const sorted = [...values].sort((a, b) => a - b);
  const n = sorted.length;
  return sorted.map((x, i) => [x, (i + 1) / n]);
}

/** Centered moving average; window shrinks at the edges. */
export function movingAverage(values: number[], window = 3): number[] {
  const half = Math.floor(window / 2);
  return values.map((_, i) => {
    const lo = Math.max(0, i - half);
    const hi = Math.min(values.length - 1, i + half);
    let s = 0;
    for (let j = lo; j <= hi; j++) s += values[j];
    return s / (hi - lo + 1);
  });
}
