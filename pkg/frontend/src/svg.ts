/** Minimal SVG scaffolding: linear scales, ticks, and element builders.
 * Output is plain SVG markup, so identical inputs yield identical bytes. */

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  return f;
}

/** Round-ish tick positions covering the domain (about `count` of them). */
export function ticks(domain: [number, number], count = 6): number[] {
  const [lo, hi] = domain;
  const span = hi - lo;
  if (span <= 0) return [lo];
  const rawStep = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => span / s <= count) ?? candidates[candidates.length - 1];
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-9; v += step) out.push(Number(v.toFixed(10)));
  return out;
}

export function fmt(v: number): string {
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.001) return v.toExponential(1);
  return Number(v.toFixed(3)).toString();
}

const esc = (s: string) => s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;').replace(/"/g, '&quot;');

export const el = {
  line: (x1: number, y1: number, x2: number, y2: number, style: string, role = '') =>
    `<line x1="${r(x1)}" y1="${r(y1)}" x2="${r(x2)}" y2="${r(y2)}" ${roleAttr(role)}${style}/>`,
  rect: (x: number, y: number, w: number, h: number, style: string, role = '') =>
    `<rect x="${r(x)}" y="${r(y)}" width="${r(w)}" height="${r(h)}" ${roleAttr(role)}${style}/>`,
  circle: (cx: number, cy: number, rad: number, style: string, role = '') =>
    `<circle cx="${r(cx)}" cy="${r(cy)}" r="${rad}" ${roleAttr(role)}${style}/>`,
  path: (d: string, style: string, role = '') => `<path d="${d}" ${roleAttr(role)}${style}/>`,
  text: (x: number, y: number, s: string, style = '', anchor = 'middle') =>
    `<text x="${r(x)}" y="${r(y)}" text-anchor="${anchor}" font-family="sans-serif" ${style}>${esc(s)}</text>`,
};

const r = (v: number) => Number(v.toFixed(2));
const roleAttr = (role: string) => (role ? `data-role="${role}" ` : '');

export const STYLE = {
  axis: 'stroke="#333" stroke-width="1"',
  grid: 'stroke="#ddd" stroke-width="0.5"',
  refDashedRed: 'stroke="#cc2222" stroke-width="1.5" stroke-dasharray="6 4" fill="none"',
  tickText: 'font-size="11" fill="#333"',
  titleText: 'font-size="14" fill="#111"',
};

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
  x: Scale;
  y: Scale;
}

export function makeFrame(xDomain: [number, number], yDomain: [number, number],
                          width = 760, height = 480,
                          margin = { top: 40, right: 24, bottom: 48, left: 60 }): Frame {
  return {
    width,
    height,
    margin,
    x: linearScale(xDomain, [margin.left, width - margin.right]),
    y: linearScale(yDomain, [height - margin.bottom, margin.top]),
  };
}

/** Axes with ticks and labels; call with the plot's body elements. */
export function assemble(frame: Frame, title: string, xLabel: string, yLabel: string,
                         body: string[], xTicks?: number[], yTicks?: number[]): string {
  const { width, height, margin, x, y } = frame;
  const bottom = height - margin.bottom;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    el.rect(0, 0, width, height, 'fill="#ffffff"'),
    el.text(width / 2, margin.top - 16, title, STYLE.titleText),
  ];
  for (const t of xTicks ?? ticks(x.domain)) {
    parts.push(el.line(x(t), bottom, x(t), bottom + 5, STYLE.axis));
    parts.push(el.text(x(t), bottom + 18, fmt(t), STYLE.tickText));
  }
  for (const t of yTicks ?? ticks(y.domain)) {
    parts.push(el.line(margin.left - 5, y(t), margin.left, y(t), STYLE.axis));
    parts.push(el.line(margin.left, y(t), width - margin.right, y(t), STYLE.grid));
    parts.push(el.text(margin.left - 8, y(t) + 4, fmt(t), STYLE.tickText, 'end'));
  }
  parts.push(el.line(margin.left, bottom, width - margin.right, bottom, STYLE.axis));
  parts.push(el.line(margin.left, margin.top, margin.left, bottom, STYLE.axis));
  parts.push(el.text(width / 2, height - 10, xLabel, STYLE.tickText));
  parts.push(`<g transform="rotate(-90 16 ${height / 2})">`
    + el.text(16, height / 2, yLabel, STYLE.tickText) + '</g>');
  parts.push(...body);
  parts.push('</svg>');
  return parts.join('\n');
}

export const PALETTE = ['#1f77b4', '#ff7f0e', '#2ca02c', '#9467bd', '#8c564b', '#17becf'];
