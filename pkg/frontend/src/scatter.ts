// Hand-rolled SVG scatter. Frontier members get an 'x' glyph over the dot,
// the chosen point a highlight ring. No external chart dependency so the
// page stays a single static file plus one script.

import type { PlotPoint } from "./view.js";

const W = 680;
const H = 440;
const MARGIN = { left: 64, right: 24, top: 16, bottom: 46 };

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function range(values: number[]): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!(hi > lo)) {
    const pad = Math.abs(lo) > 1e-9 ? Math.abs(lo) * 0.05 : 0.5;
    lo -= pad;
    hi += pad;
  }
  const pad = (hi - lo) * 0.06;
  return [lo - pad, hi + pad];
}

function ticks(lo: number, hi: number, n = 5): number[] {
  const out = [];
  for (let i = 0; i <= n; i++) out.push(lo + ((hi - lo) * i) / n);
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.001) return v.toExponential(1);
  return String(parseFloat(v.toPrecision(3)));
}

/** Blue-to-red ramp for the off-axis objective. */
function colorOf(t: number): string {
  const lerp = (a: number, b: number) => Math.round(a + (b - a) * t);
  return `rgb(${lerp(59, 180)},${lerp(76, 4)},${lerp(192, 38)})`;
}

export function renderScatter(
  points: PlotPoint[],
  xLabel: string,
  yLabel: string,
  colorLabel: string | null,
): string {
  if (!points.length) {
    return `<svg viewBox="0 0 ${W} ${H}" xmlns="http://www.w3.org/2000/svg">
      <text x="${W / 2}" y="${H / 2}" text-anchor="middle" fill="#888">no plottable points</text>
    </svg>`;
  }
  const [x0, x1] = range(points.map((p) => p.x));
  const [y0, y1] = range(points.map((p) => p.y));
  const colors = points.map((p) => p.color).filter((c): c is number => c !== null);
  const c0 = colors.length ? Math.min(...colors) : 0;
  const c1 = colors.length ? Math.max(...colors) : 1;

  const px = (x: number) =>
    MARGIN.left + ((x - x0) / (x1 - x0)) * (W - MARGIN.left - MARGIN.right);
  const py = (y: number) =>
    H - MARGIN.bottom - ((y - y0) / (y1 - y0)) * (H - MARGIN.top - MARGIN.bottom);

  const parts: string[] = [];
  parts.push(`<svg viewBox="0 0 ${W} ${H}" xmlns="http://www.w3.org/2000/svg" role="img">`);

  for (const t of ticks(x0, x1)) {
    const x = px(t);
    parts.push(`<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${H - MARGIN.bottom}" stroke="#eee"/>`);
    parts.push(`<text x="${x}" y="${H - MARGIN.bottom + 18}" text-anchor="middle" font-size="11" fill="#555">${fmt(t)}</text>`);
  }
  for (const t of ticks(y0, y1)) {
    const y = py(t);
    parts.push(`<line x1="${MARGIN.left}" y1="${y}" x2="${W - MARGIN.right}" y2="${y}" stroke="#eee"/>`);
    parts.push(`<text x="${MARGIN.left - 8}" y="${y + 4}" text-anchor="end" font-size="11" fill="#555">${fmt(t)}</text>`);
  }
  parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${W - MARGIN.left - MARGIN.right}" height="${H - MARGIN.top - MARGIN.bottom}" fill="none" stroke="#999"/>`);
  parts.push(`<text x="${(MARGIN.left + W - MARGIN.right) / 2}" y="${H - 8}" text-anchor="middle" font-size="12" fill="#222">${esc(xLabel)}</text>`);
  parts.push(`<text x="16" y="${(MARGIN.top + H - MARGIN.bottom) / 2}" text-anchor="middle" font-size="12" fill="#222" transform="rotate(-90 16 ${(MARGIN.top + H - MARGIN.bottom) / 2})">${esc(yLabel)}</text>`);

  // draw plain dots first so marked points stay visible on top
  const marked = points.filter((p) => p.onFrontier || p.chosen);
  const plain = points.filter((p) => !p.onFrontier && !p.chosen);
  for (const p of [...plain, ...marked]) {
    const x = px(p.x);
    const y = py(p.y);
    const fill =
      p.color !== null && c1 > c0 ? colorOf((p.color - c0) / (c1 - c0))
      : p.color !== null ? colorOf(0.5)
      : "#4477aa";
    const opacity = p.feasible ? 0.9 : 0.25;
    const title = `<title>${esc(p.label)}: (${fmt(p.x)}, ${fmt(p.y)})${p.color !== null ? `, ${fmt(p.color)}` : ""}</title>`;
    if (p.chosen) {
      parts.push(`<circle cx="${x}" cy="${y}" r="11" fill="none" stroke="#e6a817" stroke-width="3">${title}</circle>`);
    } else if (p.tied) {
      parts.push(`<circle cx="${x}" cy="${y}" r="11" fill="none" stroke="#e6a817" stroke-width="1.5" stroke-dasharray="3 3">${title}</circle>`);
    }
    parts.push(`<circle cx="${x}" cy="${y}" r="4.5" fill="${fill}" fill-opacity="${opacity}">${title}</circle>`);
    if (p.onFrontier) {
      // the frontier marker: a black x over the dot
      parts.push(`<path d="M ${x - 5} ${y - 5} L ${x + 5} ${y + 5} M ${x - 5} ${y + 5} L ${x + 5} ${y - 5}" stroke="#111" stroke-width="1.6" fill="none"/>`);
    }
  }

  if (colorLabel && colors.length) {
    const lx = W - MARGIN.right - 150;
    const ly = MARGIN.top + 10;
    for (let i = 0; i <= 20; i++) {
      parts.push(`<rect x="${lx + i * 5}" y="${ly}" width="5" height="10" fill="${colorOf(i / 20)}"/>`);
    }
    parts.push(`<text x="${lx}" y="${ly + 24}" font-size="10" fill="#555">${fmt(c0)}</text>`);
    parts.push(`<text x="${lx + 105}" y="${ly + 24}" text-anchor="end" font-size="10" fill="#555">${fmt(c1)}</text>`);
    parts.push(`<text x="${lx + 110}" y="${ly + 9}" font-size="10" fill="#222">${esc(colorLabel)}</text>`);
  }

  parts.push("</svg>");
  return parts.join("\n");
}
