import { scaleLinear, scaleLog } from "d3-scale";
import { line } from "d3-shape";

export interface Series {
  label: string;
  color: string;
  x: number[];
  y: number[];
  yerr?: number[];
  dashed?: boolean;
  markers?: boolean;
}

export interface VLine {
  x: number;
  label: string;
}

export interface FigureData {
  title?: string;
  xLabel: string;
  yLabel: string;
  xScale: "linear" | "log";
  yScale: "linear" | "log";
  series: Series[];
  vlines: VLine[];
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const WIDTH = 760;
const HEIGHT = 500;
const MARGIN = { top: 42, right: 24, bottom: 58, left: 78 };

function px(v: number): string {
  // two-decimal coordinates keep the byte stream stable and compact
  return v.toFixed(2);
}

function tickLabel(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 10000 || Math.abs(v) < 0.01)) {
    const exp = Math.floor(Math.log10(Math.abs(v)));
    const mantissa = v / 10 ** exp;
    const m = Number(mantissa.toPrecision(3));
    return m === 1 ? `1e${exp}` : `${m}e${exp}`;
  }
  return String(Number(v.toPrecision(6)));
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

function makeScale(kind: "linear" | "log", domain: [number, number], range: [number, number]) {
  let [lo, hi] = domain;
  if (kind === "log") {
    if (lo <= 0) lo = hi > 1 ? 1e-3 : hi / 1000;
    return scaleLog().domain([lo, hi]).range(range);
  }
  if (lo > 0 && lo < 0.3 * hi) lo = 0;
  const pad = 0.06 * (hi - lo || 1);
  return scaleLinear()
    .domain([lo === 0 ? 0 : lo - pad, hi + pad])
    .range(range);
}

export function renderSvg(fig: FigureData): string {
  const xs: number[] = [];
  const ys: number[] = [];
  for (const s of fig.series) {
    xs.push(...s.x);
    for (let i = 0; i < s.y.length; i++) {
      ys.push(s.y[i]);
      if (s.yerr) {
        ys.push(s.y[i] - s.yerr[i], s.y[i] + s.yerr[i]);
      }
    }
  }
  for (const v of fig.vlines) xs.push(v.x);

  const x = makeScale(fig.xScale, extent(xs), [MARGIN.left, WIDTH - MARGIN.right]);
  const y = makeScale(fig.yScale, extent(ys), [HEIGHT - MARGIN.bottom, MARGIN.top]);
  const top = MARGIN.top;
  const bottom = HEIGHT - MARGIN.bottom;
  const left = MARGIN.left;
  const right = WIDTH - MARGIN.right;

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="13">`,
  );
  out.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // grid and ticks
  const xTicks = x.ticks(fig.xScale === "log" ? 6 : 7).filter((t: number) => tickLabel(t) !== "");
  const yTicks = y.ticks(6);
  for (const t of xTicks) {
    const gx = px(x(t));
    out.push(`<line x1="${gx}" y1="${px(top)}" x2="${gx}" y2="${px(bottom)}" stroke="#dddddd"/>`);
    out.push(
      `<text x="${gx}" y="${px(bottom + 18)}" text-anchor="middle">${tickLabel(t)}</text>`,
    );
  }
  for (const t of yTicks) {
    const gy = px(y(t));
    out.push(`<line x1="${px(left)}" y1="${gy}" x2="${px(right)}" y2="${gy}" stroke="#dddddd"/>`);
    out.push(
      `<text x="${px(left - 8)}" y="${px(Number(gy) + 4)}" text-anchor="end">${tickLabel(t)}</text>`,
    );
  }
  out.push(
    `<rect x="${px(left)}" y="${px(top)}" width="${px(right - left)}" height="${px(bottom - top)}" ` +
      `fill="none" stroke="#333333"/>`,
  );

  // vertical markers
  for (const v of fig.vlines) {
    const gx = px(x(v.x));
    out.push(
      `<line x1="${gx}" y1="${px(top)}" x2="${gx}" y2="${px(bottom)}" ` +
        `stroke="#2ca02c" stroke-dasharray="2,3"/>`,
    );
    out.push(
      `<text x="${px(Number(gx) + 5)}" y="${px(top + 14)}" fill="#2ca02c">${v.label}</text>`,
    );
  }

  const path = line<[number, number]>()
    .defined((d) => Number.isFinite(d[0]) && Number.isFinite(d[1]))
    .x((d) => Number(px(x(d[0]))))
    .y((d) => Number(px(y(d[1]))));

  for (const s of fig.series) {
    const pts: [number, number][] = s.x.map((vx, i) => [vx, s.y[i]]);
    const d = path(pts);
    if (d) {
      const dash = s.dashed ? ` stroke-dasharray="6,4"` : "";
      out.push(`<path d="${d}" fill="none" stroke="${s.color}" stroke-width="1.8"${dash}/>`);
    }
    if (s.yerr) {
      for (let i = 0; i < pts.length; i++) {
        const [vx, vy] = pts[i];
        const e = s.yerr[i];
        if (!Number.isFinite(vx) || !Number.isFinite(vy) || !Number.isFinite(e)) continue;
        const gx = px(x(vx));
        out.push(
          `<line x1="${gx}" y1="${px(y(vy - e))}" x2="${gx}" y2="${px(y(vy + e))}" ` +
            `stroke="${s.color}"/>`,
        );
      }
    }
    if (s.markers) {
      for (let i = 0; i < pts.length; i++) {
        const [vx, vy] = pts[i];
        if (!Number.isFinite(vx) || !Number.isFinite(vy)) continue;
        out.push(`<circle cx="${px(x(vx))}" cy="${px(y(vy))}" r="3" fill="${s.color}"/>`);
      }
    }
  }

  // legend, one row per labeled series
  const labeled = fig.series.filter((s) => s.label !== "");
  let ly = top + 10;
  for (const s of labeled) {
    const dash = s.dashed ? ` stroke-dasharray="6,4"` : "";
    out.push(
      `<line x1="${px(right - 150)}" y1="${px(ly)}" x2="${px(right - 122)}" y2="${px(ly)}" ` +
        `stroke="${s.color}" stroke-width="1.8"${dash}/>`,
    );
    out.push(`<text x="${px(right - 116)}" y="${px(ly + 4)}">${s.label}</text>`);
    ly += 18;
  }

  // axis titles
  out.push(
    `<text x="${px((left + right) / 2)}" y="${px(HEIGHT - 14)}" text-anchor="middle">${fig.xLabel}</text>`,
  );
  out.push(
    `<text x="20" y="${px((top + bottom) / 2)}" text-anchor="middle" ` +
      `transform="rotate(-90 20 ${px((top + bottom) / 2)})">${fig.yLabel}</text>`,
  );
  if (fig.title) {
    out.push(
      `<text x="${px((left + right) / 2)}" y="24" text-anchor="middle" font-size="15">${fig.title}</text>`,
    );
  }
  out.push("</svg>");
  return out.join("\n") + "\n";
}
