// Sweep plots as self-contained SVG markup (no DOM dependency, so the
// rendering logic is unit-testable). Converged points plot as a connected
// series; failed points are marked with a red cross pinned to the axis.

import type { SweepPointBody } from "./types";

export interface Series {
  label: string;
  color: string;
  /** extract the plotted value from a converged point */
  get(point: SweepPointBody): number | null;
}

export const THRUST_SERIES: Series = {
  label: "thrust [N]",
  color: "#0b66c3",
  get: (p) => p.metrics?.thrust ?? null,
};

export const ISP_SERIES: Series = {
  label: "isp [s]",
  color: "#c3570b",
  get: (p) => p.metrics?.isp ?? null,
};

export function pressureSeries(varName: string, color = "#2a9d5c"): Series {
  return {
    label: `${varName} [Pa]`,
    color,
    get: (p) => p.solution?.[varName] ?? null,
  };
}

const W = 640;
const H = 320;
const PAD = { left: 64, right: 16, top: 18, bottom: 40 };

function scale(domain: [number, number], range: [number, number]) {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

function ticks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo || 1;
  return Array.from({ length: n }, (_, i) => lo + (span * i) / (n - 1));
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-2) return v.toExponential(2);
  return String(Math.round(v * 100) / 100);
}

export interface SweepPlotOptions {
  points: SweepPointBody[];
  series: Series;
  paramLabel: string;
  /** previous run retained for comparison; drawn dashed */
  overlay?: SweepPointBody[];
}

export function renderSweepPlot(opts: SweepPlotOptions): string {
  const { points, series, paramLabel, overlay } = opts;
  const good = points.filter((p) => p.status === "converged" && series.get(p) !== null);
  const failed = points.filter((p) => p.status !== "converged");
  const overlayGood = (overlay ?? []).filter(
    (p) => p.status === "converged" && series.get(p) !== null);

  const xs = points.map((p) => p.value)
    .concat((overlay ?? []).map((p) => p.value));
  const ys = good.map((p) => series.get(p) as number)
    .concat(overlayGood.map((p) => series.get(p) as number));
  const xDomain: [number, number] = xs.length
    ? [Math.min(...xs), Math.max(...xs)] : [0, 1];
  const yDomain: [number, number] = ys.length
    ? [Math.min(...ys), Math.max(...ys)] : [0, 1];
  if (yDomain[0] === yDomain[1]) {
    yDomain[0] -= 1;
    yDomain[1] += 1;
  }

  const sx = scale(xDomain, [PAD.left, W - PAD.right]);
  const sy = scale(yDomain, [H - PAD.bottom, PAD.top]);

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" class="sweep-plot" role="img" aria-label="${series.label} vs ${paramLabel}">`);
  parts.push(`<rect x="0" y="0" width="${W}" height="${H}" fill="white"/>`);

  for (const t of ticks(yDomain[0], yDomain[1])) {
    const y = sy(t);
    parts.push(`<line x1="${PAD.left}" y1="${y}" x2="${W - PAD.right}" y2="${y}" stroke="#e4e7ec"/>`);
    parts.push(`<text x="${PAD.left - 6}" y="${y + 4}" text-anchor="end" font-size="11" fill="#555">${fmt(t)}</text>`);
  }
  for (const t of ticks(xDomain[0], xDomain[1])) {
    const x = sx(t);
    parts.push(`<text x="${x}" y="${H - PAD.bottom + 16}" text-anchor="middle" font-size="11" fill="#555">${fmt(t)}</text>`);
  }
  parts.push(`<line x1="${PAD.left}" y1="${H - PAD.bottom}" x2="${W - PAD.right}" y2="${H - PAD.bottom}" stroke="#888"/>`);
  parts.push(`<line x1="${PAD.left}" y1="${PAD.top}" x2="${PAD.left}" y2="${H - PAD.bottom}" stroke="#888"/>`);
  parts.push(`<text x="${(PAD.left + W - PAD.right) / 2}" y="${H - 6}" text-anchor="middle" font-size="12" fill="#333">${paramLabel}</text>`);
  parts.push(`<text x="14" y="${PAD.top - 4}" font-size="12" fill="${series.color}">${series.label}</text>`);

  const lineOf = (pts: SweepPointBody[]) => pts
    .map((p, i) => `${i ? "L" : "M"}${sx(p.value).toFixed(1)},${sy(series.get(p) as number).toFixed(1)}`)
    .join(" ");

  if (overlayGood.length) {
    parts.push(`<path d="${lineOf(overlayGood)}" fill="none" stroke="${series.color}" stroke-opacity="0.45" stroke-dasharray="6 4" stroke-width="1.6" class="overlay-line"/>`);
    for (const p of overlayGood) {
      parts.push(`<circle cx="${sx(p.value).toFixed(1)}" cy="${sy(series.get(p) as number).toFixed(1)}" r="3" fill="white" stroke="${series.color}" stroke-opacity="0.45" class="overlay-point"/>`);
    }
  }
  if (good.length) {
    parts.push(`<path d="${lineOf(good)}" fill="none" stroke="${series.color}" stroke-width="2" class="series-line"/>`);
    for (const p of good) {
      parts.push(`<circle cx="${sx(p.value).toFixed(1)}" cy="${sy(series.get(p) as number).toFixed(1)}" r="4" fill="${series.color}" class="series-point"><title>${paramLabel} = ${fmt(p.value)}: ${fmt(series.get(p) as number)}</title></circle>`);
    }
  }
  for (const p of failed) {
    const x = sx(p.value);
    const y = H - PAD.bottom;
    parts.push(`<g class="failed-point"><line x1="${x - 5}" y1="${y - 5}" x2="${x + 5}" y2="${y + 5}" stroke="#d12727" stroke-width="2.5"/><line x1="${x - 5}" y1="${y + 5}" x2="${x + 5}" y2="${y - 5}" stroke="#d12727" stroke-width="2.5"/><title>${paramLabel} = ${fmt(p.value)}: failed${p.error ? ` (${p.error})` : ""}</title></g>`);
  }
  parts.push("</svg>");
  return parts.join("");
}
