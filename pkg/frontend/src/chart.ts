/** Error-versus-allowance curve rendering, dependency free. */

import { CurveRow } from "./api.js";

export interface ChartPoint {
  gamma: number;
  error: number;
}

/** Rows sorted by gamma, one point per row (eta varies rarely in curves). */
export function chartPoints(rows: CurveRow[]): ChartPoint[] {
  return rows
    .map((r) => ({ gamma: r.gamma, error: r.error }))
    .sort((a, b) => a.gamma - b.gamma);
}

export function minError(rows: CurveRow[]): number {
  return Math.min(...rows.map((r) => r.error));
}

function scale(
  v: number,
  lo: number,
  hi: number,
  outLo: number,
  outHi: number,
): number {
  if (hi === lo) return (outLo + outHi) / 2;
  return outLo + ((v - lo) / (hi - lo)) * (outHi - outLo);
}

/**
 * A small SVG line chart: allowed disparity on the x axis, error on the
 * y axis. Returns markup ready for innerHTML.
 */
export function renderCurveSvg(
  rows: CurveRow[],
  width = 460,
  height = 280,
): string {
  const points = chartPoints(rows);
  const pad = 44;
  const xs = points.map((p) => p.gamma);
  const ys = points.map((p) => p.error);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = 0;
  const yHi = Math.max(0.02, ...ys) * 1.1;

  const px = (g: number) => scale(g, xLo, xHi, pad, width - 12);
  const py = (e: number) => scale(e, yLo, yHi, height - pad, 12);

  const path = points
    .map((p, k) => `${k ? "L" : "M"}${px(p.gamma).toFixed(1)},${py(p.error).toFixed(1)}`)
    .join(" ");
  const dots = points
    .map(
      (p) =>
        `<circle cx="${px(p.gamma).toFixed(1)}" cy="${py(p.error).toFixed(1)}"` +
        ` r="3.5" fill="#2563eb"><title>allowance ${p.gamma}, error ` +
        `${p.error.toFixed(4)}</title></circle>`,
    )
    .join("");
  const yTicks = [0, yHi / 2, yHi]
    .map((v) => {
      const y = py(v).toFixed(1);
      return (
        `<line x1="${pad}" y1="${y}" x2="${width - 12}" y2="${y}"` +
        ` stroke="#e5e7eb"/>` +
        `<text x="${pad - 6}" y="${y}" text-anchor="end"` +
        ` dominant-baseline="middle" font-size="10">${v.toFixed(2)}</text>`
      );
    })
    .join("");
  const xTicks = xs
    .map((g) => {
      const x = px(g).toFixed(1);
      return (
        `<text x="${x}" y="${height - pad + 14}" text-anchor="middle"` +
        ` font-size="10">${g}</text>`
      );
    })
    .join("");
  return (
    `<svg viewBox="0 0 ${width} ${height}" role="img"` +
    ` aria-label="error versus allowed disparity">` +
    yTicks +
    xTicks +
    `<path d="${path}" fill="none" stroke="#2563eb" stroke-width="2"/>` +
    dots +
    `<text x="${(pad + width) / 2}" y="${height - 8}" text-anchor="middle"` +
    ` font-size="11">allowed disparity</text>` +
    `<text x="12" y="${height / 2}" font-size="11"` +
    ` transform="rotate(-90 12 ${height / 2})" text-anchor="middle">error</text>` +
    `</svg>`
  );
}
