/** Balance-chart geometry: a step line over timeline rows with one marker
 * per event, glyph-coded by category.
 *
 * Geometry (pixel positions) may approximate amounts as floats; every
 * displayed amount string stays the exact wire value carried on the marker. */

import type { TimelineRow } from "./types.js";
import { DECIMALS, formatTokens } from "./tokens.js";

export const CATEGORY_GLYPHS: Record<string, string> = {
  Funding: "▲", // filled triangle up
  Sale: "●", // filled circle
  SupplyPurchase: "■", // filled square
  NetworkFee: "·", // middle dot
  PlatformFee: "◆", // filled diamond
  LoanRepayment: "▼", // filled triangle down
  EscrowLock: "○", // open circle
  EscrowRelease: "◌", // dotted circle
  Internal: "×", // multiplication sign
};

export interface ChartMarker {
  x: number;
  y: number;
  category: string;
  glyph: string;
  /** exact wire amount, never rounded */
  balance: string;
  time: number;
  label: string;
}

export interface ChartGeometry {
  width: number;
  height: number;
  /** SVG path for the step-after polyline; empty string for no rows */
  path: string;
  markers: ChartMarker[];
  /** categories present, in order of first appearance */
  legend: { category: string; glyph: string }[];
}

function approxTokens(balance: string): number {
  // geometry only; display strings never pass through here
  const negative = balance.startsWith("-");
  const digits = negative ? balance.slice(1) : balance;
  const padded = digits.padStart(DECIMALS + 1, "0");
  const whole = padded.slice(0, -DECIMALS);
  const frac = padded.slice(-DECIMALS);
  const value = Number(`${whole}.${frac}`);
  return negative ? -value : value;
}

export function legendFor(
  rows: readonly TimelineRow[],
): { category: string; glyph: string }[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (!seen.includes(row.category)) seen.push(row.category);
  }
  return seen.map((category) => ({
    category,
    glyph: CATEGORY_GLYPHS[category] ?? "?",
  }));
}

export function chartGeometry(
  rows: readonly TimelineRow[],
  width = 640,
  height = 240,
  pad = 32,
): ChartGeometry {
  if (rows.length === 0) {
    return { width, height, path: "", markers: [], legend: [] };
  }
  const first = rows[0]!;
  const last = rows[rows.length - 1]!;
  const tSpan = Math.max(1, last.time - first.time);
  const values = rows.map((row) => approxTokens(row.balance));
  const vMax = Math.max(...values, 0);
  const vMin = Math.min(...values, 0);
  const vSpan = Math.max(vMax - vMin, 1e-9);
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;

  const xAt = (time: number): number =>
    pad + ((time - first.time) / tSpan) * innerW;
  const yAt = (value: number): number =>
    pad + (1 - (value - vMin) / vSpan) * innerH;

  const markers: ChartMarker[] = rows.map((row, i) => ({
    x: xAt(row.time),
    y: yAt(values[i]!),
    category: row.category,
    glyph: CATEGORY_GLYPHS[row.category] ?? "?",
    balance: row.balance,
    time: row.time,
    label: `${row.category} @ ${row.time}: ${formatTokens(row.balance)}`,
  }));

  // step-after: hold each balance until the next event's time
  let path = `M ${markers[0]!.x.toFixed(2)} ${markers[0]!.y.toFixed(2)}`;
  for (let i = 1; i < markers.length; i += 1) {
    const curr = markers[i]!;
    path += ` H ${curr.x.toFixed(2)} V ${curr.y.toFixed(2)}`;
  }

  return { width, height, path, markers, legend: legendFor(rows) };
}
