/**
 * Geometry for grouped boxplots on a log y axis. Pure: rows in, pixel
 * coordinates out. Rendering is string assembly elsewhere; keeping the
 * arithmetic here makes it testable without looking at SVG.
 */

import { StatRow } from './stats';

export interface BoxGeom {
  row: StatRow;
  label: string; // legend key: series, or method when series is empty
  color: string;
  cx: number; // box center x
  width: number;
  yMedian: number;
  yQ1: number;
  yQ3: number;
  yLo: number; // lower whisker
  yHi: number; // upper whisker
}

export interface Tick {
  y: number;
  /** decade exponent, label rendered as 10^exp */
  exp: number;
}

export interface Layout {
  width: number;
  height: number;
  plot: { left: number; top: number; right: number; bottom: number };
  groups: { label: string; cx: number }[];
  ticks: Tick[];
  boxes: BoxGeom[];
  legend: { label: string; color: string }[];
}

export const WIDTH = 640;
export const HEIGHT = 420;
const MARGIN = { left: 64, top: 34, right: 18, bottom: 46 };

// Okabe-Ito, safe for color-blind readers
export const PALETTE = ['#0072B2', '#E69F00', '#009E73', '#CC79A7', '#D55E00', '#56B4E9'];

export function seriesLabel(row: StatRow): string {
  return row.series !== '' ? row.series : row.method;
}

function firstAppearance(values: readonly string[]): string[] {
  const seen: string[] = [];
  for (const v of values) if (!seen.includes(v)) seen.push(v);
  return seen;
}

/** Log-10 position: value -> y pixel, top of the plot = domain max. */
export function logScale(lo: number, hi: number, top: number, bottom: number) {
  const l0 = Math.log10(lo);
  const l1 = Math.log10(hi);
  return (value: number) => bottom - ((Math.log10(value) - l0) / (l1 - l0)) * (bottom - top);
}

export function layoutFigure(rows: readonly StatRow[]): Layout {
  if (rows.length === 0) throw new Error('nothing to plot: no data rows');
  for (const r of rows) {
    if (!(r.lowerWhisker > 0)) {
      throw new Error(`log axis requires positive values, got ${r.lowerWhisker} in group ${r.group}`);
    }
  }

  const plot = {
    left: MARGIN.left,
    top: MARGIN.top,
    right: WIDTH - MARGIN.right,
    bottom: HEIGHT - MARGIN.bottom,
  };
  const groups = firstAppearance(rows.map((r) => r.group));
  const labels = firstAppearance(rows.map(seriesLabel));

  // whole decades covering every whisker, at least one decade tall
  let expLo = Math.floor(Math.log10(Math.min(...rows.map((r) => r.lowerWhisker))));
  let expHi = Math.ceil(Math.log10(Math.max(...rows.map((r) => r.upperWhisker))));
  if (expHi === expLo) expHi += 1;
  const y = logScale(10 ** expLo, 10 ** expHi, plot.top, plot.bottom);

  const ticks: Tick[] = [];
  for (let e = expLo; e <= expHi; e++) ticks.push({ y: y(10 ** e), exp: e });

  const slot = (plot.right - plot.left) / groups.length;
  const boxWidth = Math.min(26, (slot * 0.72) / labels.length);
  const groupsOut = groups.map((label, i) => ({ label, cx: plot.left + slot * (i + 0.5) }));

  const boxes: BoxGeom[] = rows.map((row) => {
    const label = seriesLabel(row);
    const g = groups.indexOf(row.group);
    const s = labels.indexOf(label);
    const offset = (s - (labels.length - 1) / 2) * (boxWidth + 4);
    return {
      row,
      label,
      color: PALETTE[s % PALETTE.length],
      cx: groupsOut[g].cx + offset,
      width: boxWidth,
      yMedian: y(row.median),
      yQ1: y(row.lowerQuartile),
      yQ3: y(row.upperQuartile),
      yLo: y(row.lowerWhisker),
      yHi: y(row.upperWhisker),
    };
  });

  return {
    width: WIDTH,
    height: HEIGHT,
    plot,
    groups: groupsOut,
    ticks,
    boxes,
    legend: labels.map((label, i) => ({ label, color: PALETTE[i % PALETTE.length] })),
  };
}
