/**
 * Figure presets: which sweep a figure number shows. The data layout is the
 * same for all four (grouped boxes over the band-2 carrier); only the series
 * dimension differs, and that is already encoded in the stats rows.
 */

import { layoutFigure } from './boxplot';
import { FigureText, renderSvg } from './svg';
import { parseStats, sidecar, StatsFile } from './stats';

export const FIGURE_SUBTITLES: Record<number, string> = {
  2: 'observation window sweep',
  3: 'packets per band sweep',
  4: 'component power split sweep',
  5: 'method comparison',
};

export function figureText(figure: number): FigureText {
  const subtitle = FIGURE_SUBTITLES[figure];
  if (subtitle === undefined) throw new Error(`unknown figure number: ${figure}`);
  return {
    title: `Figure ${figure}: relative velocity error, ${subtitle}`,
    xLabel: 'Band 2 [GHz]',
    yLabel: 'Relative error',
  };
}

export interface RenderedFigure {
  svg: string;
  /** verbatim copy of the plotted stats rows, header included */
  dataTable: string;
  stats: StatsFile;
}

export function renderFigure(csvText: string, figure: number): RenderedFigure {
  const stats = parseStats(csvText);
  const layout = layoutFigure(stats.rows);
  return {
    svg: renderSvg(layout, figureText(figure)),
    dataTable: sidecar(stats, stats.rows),
    stats,
  };
}
