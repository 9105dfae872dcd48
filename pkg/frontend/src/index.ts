export { parseStats, sidecar, splitRecord, STATS_HEADER } from './stats';
export type { StatRow, StatsFile } from './stats';
export { layoutFigure, logScale, seriesLabel, PALETTE } from './boxplot';
export type { BoxGeom, Layout, Tick } from './boxplot';
export { renderSvg } from './svg';
export type { FigureText } from './svg';
export { figureText, renderFigure, FIGURE_SUBTITLES } from './figures';
export type { RenderedFigure } from './figures';
