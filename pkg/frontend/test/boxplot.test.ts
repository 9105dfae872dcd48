import { describe, expect, it } from 'vitest';
import { layoutFigure, logScale, seriesLabel, PALETTE } from '../src/boxplot';
import { parseStats, StatRow } from '../src/stats';

function row(group: string, series: string, five: number[], method = 'multiband'): StatRow {
  const [lo, q1, med, q3, hi] = five;
  return {
    raw: `hash,${group},${series},${method},${med},${q1},${q3},${lo},${hi},1000`,
    configHash: 'hash',
    group,
    series,
    method,
    median: med,
    lowerQuartile: q1,
    upperQuartile: q3,
    lowerWhisker: lo,
    upperWhisker: hi,
    count: 1000,
  };
}

describe('logScale', () => {
  it('maps the domain ends to the range ends, descending y', () => {
    const y = logScale(1e-4, 1e-1, 30, 370);
    expect(y(1e-4)).toBeCloseTo(370);
    expect(y(1e-1)).toBeCloseTo(30);
    expect(y(1e-3)).toBeCloseTo(370 - (370 - 30) / 3);
  });

  it('is monotone decreasing in the value', () => {
    const y = logScale(1e-5, 1, 0, 100);
    let prev = Infinity;
    for (const v of [1e-5, 1e-4, 3e-4, 1e-2, 0.5, 1]) {
      expect(y(v)).toBeLessThan(prev);
      prev = y(v);
    }
  });
});

describe('layoutFigure', () => {
  const rows = [
    row('5', 'N=4', [2e-4, 6e-4, 1.2e-3, 3e-3, 8e-3]),
    row('60', 'N=4', [5e-5, 1e-4, 2e-4, 4e-4, 9e-4]),
    row('5', 'N=12', [1e-4, 3e-4, 5e-4, 1e-3, 3e-3]),
    row('60', 'N=12', [1e-5, 3e-5, 5e-5, 8e-5, 2e-4]),
  ];

  it('produces one box per row, in row order', () => {
    const layout = layoutFigure(rows);
    expect(layout.boxes.map((b) => b.row)).toEqual(rows);
  });

  it('keeps the five values ordered on the pixel axis (y grows downward)', () => {
    for (const b of layoutFigure(rows).boxes) {
      expect(b.yLo).toBeGreaterThanOrEqual(b.yQ1);
      expect(b.yQ1).toBeGreaterThanOrEqual(b.yMedian);
      expect(b.yMedian).toBeGreaterThanOrEqual(b.yQ3);
      expect(b.yQ3).toBeGreaterThanOrEqual(b.yHi);
    }
  });

  it('covers every whisker with whole-decade ticks', () => {
    const layout = layoutFigure(rows);
    const exps = layout.ticks.map((t) => t.exp);
    expect(Math.min(...exps)).toBeLessThanOrEqual(Math.log10(1e-5));
    expect(Math.max(...exps)).toBeGreaterThanOrEqual(Math.log10(8e-3));
    // consecutive decades
    exps.forEach((e, i) => i > 0 && expect(e - exps[i - 1]).toBe(1));
  });

  it('keeps boxes inside the plot frame', () => {
    const layout = layoutFigure(rows);
    for (const b of layout.boxes) {
      expect(b.cx - b.width / 2).toBeGreaterThanOrEqual(layout.plot.left);
      expect(b.cx + b.width / 2).toBeLessThanOrEqual(layout.plot.right);
      expect(b.yHi).toBeGreaterThanOrEqual(layout.plot.top);
      expect(b.yLo).toBeLessThanOrEqual(layout.plot.bottom);
    }
  });

  it('orders groups and series by first appearance and reuses colors consistently', () => {
    const layout = layoutFigure(rows);
    expect(layout.groups.map((g) => g.label)).toEqual(['5', '60']);
    expect(layout.legend.map((l) => l.label)).toEqual(['N=4', 'N=12']);
    const byLabel = new Map(layout.legend.map((l) => [l.label, l.color]));
    for (const b of layout.boxes) expect(b.color).toBe(byLabel.get(b.label));
    expect(layout.legend[0].color).toBe(PALETTE[0]);
  });

  it('separates series boxes within a group', () => {
    const layout = layoutFigure(rows);
    const g5 = layout.boxes.filter((b) => b.row.group === '5');
    expect(g5).toHaveLength(2);
    const gap = Math.abs(g5[0].cx - g5[1].cx);
    expect(gap).toBeGreaterThanOrEqual(g5[0].width); // no overlap
  });

  it('falls back to the method as the legend key when series is empty', () => {
    const m = [
      row('60', '', [1e-5, 3e-5, 5e-5, 8e-5, 2e-4], 'multiband'),
      row('60', '', [2e-5, 5e-5, 9e-5, 2e-4, 5e-4], 'iml'),
    ];
    expect(m.map(seriesLabel)).toEqual(['multiband', 'iml']);
    const layout = layoutFigure(m);
    expect(layout.legend.map((l) => l.label)).toEqual(['multiband', 'iml']);
  });

  it('widens a flat domain to a full decade', () => {
    const layout = layoutFigure([row('5', 'N=4', [2e-4, 3e-4, 4e-4, 6e-4, 9e-4])]);
    expect(layout.ticks.length).toBeGreaterThanOrEqual(2);
  });

  it('rejects empty input and values a log axis cannot show', () => {
    expect(() => layoutFigure([])).toThrow(/no data rows/);
    expect(() => layoutFigure([row('5', 'N=4', [0, 1e-4, 2e-4, 3e-4, 4e-4])])).toThrow(/positive/);
  });
});

describe('interop with parseStats', () => {
  it('lays out rows straight from a parsed file', () => {
    const text = [
      'config_hash,group,series,method,median,lower_quartile,upper_quartile,lower_whisker,upper_whisker,count',
      'h,5,N=4,multiband,1.2e-3,6e-4,3e-3,2e-4,8e-3,1000',
      'h,60,N=4,multiband,2e-4,1e-4,4e-4,5e-5,9e-4,1000',
    ].join('\n');
    const layout = layoutFigure(parseStats(text).rows);
    expect(layout.boxes).toHaveLength(2);
  });
});
