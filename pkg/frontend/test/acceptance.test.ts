/**
 * End-to-end checks against the shipped reference sweep (both panels of the
 * packets-per-band figure, 1000 trials per point): the side-car must echo the
 * input verbatim, and the denser-packet series must sit below the sparse one
 * at every carrier.
 */

import { readFileSync } from 'fs';
import { join } from 'path';
import { describe, expect, it } from 'vitest';
import { renderFigure } from '../src/figures';
import { parseStats } from '../src/stats';

const PANELS = ['fig3a', 'fig3b'].map((p) =>
  join(__dirname, '..', 'reference', p, 'stats.csv'),
);

describe.each(PANELS)('reference panel %s', (path) => {
  const text = readFileSync(path, 'utf8');

  it('plots every row and the side-car diff against the input is empty', () => {
    const rendered = renderFigure(text, 3);
    expect(rendered.stats.rows.length).toBe(15); // 3 series x 5 carriers
    expect(rendered.svg.match(/<g stroke=/g)).toHaveLength(15);
    expect(rendered.dataTable).toBe(text);
    console.log(
      `[PASS] side-car verbatim: ${path.split('/').slice(-2).join('/')} ` +
        `(${rendered.stats.rows.length} boxes)`,
    );
  });

  it('shows N=12 below N=4 at every carrier', () => {
    const rows = parseStats(text).rows;
    const median = (series: string, group: string) => {
      const row = rows.find((r) => r.series === series && r.group === group);
      expect(row).toBeDefined();
      return row!.median;
    };
    const groups = [...new Set(rows.map((r) => r.group))];
    expect(groups).toHaveLength(5);
    for (const g of groups) {
      expect(median('N=12', g)).toBeLessThan(median('N=4', g));
    }
    console.log(`[PASS] N=12 below N=4 at carriers ${groups.join(', ')} GHz`);
  });
});
