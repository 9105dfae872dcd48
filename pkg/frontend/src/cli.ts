#!/usr/bin/env node
/**
 * plot-figures --stats stats.csv --figure {2,3,4,5} --out DIR
 *
 * Renders one panel's grouped boxplot (figureN.svg) plus a side-car CSV of
 * the plotted values (figureN.csv), copied verbatim from the input. Exit
 * codes: 0 success, 2 bad arguments or unreadable/invalid input.
 */

import { mkdirSync, readFileSync, writeFileSync } from 'fs';
import { join } from 'path';
import yargs from 'yargs';
import { renderFigure } from './figures';

export function main(argv: string[]): number {
  const args = yargs(argv)
    .option('stats', { type: 'string', demandOption: true, describe: 'stats.csv from doppler-unwrap' })
    .option('figure', { type: 'number', demandOption: true, choices: [2, 3, 4, 5] })
    .option('out', { type: 'string', demandOption: true, describe: 'output directory' })
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new Error(msg);
    })
    .parseSync();

  const text = readFileSync(args.stats, 'utf8');
  const rendered = renderFigure(text, args.figure);

  mkdirSync(args.out, { recursive: true });
  const svgPath = join(args.out, `figure${args.figure}.svg`);
  const csvPath = join(args.out, `figure${args.figure}.csv`);
  writeFileSync(svgPath, rendered.svg);
  writeFileSync(csvPath, rendered.dataTable);
  console.log(`wrote ${svgPath}, ${csvPath} (${rendered.stats.rows.length} boxes)`);
  return 0;
}

if (require.main === module) {
  try {
    process.exit(main(process.argv.slice(2)));
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exit(2);
  }
}
