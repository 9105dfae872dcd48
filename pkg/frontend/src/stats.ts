/**
 * Reader for the stats.csv files emitted by `doppler-unwrap run`/`sweep`.
 *
 * Every record keeps its exact source line: the side-car file must echo the
 * plotted values byte-for-byte, so re-serializing parsed floats is not an
 * option. Fields are parsed only for geometry.
 */

export const STATS_HEADER = [
  'config_hash',
  'group',
  'series',
  'method',
  'median',
  'lower_quartile',
  'upper_quartile',
  'lower_whisker',
  'upper_whisker',
  'count',
] as const;

export interface StatRow {
  /** exact input line, record terminator stripped */
  raw: string;
  configHash: string;
  /** x-axis group key, the band-2 carrier in GHz (e.g. "60") */
  group: string;
  /** sweep line label ("N=12", "Tmax=1ms", ...); empty for method sweeps */
  series: string;
  method: string;
  median: number;
  lowerQuartile: number;
  upperQuartile: number;
  lowerWhisker: number;
  upperWhisker: number;
  count: number;
}

export interface StatsFile {
  headerRaw: string;
  /** record terminator of the source file ("\r\n" from the csv writer, or "\n") */
  terminator: string;
  rows: StatRow[];
}

/** Split one RFC-4180 record: quoted fields, doubled quotes, embedded commas. */
export function splitRecord(line: string): string[] {
  const fields: string[] = [];
  let field = '';
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch === '"' && field === '') {
      quoted = true;
    } else if (ch === ',') {
      fields.push(field);
      field = '';
    } else {
      field += ch;
    }
  }
  if (quoted) throw new Error(`unterminated quote in record: ${line}`);
  fields.push(field);
  return fields;
}

function num(fields: string[], index: number, lineNo: number): number {
  const value = Number(fields[index]);
  if (!Number.isFinite(value)) {
    throw new Error(`line ${lineNo}: ${STATS_HEADER[index]} is not a number: ${fields[index]}`);
  }
  return value;
}

export function parseStats(text: string): StatsFile {
  const terminator = text.includes('\r\n') ? '\r\n' : '\n';
  const lines = text.split(/\r\n|\n/);
  if (lines[lines.length - 1] === '') lines.pop(); // final record terminator
  if (lines.length === 0) throw new Error('empty stats file');

  const headerRaw = lines[0];
  const header = splitRecord(headerRaw);
  if (header.length !== STATS_HEADER.length || header.some((h, i) => h !== STATS_HEADER[i])) {
    throw new Error(`unexpected header: ${headerRaw}`);
  }

  const rows: StatRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = splitRecord(lines[i]);
    if (fields.length !== STATS_HEADER.length) {
      throw new Error(`line ${i + 1}: expected ${STATS_HEADER.length} fields, got ${fields.length}`);
    }
    const row: StatRow = {
      raw: lines[i],
      configHash: fields[0],
      group: fields[1],
      series: fields[2],
      method: fields[3],
      median: num(fields, 4, i + 1),
      lowerQuartile: num(fields, 5, i + 1),
      upperQuartile: num(fields, 6, i + 1),
      lowerWhisker: num(fields, 7, i + 1),
      upperWhisker: num(fields, 8, i + 1),
      count: num(fields, 9, i + 1),
    };
    // a malformed box cannot be drawn; refuse rather than render nonsense
    const ordered =
      row.lowerWhisker <= row.lowerQuartile &&
      row.lowerQuartile <= row.median &&
      row.median <= row.upperQuartile &&
      row.upperQuartile <= row.upperWhisker;
    if (!ordered) throw new Error(`line ${i + 1}: box statistics out of order`);
    if (!(row.count >= 1)) throw new Error(`line ${i + 1}: count must be >= 1`);
    rows.push(row);
  }
  return { headerRaw, terminator, rows };
}

/**
 * Side-car data table: header plus the plotted records, every line copied
 * verbatim from the input including its terminator style. Plotting all rows
 * of a panel file therefore reproduces it byte-for-byte.
 */
export function sidecar(file: StatsFile, rows: readonly StatRow[]): string {
  return [file.headerRaw, ...rows.map((r) => r.raw)].map((l) => l + file.terminator).join('');
}
