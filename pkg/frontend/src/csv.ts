/** Strict numeric CSV reading for the documented artifact schemas. */

import { readFileSync } from 'node:fs';

export class MalformedCsvError extends Error {}

export interface NumericTable {
  header: string[];
  /** column name -> values */
  columns: Map<string, number[]>;
  rowCount: number;
}

/**
 * Read a comma-separated file whose body is entirely numeric.
 * Throws MalformedCsvError on ragged rows, non-numeric cells or a missing
 * required column.
 */
export function readNumericCsv(path: string, required: string[] = []): NumericTable {
  const text = readFileSync(path, 'utf-8');
  const lines = text.split('\n').filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new MalformedCsvError(`${path}: empty file`);
  }
  const header = lines[0].split(',').map((h) => h.trim());
  for (const name of required) {
    if (!header.includes(name)) {
      throw new MalformedCsvError(`${path}: missing column '${name}' (have ${header.join(',')})`);
    }
  }
  const columns = new Map<string, number[]>(header.map((h) => [h, []]));
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',');
    if (cells.length !== header.length) {
      throw new MalformedCsvError(`${path}:${i + 1}: expected ${header.length} cells, got ${cells.length}`);
    }
    for (let j = 0; j < cells.length; j++) {
      const value = Number(cells[j]);
      if (!Number.isFinite(value)) {
        throw new MalformedCsvError(`${path}:${i + 1}: non-numeric cell '${cells[j]}'`);
      }
      columns.get(header[j])!.push(value);
    }
  }
  return { header, columns, rowCount: lines.length - 1 };
}

export function column(table: NumericTable, name: string): number[] {
  const values = table.columns.get(name);
  if (values === undefined) {
    throw new MalformedCsvError(`missing column '${name}'`);
  }
  return values;
}
