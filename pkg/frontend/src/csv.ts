import Papa from 'papaparse';

export class CsvError extends Error {}

export type Row = Record<string, string | number | null>;

/** Parse CSV text with a header row; throws CsvError on anything malformed. */
export function parseCsv(text: string, requiredColumns: string[]): Row[] {
  const result = Papa.parse<Row>(text, {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (result.errors.length > 0) {
    const first = result.errors[0];
    throw new CsvError(`CSV parse error: ${first.message} (row ${first.row})`);
  }
  const rows = result.data;
  if (rows.length === 0) {
    throw new CsvError('CSV has no data rows');
  }
  const have = new Set(result.meta.fields ?? []);
  const missing = requiredColumns.filter((c) => !have.has(c));
  if (missing.length > 0) {
    throw new CsvError(`CSV is missing required columns: ${missing.join(', ')}`);
  }
  return rows;
}

/** Pull a finite number out of a parsed cell or die trying. */
export function num(row: Row, column: string): number {
  const v = row[column];
  if (typeof v !== 'number' || !Number.isFinite(v)) {
    throw new CsvError(`column "${column}" has non-numeric value: ${String(v)}`);
  }
  return v;
}

/** Like num(), but tolerates empty/NaN cells (e.g. undefined CI bounds). */
export function numOrNull(row: Row, column: string): number | null {
  const v = row[column];
  if (v === null || v === undefined || v === '') return null;
  if (typeof v === 'number') return Number.isFinite(v) ? v : null;
  return null;
}
