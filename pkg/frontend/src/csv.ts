/**
 * Minimal reader for the CSV tables written by the fracwave CLI.
 *
 * The writer never quotes fields (no field contains a comma or newline),
 * so a plain split is exact. Values stay strings; numeric coercion happens
 * at the point of use via `numericColumn`.
 */

export interface CsvTable {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new Error(
        `ragged CSV row: expected ${header.length} fields, got ${row.length}`);
    }
  }
  return { header, rows };
}

export function columnIndex(table: CsvTable, name: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`CSV column not found: ${name}`);
  }
  return idx;
}

/** Extract a column as finite numbers; a non-numeric cell is an error. */
export function numericColumn(table: CsvTable, name: string): number[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row) => {
    const v = Number(row[idx]);
    if (!Number.isFinite(v)) {
      throw new Error(`non-numeric value in column ${name}: ${row[idx]}`);
    }
    return v;
  });
}

export function stringColumn(table: CsvTable, name: string): string[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row) => row[idx]);
}
