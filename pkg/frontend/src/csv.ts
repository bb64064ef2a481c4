/**
 * CSV / JSONL readers for the harness schemas.
 *
 * Unknown columns are ignored; missing required columns are fatal with the
 * column named in the error, so figures can never silently misread a file.
 */

export class SchemaError extends Error {}

export interface Table {
  file: string;
  columns: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string, file: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`empty CSV: ${file}`);
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows: Record<string, string>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new SchemaError(
        `malformed CSV row ${i + 1} in ${file}: expected ${columns.length} ` +
        `fields, got ${parts.length}`,
      );
    }
    const row: Record<string, string> = {};
    columns.forEach((c, j) => (row[c] = parts[j]));
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new SchemaError(`no data rows in ${file}`);
  }
  return { file, columns, rows };
}

export function requireColumns(table: Table, required: string[]): void {
  for (const c of required) {
    if (!table.columns.includes(c)) {
      throw new SchemaError(`missing column ${c} (file ${table.file})`);
    }
  }
}

export function num(row: Record<string, string>, col: string, file: string,
                    index: number): number {
  const v = Number(row[col]);
  if (!Number.isFinite(v)) {
    throw new SchemaError(
      `non-numeric value ${JSON.stringify(row[col])} in column ${col}, ` +
      `row ${index + 2} of ${file}`,
    );
  }
  return v;
}

export function parseJsonl(text: string, file: string): Record<string, unknown>[] {
  const out: Record<string, unknown>[] = [];
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  lines.forEach((line, i) => {
    try {
      out.push(JSON.parse(line));
    } catch {
      throw new SchemaError(`malformed JSONL at line ${i + 1} of ${file}`);
    }
  });
  if (out.length === 0) {
    throw new SchemaError(`no records in ${file}`);
  }
  return out;
}
