/** CSV parsing and schema validation for the simulator's output files. */

export interface Table {
  header: string[];
  rows: string[][];
}

export class SchemaError extends Error {}

export function parseCsv(text: string, context = "<csv>"): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${context}: file is empty`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  return { header, rows };
}

/** Throw with the full list of missing and available columns. */
export function requireColumns(table: Table, needed: string[], context: string): void {
  const missing = needed.filter((name) => !table.header.includes(name));
  if (missing.length > 0) {
    throw new SchemaError(
      `${context}: missing required column(s) [${missing.join(", ")}]; ` +
        `available columns are [${table.header.join(", ")}]`,
    );
  }
}

export function numericColumn(table: Table, name: string, context: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(
      `${context}: missing required column(s) [${name}]; ` +
        `available columns are [${table.header.join(", ")}]`,
    );
  }
  return table.rows.map((row, k) => {
    const value = Number(row[idx]);
    if (!Number.isFinite(value) && row[idx] !== "nan" && row[idx] !== "") {
      throw new SchemaError(`${context}: row ${k + 2}, column '${name}': ` +
        `cannot parse '${row[idx]}' as a number`);
    }
    return value;
  });
}

export function stringColumn(table: Table, name: string, context: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(
      `${context}: missing required column(s) [${name}]; ` +
        `available columns are [${table.header.join(", ")}]`,
    );
  }
  return table.rows.map((row) => row[idx]);
}
