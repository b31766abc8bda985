import { readFileSync } from "node:fs";
import Papa from "papaparse";
import { RefusalError, SchemaError } from "./errors.js";

export type Cell = number | string | boolean | null;

export interface RunRecord {
  path: string;
  metadata: Record<string, string>;
  columns: string[];
  rows: Record<string, Cell>[];
}

/** Typed view of one CSV cell: booleans, nan, numbers, else string. */
function parseCell(raw: string): Cell {
  if (raw === "true") return true;
  if (raw === "false") return false;
  if (raw === "nan") return NaN;
  if (raw === "") return null;
  const num = Number(raw);
  return Number.isNaN(num) ? raw : num;
}

function parseCsv(path: string, text: string): RunRecord {
  const metadata: Record<string, string> = {};
  const bodyLines: string[] = [];
  for (const line of text.split("\n")) {
    if (line.startsWith("#")) {
      // "# weakclock 0.1.0" then "# key: value" lines
      const m = line.match(/^# ([a-z_]+): (.*)$/);
      if (m) metadata[m[1]] = m[2];
      else metadata["tool"] = line.slice(2);
    } else if (line.length > 0) {
      bodyLines.push(line);
    }
  }
  const parsed = Papa.parse<string[]>(bodyLines.join("\n"), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`record ${path}: ${parsed.errors[0].message}`);
  }
  const data = parsed.data;
  if (data.length === 0) {
    throw new SchemaError(`record ${path} has no header row`);
  }
  const columns = data[0];
  const rows = data.slice(1).map((cells) => {
    const row: Record<string, Cell> = {};
    columns.forEach((name, i) => {
      row[name] = parseCell(cells[i] ?? "");
    });
    return row;
  });
  return { path, metadata, columns, rows };
}

interface JsonRecord {
  metadata: Record<string, unknown>;
  columns: string[];
  rows: Cell[][];
}

function parseJson(path: string, text: string): RunRecord {
  const doc = JSON.parse(text) as JsonRecord;
  if (!doc || !Array.isArray(doc.columns) || !Array.isArray(doc.rows)) {
    throw new SchemaError(`record ${path} is not a run record (needs metadata, columns, rows)`);
  }
  const metadata: Record<string, string> = {};
  for (const [key, value] of Object.entries(doc.metadata ?? {})) {
    metadata[key] = String(value);
  }
  const rows = doc.rows.map((cells) => {
    const row: Record<string, Cell> = {};
    doc.columns.forEach((name, i) => {
      const v = cells[i];
      // null encodes nan in the JSON mirror
      row[name] = v === null ? NaN : (v as Cell);
    });
    return row;
  });
  return { path, metadata, columns: doc.columns, rows };
}

export function readRecord(path: string): RunRecord {
  const text = readFileSync(path, "utf8");
  const record = path.endsWith(".json") ? parseJson(path, text) : parseCsv(path, text);
  if (record.rows.length === 0) {
    throw new RefusalError(`record ${path} has no data rows`);
  }
  return record;
}

export function requireColumns(record: RunRecord, names: string[]): void {
  for (const name of names) {
    if (!record.columns.includes(name)) {
      throw new SchemaError(`record ${record.path} is missing column '${name}'`);
    }
  }
}

/** Numeric column as an array; non-numbers are a schema violation. */
export function numbers(record: RunRecord, name: string): number[] {
  requireColumns(record, [name]);
  return record.rows.map((row, i) => {
    const v = row[name];
    if (typeof v !== "number") {
      throw new SchemaError(
        `record ${record.path} column '${name}' row ${i} is not numeric (got ${JSON.stringify(v)})`,
      );
    }
    return v;
  });
}

/** A parameter column that must be constant across rows, e.g. g or N. */
export function constantNumber(record: RunRecord, name: string): number {
  const values = numbers(record, name);
  for (const v of values) {
    if (v !== values[0]) {
      throw new SchemaError(
        `record ${record.path} column '${name}' varies across rows; overlays need it constant`,
      );
    }
  }
  return values[0];
}

export function constantString(record: RunRecord, name: string): string {
  requireColumns(record, [name]);
  const values = record.rows.map((row) => String(row[name]));
  for (const v of values) {
    if (v !== values[0]) {
      throw new SchemaError(
        `record ${record.path} column '${name}' varies across rows; overlays need it constant`,
      );
    }
  }
  return values[0];
}
