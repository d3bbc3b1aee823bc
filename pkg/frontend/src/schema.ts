/** Loaders for the simulator's documented CSV schemas. */

import { readFileSync, existsSync } from "node:fs";

import { numericColumn, parseCsv, requireColumns, SchemaError, Table } from "./csv.js";

export interface RecordsGrid {
  gValues: number[];
  etaValues: number[];
  /** values[i][j] for gValues[i] x etaValues[j]; NaN where absent/excluded */
  values: number[][];
  etaLogSpaced: boolean;
}

export function loadTable(path: string): Table {
  if (!existsSync(path)) {
    throw new SchemaError(`input file not found: ${path}`);
  }
  return parseCsv(readFileSync(path, "utf-8"), path);
}

/** Reshape a sweep records.csv column onto its (g_tilde, eta) grid. */
export function recordsGrid(table: Table, field: string, context: string): RecordsGrid {
  requireColumns(table, ["g_tilde", "eta", field], context);
  const g = numericColumn(table, "g_tilde", context);
  const eta = numericColumn(table, "eta", context);
  const v = numericColumn(table, field, context);
  const gValues = uniqueSorted(g);
  const etaValues = uniqueSorted(eta);
  const gIndex = new Map(gValues.map((x, i) => [x, i]));
  const etaIndex = new Map(etaValues.map((x, i) => [x, i]));
  const values = gValues.map(() => etaValues.map(() => NaN));
  for (let k = 0; k < g.length; k++) {
    values[gIndex.get(g[k])!][etaIndex.get(eta[k])!] = v[k];
  }
  return {
    gValues,
    etaValues,
    values,
    etaLogSpaced: looksLogSpaced(etaValues),
  };
}

function uniqueSorted(xs: number[]): number[] {
  return [...new Set(xs)].sort((a, b) => a - b);
}

/** Log-spaced when the ratios between consecutive values are more uniform
 * than the differences. */
export function looksLogSpaced(xs: number[]): boolean {
  if (xs.length < 3 || xs[0] <= 0) return false;
  const diffs = [];
  const ratios = [];
  for (let i = 1; i < xs.length; i++) {
    diffs.push(xs[i] - xs[i - 1]);
    ratios.push(xs[i] / xs[i - 1]);
  }
  const spread = (ys: number[]) => {
    const lo = Math.min(...ys);
    const hi = Math.max(...ys);
    return (hi - lo) / Math.max(Math.abs(hi), 1e-300);
  };
  return spread(ratios) < 0.01 && spread(diffs) > 0.01;
}

export interface TraceSeries {
  path: string;
  t: number[];
  sz: number[];
  label: string;
  normalized: boolean;
}

/** Load a trace CSV; quantum traces are normalized to s_z in [-1, 1] using
 * n_spins from the JSON sidecar written next to the CSV. */
export function loadTrace(path: string): TraceSeries {
  const table = loadTable(path);
  requireColumns(table, ["t", "sz"], path);
  const t = numericColumn(table, "t", path);
  let sz = numericColumn(table, "sz", path);
  let label = "mean-field";
  let normalized = false;
  const sidecar = path.replace(/\.csv$/, ".json");
  if (existsSync(sidecar)) {
    try {
      const meta = JSON.parse(readFileSync(sidecar, "utf-8"));
      const n = meta?.params?.n_spins;
      if (typeof n === "number" && n > 0) {
        sz = sz.map((v) => v / (n / 2));
        label = `N=${n}`;
        normalized = true;
      }
    } catch {
      // unreadable sidecar: fall through, treat as classical trace
    }
  }
  return { path, t, sz, label, normalized };
}
