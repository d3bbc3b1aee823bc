/** The four figure renderers: heatmap (+ contour overlay), trace overlay,
 * potential curve, boundary curve.  Each returns the SVG text; the CLI
 * writes it to disk. */

import { numericColumn, requireColumns } from "./csv.js";
import { contourSegments } from "./contour.js";
import { loadTable, loadTrace, recordsGrid } from "./schema.js";
import {
  DEFAULT_MARGIN,
  divergingColor,
  linearScale,
  logScale,
  Scale,
  sequentialColor,
  SvgDoc,
} from "./svg.js";

export interface HeatmapOptions {
  recordsPath: string;
  field: string; // e.g. sz_bar | lambda | svn_bar
  contourRecordsPath?: string;
  contourField?: string;
  contourLevel?: number;
  title?: string;
  width?: number;
  height?: number;
}

function centerScale(values: number[][]): { color: (v: number) => string; lo: number; hi: number } {
  const flat = values.flat().filter(Number.isFinite);
  if (flat.length === 0) {
    throw new Error("heatmap has no finite values to render");
  }
  const lo = Math.min(...flat);
  const hi = Math.max(...flat);
  if (lo < 0 && hi > 0) {
    const amp = Math.max(-lo, hi) || 1;
    return { color: (v) => divergingColor(v / amp), lo, hi };
  }
  const span = hi - lo || 1;
  return { color: (v) => sequentialColor((v - lo) / span), lo, hi };
}

/** Edges halfway between sample positions (log-aware for eta axes). */
function cellEdges(values: number[], log: boolean): number[] {
  const f = log ? Math.log : (x: number) => x;
  const g = log ? Math.exp : (x: number) => x;
  const v = values.map(f);
  const edges = [v[0] - (v.length > 1 ? (v[1] - v[0]) / 2 : 0.5)];
  for (let i = 0; i < v.length - 1; i++) edges.push((v[i] + v[i + 1]) / 2);
  edges.push(v[v.length - 1] + (v.length > 1 ? (v[v.length - 1] - v[v.length - 2]) / 2 : 0.5));
  return edges.map(g);
}

export function renderHeatmap(opts: HeatmapOptions): string {
  const width = opts.width ?? 560;
  const height = opts.height ?? 420;
  const margin = DEFAULT_MARGIN;
  const table = loadTable(opts.recordsPath);
  const grid = recordsGrid(table, opts.field, opts.recordsPath);
  const doc = new SvgDoc(width, height);

  const xEdges = cellEdges(grid.gValues, false);
  const yEdges = cellEdges(grid.etaValues, grid.etaLogSpaced);
  const xScale = linearScale(xEdges[0], xEdges[xEdges.length - 1], margin.left,
                             width - margin.right);
  const yScale: Scale = grid.etaLogSpaced
    ? logScale(yEdges[0], yEdges[yEdges.length - 1], height - margin.bottom, margin.top)
    : linearScale(yEdges[0], yEdges[yEdges.length - 1], height - margin.bottom,
                  margin.top);

  const { color } = centerScale(grid.values);
  for (let i = 0; i < grid.gValues.length; i++) {
    for (let j = 0; j < grid.etaValues.length; j++) {
      const v = grid.values[i][j];
      const x0 = xScale(xEdges[i]);
      const x1 = xScale(xEdges[i + 1]);
      const y0 = yScale(yEdges[j]);
      const y1 = yScale(yEdges[j + 1]);
      const fill = Number.isFinite(v) ? color(v) : "#bbbbbb"; // excluded: gray
      doc.rect(Math.min(x0, x1), Math.min(y0, y1), Math.abs(x1 - x0) + 0.5,
               Math.abs(y1 - y0) + 0.5, fill);
    }
  }

  if (opts.contourRecordsPath) {
    const level = opts.contourLevel ?? 0.01;
    const cTable = loadTable(opts.contourRecordsPath);
    const cGrid = recordsGrid(cTable, opts.contourField ?? "lambda",
                              opts.contourRecordsPath);
    const segments = contourSegments(cGrid.gValues, cGrid.etaValues, cGrid.values,
                                     level);
    for (const [[xa, ya], [xb, yb]] of segments) {
      doc.polyline(
        [[xScale(xa), yScale(ya)], [xScale(xb), yScale(yb)]],
        "#00a650", 2,
      );
    }
  }

  doc.axes(xScale, yScale, margin, "g_tilde", "eta");
  doc.text(width / 2, 20, opts.title ?? opts.field, "middle", 14);
  return doc.render();
}

export interface TracesOptions {
  inputs: string[];
  title?: string;
  width?: number;
  height?: number;
  warn?: (message: string) => void;
}

const TRACE_COLORS = ["#2ca02c", "#999999", "#555555", "#111111", "#1f77b4",
                      "#d62728"];

export function renderTraces(opts: TracesOptions): string {
  const warn = opts.warn ?? ((m) => console.warn(m));
  if (opts.inputs.length === 0) {
    throw new Error("traces renderer needs at least one input CSV");
  }
  const series = opts.inputs.map(loadTrace);
  const t0 = Math.max(...series.map((s) => Math.min(...s.t)));
  const t1 = Math.min(...series.map((s) => Math.max(...s.t)));
  if (!(t1 > t0)) {
    throw new Error(`trace time ranges do not overlap (common range [${t0}, ${t1}])`);
  }
  if (series.some((s) => Math.min(...s.t) < t0 || Math.max(...s.t) > t1)) {
    warn(`trace time ranges differ; clipping to common range [${t0}, ${t1}]`);
  }

  const width = opts.width ?? 640;
  const height = opts.height ?? 360;
  const margin = DEFAULT_MARGIN;
  const doc = new SvgDoc(width, height);
  const xScale = linearScale(t0, t1, margin.left, width - margin.right);
  const yScale = linearScale(-1.05, 1.05, height - margin.bottom, margin.top);

  series.forEach((s, k) => {
    const pts: Array<[number, number]> = [];
    for (let i = 0; i < s.t.length; i++) {
      if (s.t[i] >= t0 && s.t[i] <= t1) {
        pts.push([xScale(s.t[i]), yScale(s.sz[i])]);
      }
    }
    const color = TRACE_COLORS[k % TRACE_COLORS.length];
    doc.polyline(pts, color, s.normalized ? 1.2 : 1.8);
    doc.text(width - margin.right - 4, margin.top + 14 * (k + 1), s.label, "end",
             11);
  });
  doc.axes(xScale, yScale, margin, "g t", "s_z");
  doc.text(width / 2, 20, opts.title ?? "spin trace overlay", "middle", 14);
  return doc.render();
}

export interface CurveOptions {
  inputPath: string;
  title?: string;
  width?: number;
  height?: number;
}

export function renderPotential(opts: CurveOptions): string {
  const table = loadTable(opts.inputPath);
  requireColumns(table, ["xi", "v"], opts.inputPath);
  const xi = numericColumn(table, "xi", opts.inputPath);
  const v = numericColumn(table, "v", opts.inputPath);
  const width = opts.width ?? 520;
  const height = opts.height ?? 360;
  const margin = DEFAULT_MARGIN;
  const lo = Math.min(...v);
  const hi = Math.max(...v);
  const pad = 0.05 * (hi - lo || 1);
  const doc = new SvgDoc(width, height);
  const xScale = linearScale(Math.min(...xi), Math.max(...xi), margin.left,
                             width - margin.right);
  const yScale = linearScale(lo - pad, hi + pad, height - margin.bottom, margin.top);
  // zero line marks the initial mechanical energy
  doc.polyline(
    [[margin.left, yScale(0)], [width - margin.right, yScale(0)]],
    "#888888", 1, "4,3",
  );
  doc.polyline(xi.map((x, i) => [xScale(x), yScale(v[i])]), "#1f77b4", 2);
  doc.axes(xScale, yScale, margin, "xi", "V(xi)");
  doc.text(width / 2, 20, opts.title ?? "effective potential", "middle", 14);
  return doc.render();
}

export function renderBoundary(opts: CurveOptions): string {
  const table = loadTable(opts.inputPath);
  requireColumns(table, ["eta", "g_tilde_crit"], opts.inputPath);
  const eta = numericColumn(table, "eta", opts.inputPath);
  const g = numericColumn(table, "g_tilde_crit", opts.inputPath);
  if (eta.length === 0) {
    throw new Error(`${opts.inputPath}: boundary file has no rows`);
  }
  const width = opts.width ?? 520;
  const height = opts.height ?? 360;
  const margin = DEFAULT_MARGIN;
  const doc = new SvgDoc(width, height);
  const positive = eta.every((x) => x > 0);
  const xScale: Scale = positive && Math.max(...eta) / Math.min(...eta) > 10
    ? logScale(Math.min(...eta), Math.max(...eta), margin.left, width - margin.right)
    : linearScale(Math.min(...eta), Math.max(...eta), margin.left,
                  width - margin.right);
  const lo = Math.min(...g);
  const hi = Math.max(...g);
  const pad = 0.1 * (hi - lo || 1);
  const yScale = linearScale(lo - pad, hi + pad, height - margin.bottom, margin.top);
  const order = eta.map((_, i) => i).sort((a, b) => eta[a] - eta[b]);
  doc.polyline(order.map((i) => [xScale(eta[i]), yScale(g[i])]), "#d62728", 2);
  doc.axes(xScale, yScale, margin, "eta", "g_tilde_crit");
  doc.text(width / 2, 20, opts.title ?? "dynamical critical coupling", "middle", 14);
  return doc.render();
}
