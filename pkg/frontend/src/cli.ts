#!/usr/bin/env node
/** dicke-plot: batch SVG figures from dicke CSV outputs.
 *
 * Subcommands:
 *   heatmap   --records records.csv --field sz_bar [--contour-records lyap.csv]
 *             [--contour-level 0.01] [--out fig.svg] [--title ...]
 *   traces    --inputs a.csv,b.csv [--out fig.svg]
 *   potential --input potential.csv [--out fig.svg]
 *   boundary  --input boundary.csv [--out fig.svg]
 *
 * Exit codes: 0 ok, 1 usage error, 2 runtime/schema error.
 */

import { writeFileSync } from "node:fs";

import { SchemaError } from "./csv.js";
import {
  renderBoundary,
  renderHeatmap,
  renderPotential,
  renderTraces,
} from "./render.js";

class UsageError extends Error {}

type Flags = Record<string, string | true>;

function parseFlags(argv: string[], allowed: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new UsageError(`unexpected positional argument '${arg}'`);
    }
    const name = arg.slice(2);
    if (!allowed.includes(name)) {
      throw new UsageError(`unknown flag --${name}`);
    }
    const next = argv[i + 1];
    if (next !== undefined && !next.startsWith("--")) {
      flags[name] = next;
      i++;
    } else {
      flags[name] = true;
    }
  }
  return flags;
}

function need(flags: Flags, name: string): string {
  const value = flags[name];
  if (typeof value !== "string" || value.length === 0) {
    throw new UsageError(`missing required flag --${name}`);
  }
  return value;
}

function optNumber(flags: Flags, name: string): number | undefined {
  const value = flags[name];
  if (value === undefined || value === true) return undefined;
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) {
    throw new UsageError(`flag --${name} expects a number, got '${value}'`);
  }
  return parsed;
}

function optString(flags: Flags, name: string): string | undefined {
  const value = flags[name];
  return typeof value === "string" ? value : undefined;
}

export function run(argv: string[]): number {
  const [subcommand, ...rest] = argv;
  try {
    if (!subcommand || subcommand === "--help" || subcommand === "-h") {
      console.log(
        "usage: dicke-plot <heatmap|traces|potential|boundary> [flags]; " +
          "see source header for the flag list",
      );
      return subcommand ? 0 : 1;
    }
    let svg: string;
    let out: string;
    switch (subcommand) {
      case "heatmap": {
        const flags = parseFlags(rest, [
          "records", "field", "contour-records", "contour-field",
          "contour-level", "out", "title",
        ]);
        out = optString(flags, "out") ?? "heatmap.svg";
        svg = renderHeatmap({
          recordsPath: need(flags, "records"),
          field: optString(flags, "field") ?? "sz_bar",
          contourRecordsPath: optString(flags, "contour-records"),
          contourField: optString(flags, "contour-field"),
          contourLevel: optNumber(flags, "contour-level"),
          title: optString(flags, "title"),
        });
        break;
      }
      case "traces": {
        const flags = parseFlags(rest, ["inputs", "out", "title"]);
        out = optString(flags, "out") ?? "traces.svg";
        svg = renderTraces({
          inputs: need(flags, "inputs").split(",").filter((s) => s.length > 0),
          title: optString(flags, "title"),
        });
        break;
      }
      case "potential": {
        const flags = parseFlags(rest, ["input", "out", "title"]);
        out = optString(flags, "out") ?? "potential.svg";
        svg = renderPotential({
          inputPath: need(flags, "input"),
          title: optString(flags, "title"),
        });
        break;
      }
      case "boundary": {
        const flags = parseFlags(rest, ["input", "out", "title"]);
        out = optString(flags, "out") ?? "boundary.svg";
        svg = renderBoundary({
          inputPath: need(flags, "input"),
          title: optString(flags, "title"),
        });
        break;
      }
      default:
        throw new UsageError(`unknown subcommand '${subcommand}'`);
    }
    writeFileSync(out, svg);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 1;
    }
    const message = err instanceof SchemaError ? err.message : String(err);
    console.error(`error: ${message}`);
    return 2;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("dicke-plot")) {
  process.exit(run(process.argv.slice(2)));
}
