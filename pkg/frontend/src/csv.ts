/**
 * Strict readers for the simulator's CSV artifacts.
 *
 * Four schemas exist (exact headers):
 *   sweep       lambda,t,probe_value
 *   trajectory  t,max_u,energy,l2_ut,nonlocal_I,dt
 *   snapshot    x,u          (1D / radial profiles)
 *   snapshot2d  x,y,u        (rectangle grids)
 *   decay       t,distance
 *
 * Any header or cell that deviates raises SchemaError naming the offending
 * column; the figure scripts never guess.
 */

import { readFileSync } from "fs";

export class SchemaError extends Error {
  constructor(file: string, detail: string) {
    super(`${file}: ${detail}`);
    this.name = "SchemaError";
  }
}

export interface Table {
  header: string[];
  rows: number[][];
}

export function parseNumericCsv(file: string, text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(file, "empty file (no header)");
  }
  const header = lines[0].split(",").map((h) => h.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(
        file,
        `row ${i + 1} has ${cells.length} cells, expected ${header.length}`,
      );
    }
    const row = cells.map((c, j) => {
      const v = Number(c);
      if (c.trim() === "" || Number.isNaN(v)) {
        throw new SchemaError(
          file,
          `row ${i + 1}, column '${header[j]}': not a number: '${c}'`,
        );
      }
      return v;
    });
    rows.push(row);
  }
  return { header, rows };
}

export function requireColumns(file: string, table: Table, expected: string[]): void {
  for (let i = 0; i < expected.length; i++) {
    if (table.header[i] !== expected[i]) {
      throw new SchemaError(
        file,
        `column ${i + 1} is '${table.header[i] ?? "(missing)"}', expected '${expected[i]}'`,
      );
    }
  }
  if (table.header.length !== expected.length) {
    throw new SchemaError(
      file,
      `unexpected extra column '${table.header[expected.length]}'`,
    );
  }
  if (table.rows.length === 0) {
    throw new SchemaError(file, "no data rows");
  }
}

export function loadTable(file: string, expected: string[]): Table {
  const table = parseNumericCsv(file, readFileSync(file, "utf8"));
  requireColumns(file, table, expected);
  return table;
}

export interface SweepSeries {
  lambda: number;
  points: [number, number][]; // (t, probe value)
}

/** Group sweep rows into one time series per voltage, in file order. */
export function loadSweep(file: string): SweepSeries[] {
  const table = loadTable(file, ["lambda", "t", "probe_value"]);
  const series = new Map<number, [number, number][]>();
  for (const [lam, t, v] of table.rows) {
    if (!series.has(lam)) series.set(lam, []);
    series.get(lam)!.push([t, v]);
  }
  return [...series.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([lambda, points]) => ({ lambda, points }));
}

export interface Profile {
  file: string;
  x: number[];
  u: number[];
}

export function loadProfile(file: string): Profile {
  const table = loadTable(file, ["x", "u"]);
  return {
    file,
    x: table.rows.map((r) => r[0]),
    u: table.rows.map((r) => r[1]),
  };
}

export interface Snapshot2d {
  x: number[];
  y: number[];
  /** u[i][j] on the (x_i, y_j) grid */
  u: number[][];
}

export function loadSnapshot2d(file: string): Snapshot2d {
  const table = loadTable(file, ["x", "y", "u"]);
  const xs = [...new Set(table.rows.map((r) => r[0]))].sort((a, b) => a - b);
  const ys = [...new Set(table.rows.map((r) => r[1]))].sort((a, b) => a - b);
  const xi = new Map(xs.map((v, i) => [v, i]));
  const yi = new Map(ys.map((v, i) => [v, i]));
  const u = xs.map(() => new Array<number>(ys.length).fill(NaN));
  for (const [x, y, val] of table.rows) {
    u[xi.get(x)!][yi.get(y)!] = val;
  }
  for (let i = 0; i < xs.length; i++) {
    for (let j = 0; j < ys.length; j++) {
      if (Number.isNaN(u[i][j])) {
        throw new SchemaError(file, `missing grid value at (${xs[i]}, ${ys[j]})`);
      }
    }
  }
  return { x: xs, y: ys, u };
}

export interface DecayPoint {
  t: number;
  distance: number;
}

export function loadDecay(file: string): DecayPoint[] {
  const table = loadTable(file, ["t", "distance"]);
  return table.rows.map(([t, distance]) => ({ t, distance }));
}

export interface FitSummary {
  model: "exponential" | "algebraic";
  parameter: number;
  amplitude: number;
  rSquared?: number;
}

/** Fitted-model parameters from a rate run's summary.json. */
export function loadFitSummary(file: string): FitSummary {
  const raw = JSON.parse(readFileSync(file, "utf8"));
  const result = raw.result ?? raw;
  if (result.model !== "exponential" && result.model !== "algebraic") {
    throw new SchemaError(file, `missing or unknown fit model '${result.model}'`);
  }
  if (typeof result.parameter !== "number" || typeof result.amplitude !== "number") {
    throw new SchemaError(file, "fit summary lacks numeric parameter/amplitude");
  }
  return {
    model: result.model,
    parameter: result.parameter,
    amplitude: result.amplitude,
    rSquared: typeof result.r_squared === "number" ? result.r_squared : undefined,
  };
}

/** Time encoded in a snapshot filename such as snapshot_t2.5.csv. */
export function snapshotTime(file: string): number | null {
  const m = /snapshot_t([-0-9.eE+]+)\.csv$/.exec(file);
  if (!m) return null;
  const v = Number(m[1]);
  return Number.isNaN(v) ? null : v;
}
