import { describe, expect, it } from "vitest";
import { fileURLToPath } from "url";
import path from "path";

import {
  SchemaError,
  loadDecay,
  loadFitSummary,
  loadProfile,
  loadSnapshot2d,
  loadSweep,
  parseNumericCsv,
  requireColumns,
  snapshotTime,
} from "../src/csv.js";

const FIXTURES = path.join(path.dirname(fileURLToPath(import.meta.url)), "..", "fixtures");
const fx = (name: string) => path.join(FIXTURES, name);

describe("parseNumericCsv", () => {
  it("parses header and rows", () => {
    const t = parseNumericCsv("mem", "a,b\n1,2\n3.5,-4e-2\n");
    expect(t.header).toEqual(["a", "b"]);
    expect(t.rows).toEqual([
      [1, 2],
      [3.5, -0.04],
    ]);
  });

  it("rejects an empty file", () => {
    expect(() => parseNumericCsv("mem", "")).toThrow(SchemaError);
  });

  it("names the offending column for a bad cell", () => {
    expect(() => parseNumericCsv("mem", "a,b\n1,oops\n")).toThrow(/column 'b'/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseNumericCsv("mem", "a,b\n1\n")).toThrow(/row 2/);
  });
});

describe("requireColumns", () => {
  it("names a wrong header column", () => {
    const t = parseNumericCsv("mem", "a,b\n1,2\n");
    expect(() => requireColumns("mem", t, ["a", "c"])).toThrow(/expected 'c'/);
  });

  it("rejects extra columns", () => {
    const t = parseNumericCsv("mem", "a,b,c\n1,2,3\n");
    expect(() => requireColumns("mem", t, ["a", "b"])).toThrow(/extra column 'c'/);
  });
});

describe("fixture loaders", () => {
  it("groups the sweep by voltage", () => {
    const series = loadSweep(fx("sweep.csv"));
    expect(series.map((s) => s.lambda)).toEqual([8.0, 8.25, 8.5, 8.75, 9.0]);
    expect(series[0].points.length).toBeGreaterThan(5);
    for (const s of series) {
      expect(s.points.length).toBeGreaterThan(1);
      const ts = s.points.map((p) => p[0]);
      expect([...ts].sort((a, b) => a - b)).toEqual(ts);
    }
  });

  it("loads 1D profiles", () => {
    const p = loadProfile(fx("snapshot_t1.0.csv"));
    expect(p.x.length).toBe(101);
    expect(p.x[0]).toBe(0);
    expect(p.x[p.x.length - 1]).toBe(1);
    expect(Math.max(...p.u)).toBeGreaterThan(0);
  });

  it("loads a 2D snapshot into a grid", () => {
    const s = loadSnapshot2d(fx("square_final.csv"));
    expect(s.x.length).toBe(21);
    expect(s.y.length).toBe(21);
    expect(s.u[10][10]).toBeGreaterThan(0);
    expect(s.u[0][0]).toBe(0);
  });

  it("loads decay samples and fit summary", () => {
    const d = loadDecay(fx("decay.csv"));
    expect(d.length).toBeGreaterThan(20);
    const fit = loadFitSummary(fx("rate_summary.json"));
    expect(fit.model).toBe("exponential");
    expect(fit.parameter).toBeGreaterThan(0);
  });

  it("rejects a schema mismatch with the offending column", () => {
    expect(() => loadProfile(fx("sweep.csv"))).toThrow(/column 1 is 'lambda'/);
  });
});

describe("snapshotTime", () => {
  it("extracts the time from the filename", () => {
    expect(snapshotTime("runs/snapshot_t2.5.csv")).toBe(2.5);
    expect(snapshotTime("snapshot_t0.25.csv")).toBe(0.25);
    expect(snapshotTime("final.csv")).toBeNull();
  });
});
