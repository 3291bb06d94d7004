import { describe, expect, it } from "vitest";
import { existsSync, mkdtempSync, readFileSync, statSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { fileURLToPath } from "url";
import path from "path";

import { main } from "../src/cli.js";
import { render, renderToSvgString } from "../src/render.js";

const FIXTURES = path.join(path.dirname(fileURLToPath(import.meta.url)), "..", "fixtures");
const fx = (name: string) => path.join(FIXTURES, name);
const outDir = mkdtempSync(path.join(tmpdir(), "memsim-fig-"));

const SNAPSHOTS = ["0.25", "0.5", "1.0", "1.5", "2.0", "3.0", "4.0", "6.0"].map(
  (t) => fx(`snapshot_t${t}.csv`),
);

describe("render", () => {
  it("writes a non-empty probe-sweep image", () => {
    const out = path.join(outDir, "sweep.svg");
    render({
      kind: "probe-sweep",
      inputs: [fx("sweep.csv")],
      output: out,
      title: "midpoint deflection by voltage",
      xLabel: "t",
      yLabel: "u(0.5, t)",
    });
    expect(existsSync(out)).toBe(true);
    expect(statSync(out).size).toBeGreaterThan(1000);
    const svg = readFileSync(out, "utf8");
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain("width=\"840\"");
  });

  it("writes a non-empty surface image from 1D snapshots", () => {
    const out = path.join(outDir, "surface.svg");
    render({ kind: "surface", inputs: SNAPSHOTS, output: out });
    expect(statSync(out).size).toBeGreaterThan(1000);
  });

  it("writes a non-empty 2D heatmap", () => {
    const out = path.join(outDir, "square.svg");
    render({ kind: "surface", inputs: [fx("square_final.csv")], output: out });
    expect(statSync(out).size).toBeGreaterThan(1000);
  });

  it("writes a profile family and a decay fit", () => {
    const fam = path.join(outDir, "family.svg");
    render({
      kind: "profile-family",
      inputs: ["2.0", "4.0", "6.0", "8.0"].map((l) => fx(`steady_lambda${l}.csv`)),
      output: fam,
    });
    const dec = path.join(outDir, "decay.svg");
    render({
      kind: "decay-fit",
      inputs: [fx("decay.csv")],
      fitSummary: fx("rate_summary.json"),
      output: dec,
    });
    expect(statSync(fam).size).toBeGreaterThan(1000);
    expect(statSync(dec).size).toBeGreaterThan(1000);
  });

  it("is idempotent: same inputs give the same bytes", () => {
    const a = renderToSvgString({
      kind: "probe-sweep",
      inputs: [fx("sweep.csv")],
      output: "",
    });
    const b = renderToSvgString({
      kind: "probe-sweep",
      inputs: [fx("sweep.csv")],
      output: "",
    });
    expect(a).toEqual(b);
  });
});

describe("cli", () => {
  it("renders via argv", () => {
    const out = path.join(outDir, "cli.svg");
    const code = main([
      "probe-sweep",
      "--out",
      out,
      "--title",
      "sweep",
      fx("sweep.csv"),
    ]);
    expect(code).toBe(0);
    expect(statSync(out).size).toBeGreaterThan(1000);
  });

  it("fails on an empty CSV with a schema message", () => {
    const empty = path.join(outDir, "empty.csv");
    writeFileSync(empty, "");
    const code = main(["probe-sweep", "--out", path.join(outDir, "x.svg"), empty]);
    expect(code).toBe(1);
  });

  it("fails on a wrong schema naming the column", () => {
    const code = main([
      "probe-sweep",
      "--out",
      path.join(outDir, "y.svg"),
      fx("snapshot_t1.0.csv"),
    ]);
    expect(code).toBe(1);
  });

  it("rejects unknown kinds and missing --out", () => {
    expect(main(["pie-chart", "--out", "z.svg", fx("sweep.csv")])).toBe(1);
    expect(main(["probe-sweep", fx("sweep.csv")])).toBe(1);
  });
});
