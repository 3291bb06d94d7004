/**
 * Figure builders: CSV contents in, echarts option objects out.
 *
 * Four kinds are supported:
 *   probe-sweep     one curve of the probe-point value over time per voltage
 *   surface         u over (x, t) from a family of 1D snapshots, or u over
 *                   (x, y) from a single 2D snapshot
 *   profile-family  steady profiles u(x) for several voltages
 *   decay-fit       distance-to-equilibrium samples with the fitted model
 *                   curve overlaid (fit parameters come from the solver's
 *                   summary; nothing is refitted here)
 */

import type { EChartsOption } from "echarts";

import {
  DecayPoint,
  FitSummary,
  Profile,
  SchemaError,
  Snapshot2d,
  SweepSeries,
  loadDecay,
  loadFitSummary,
  loadProfile,
  loadSnapshot2d,
  loadSweep,
  loadTable,
  snapshotTime,
} from "./csv.js";

export type FigureKind = "probe-sweep" | "surface" | "profile-family" | "decay-fit";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  /** optional fit-summary JSON path for decay-fit */
  fitSummary?: string;
  width?: number;
  height?: number;
}

const PALETTE = [
  "#4165ab", "#548f3c", "#b0433c", "#7b5aa6", "#c78a31",
  "#3a8c8c", "#a84f80", "#6b6b6b", "#2d5f8a", "#8f6e3b",
];

function baseAxes(spec: FigureSpec, xName: string, yName: string): EChartsOption {
  return {
    animation: false,
    title: spec.title ? { text: spec.title, left: "center" } : undefined,
    grid: { left: 60, right: 90, top: spec.title ? 48 : 24, bottom: 48 },
    xAxis: { type: "value", name: spec.xLabel ?? xName, nameLocation: "middle", nameGap: 28 },
    yAxis: { type: "value", name: spec.yLabel ?? yName, nameLocation: "middle", nameGap: 40 },
  };
}

export function probeSweepOption(spec: FigureSpec, series: SweepSeries[]): EChartsOption {
  return {
    ...baseAxes(spec, "t", "probe value"),
    legend: { orient: "vertical", right: 4, top: "middle" },
    series: series.map((s, i) => ({
      type: "line",
      name: `λ=${s.lambda}`,
      showSymbol: false,
      lineStyle: { width: 1.5, color: PALETTE[i % PALETTE.length] },
      itemStyle: { color: PALETTE[i % PALETTE.length] },
      data: s.points,
    })),
  };
}

export interface SurfaceData {
  /** row axis values (x) */
  x: number[];
  /** column axis values (t, or y for a single 2D snapshot) */
  col: number[];
  colName: "t" | "y";
  /** values[i][j] at (x_i, col_j) */
  values: number[][];
}

export function surfaceFromProfiles(inputs: string[]): SurfaceData {
  const profiles: { t: number; p: Profile }[] = inputs.map((f, i) => {
    const t = snapshotTime(f);
    return { t: t === null ? i : t, p: loadProfile(f) };
  });
  profiles.sort((a, b) => a.t - b.t);
  const x = profiles[0].p.x;
  for (const { p } of profiles) {
    if (p.x.length !== x.length) {
      throw new SchemaError(p.file, "snapshot grids differ in length");
    }
  }
  return {
    x,
    col: profiles.map(({ t }) => t),
    colName: "t",
    values: x.map((_, i) => profiles.map(({ p }) => p.u[i])),
  };
}

export function surfaceFrom2d(input: string): SurfaceData {
  const snap: Snapshot2d = loadSnapshot2d(input);
  return { x: snap.x, col: snap.y, colName: "y", values: snap.u };
}

export function surfaceOption(spec: FigureSpec, data: SurfaceData): EChartsOption {
  const cells: [number, number, number][] = [];
  let vmax = 0;
  for (let i = 0; i < data.x.length; i++) {
    for (let j = 0; j < data.col.length; j++) {
      const v = data.values[i][j];
      vmax = Math.max(vmax, Math.abs(v));
      cells.push([i, j, v]);
    }
  }
  return {
    animation: false,
    title: spec.title ? { text: spec.title, left: "center" } : undefined,
    grid: { left: 60, right: 90, top: spec.title ? 48 : 24, bottom: 48 },
    xAxis: {
      type: "category",
      name: spec.xLabel ?? "x",
      nameLocation: "middle",
      nameGap: 28,
      data: data.x.map((v) => v.toPrecision(4)),
    },
    yAxis: {
      type: "category",
      name: spec.yLabel ?? data.colName,
      nameLocation: "middle",
      nameGap: 40,
      data: data.col.map((v) => v.toPrecision(4)),
    },
    visualMap: {
      min: 0,
      max: vmax || 1,
      calculable: false,
      orient: "vertical",
      right: 4,
      top: "middle",
      inRange: { color: ["#30123b", "#4686fb", "#1ae4b6", "#a2fc3c", "#faba39", "#e4460a", "#7a0403"] },
    },
    series: [{ type: "heatmap", data: cells, progressive: 0 }],
  };
}

export function profileFamilyOption(spec: FigureSpec, profiles: Profile[]): EChartsOption {
  return {
    ...baseAxes(spec, "x", "u"),
    legend: { orient: "vertical", right: 4, top: "middle" },
    series: profiles.map((p, i) => {
      const m = /lambda([-0-9.eE+]+)\.csv$/.exec(p.file);
      return {
        type: "line" as const,
        name: m ? `λ=${m[1]}` : p.file,
        showSymbol: false,
        lineStyle: { width: 1.5, color: PALETTE[i % PALETTE.length] },
        itemStyle: { color: PALETTE[i % PALETTE.length] },
        data: p.x.map((x, k) => [x, p.u[k]] as [number, number]),
      };
    }),
  };
}

export function modelCurve(fit: FitSummary, ts: number[]): [number, number][] {
  return ts.map((t) => [
    t,
    fit.model === "exponential"
      ? fit.amplitude * Math.exp(-fit.parameter * t)
      : fit.amplitude * Math.pow(1 + t, -fit.parameter),
  ]);
}

export function decayFitOption(
  spec: FigureSpec,
  points: DecayPoint[],
  fit: FitSummary | null,
): EChartsOption {
  const usable = points.filter((p) => p.distance > 0);
  const series: NonNullable<EChartsOption["series"]> = [
    {
      type: "scatter",
      name: "measured",
      symbolSize: 4,
      itemStyle: { color: PALETTE[0] },
      data: usable.map((p) => [p.t, p.distance] as [number, number]),
    },
  ];
  if (fit) {
    const ts = usable.map((p) => p.t);
    const label =
      fit.model === "exponential"
        ? `fit: ${fit.amplitude.toPrecision(3)} exp(-${fit.parameter.toPrecision(4)} t)`
        : `fit: ${fit.amplitude.toPrecision(3)} (1+t)^-${fit.parameter.toPrecision(4)}`;
    series.push({
      type: "line",
      name: label,
      showSymbol: false,
      lineStyle: { width: 2, color: PALETTE[2], type: "dashed" },
      itemStyle: { color: PALETTE[2] },
      data: modelCurve(fit, ts),
    });
  }
  return {
    ...baseAxes(spec, "t", "distance to steady state"),
    yAxis: {
      type: "log",
      name: spec.yLabel ?? "distance to steady state",
      nameLocation: "middle",
      nameGap: 52,
    },
    legend: { top: 4, right: 4 },
    series,
  };
}

/** Assemble the echarts option for a figure spec (reads the input files). */
export function buildFigure(spec: FigureSpec): EChartsOption {
  switch (spec.kind) {
    case "probe-sweep": {
      if (spec.inputs.length !== 1) {
        throw new SchemaError(spec.inputs.join(","), "probe-sweep expects one sweep CSV");
      }
      return probeSweepOption(spec, loadSweep(spec.inputs[0]));
    }
    case "surface": {
      if (spec.inputs.length === 1) {
        return surfaceOption(spec, surfaceFrom2d(spec.inputs[0]));
      }
      return surfaceOption(spec, surfaceFromProfiles(spec.inputs));
    }
    case "profile-family":
      return profileFamilyOption(spec, spec.inputs.map(loadProfile));
    case "decay-fit": {
      if (spec.inputs.length !== 1) {
        throw new SchemaError(spec.inputs.join(","), "decay-fit expects one decay CSV");
      }
      const fit = spec.fitSummary ? loadFitSummary(spec.fitSummary) : null;
      return decayFitOption(spec, loadDecay(spec.inputs[0]), fit);
    }
  }
}
