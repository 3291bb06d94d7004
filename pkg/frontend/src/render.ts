/** Server-side rendering of figure specs to SVG files via echarts SSR. */

import { writeFileSync } from "fs";

import * as echarts from "echarts";

import { buildFigure, FigureSpec } from "./figures.js";

export const DEFAULT_WIDTH = 840;
export const DEFAULT_HEIGHT = 520;

/**
 * The renderer derives style-class and clip-path ids from process-global
 * counters (zr<chart>-cls-<n>, zr<chart>-c<n>), so two renders of the same
 * figure differ in ids.  Remap every such token in order of first
 * appearance; references and definitions stay paired.
 */
export function normalizeSvgClasses(svg: string): string {
  const seen = new Map<string, string>();
  return svg.replace(/zr\d+-[a-z-]*\d+/g, (m) => {
    if (!seen.has(m)) seen.set(m, `zr-id${seen.size}`);
    return seen.get(m)!;
  });
}

export function renderToSvgString(spec: FigureSpec): string {
  const option = buildFigure(spec);
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: spec.width ?? DEFAULT_WIDTH,
    height: spec.height ?? DEFAULT_HEIGHT,
  });
  try {
    chart.setOption(option);
    return normalizeSvgClasses(chart.renderToSVGString());
  } finally {
    chart.dispose();
  }
}

/** Render and write the image; returns the output path. */
export function render(spec: FigureSpec): string {
  const svg = renderToSvgString(spec);
  if (svg.length === 0) {
    throw new Error(`${spec.output}: renderer produced an empty image`);
  }
  writeFileSync(spec.output, svg);
  return spec.output;
}
