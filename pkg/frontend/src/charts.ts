/** SVG histogram rendering for one horizon's conditional density.
 *
 * Pure string builders: the tests assert on geometry without a DOM, and the
 * page assigns the result to innerHTML. */

import type { DensitySummary } from './api.js';

export interface ChartOptions {
  width: number;
  height: number;
  marginLeft: number;
  marginBottom: number;
}

export const DEFAULT_OPTIONS: ChartOptions = {
  width: 420,
  height: 180,
  marginLeft: 10,
  marginBottom: 22,
};

export interface Bar {
  x: number;
  y: number;
  width: number;
  height: number;
}

/** Bar rectangles in pixel space; heights scale to the largest weight. */
export function barGeometry(summary: DensitySummary, opts: ChartOptions): Bar[] {
  const edges = summary.bin_edges;
  const weights = summary.bin_weights;
  const lo = edges[0];
  const span = edges[edges.length - 1] - lo;
  const plotW = opts.width - opts.marginLeft;
  const plotH = opts.height - opts.marginBottom;
  const maxW = Math.max(...weights, Number.MIN_VALUE);
  return weights.map((w, i) => {
    const x0 = opts.marginLeft + ((edges[i] - lo) / span) * plotW;
    const x1 = opts.marginLeft + ((edges[i + 1] - lo) / span) * plotW;
    const h = (w / maxW) * plotH;
    return { x: x0, y: plotH - h, width: x1 - x0, height: h };
  });
}

/** Pixel x-positions of the Low/Medium and Medium/High tercile bounds,
 * clamped to the plot, or null when a bound is off-range. */
export function tercileLines(
  summary: DensitySummary,
  opts: ChartOptions,
): [number | null, number | null] {
  const edges = summary.bin_edges;
  const lo = edges[0];
  const span = edges[edges.length - 1] - lo;
  const plotW = opts.width - opts.marginLeft;
  const toX = (v: number): number | null =>
    v < lo || v > edges[edges.length - 1]
      ? null
      : opts.marginLeft + ((v - lo) / span) * plotW;
  return [toX(summary.tercile_bounds[0]), toX(summary.tercile_bounds[1])];
}

function fmt(v: number): string {
  return v.toFixed(1).replace(/\.0$/, '');
}

export function histogramSvg(
  summary: DensitySummary,
  opts: ChartOptions = DEFAULT_OPTIONS,
): string {
  const bars = barGeometry(summary, opts);
  const [loX, hiX] = tercileLines(summary, opts);
  const plotH = opts.height - opts.marginBottom;
  const parts: string[] = [
    `<svg viewBox="0 0 ${opts.width} ${opts.height}" class="histogram" ` +
      `role="img" aria-label="forecast histogram for ${summary.season}">`,
  ];
  // tercile shading behind the bars: Low region left, High region right
  if (loX !== null) {
    parts.push(
      `<rect class="zone zone-low" x="${opts.marginLeft}" y="0" ` +
        `width="${(loX - opts.marginLeft).toFixed(2)}" height="${plotH}"/>`,
    );
  }
  if (hiX !== null) {
    parts.push(
      `<rect class="zone zone-high" x="${hiX.toFixed(2)}" y="0" ` +
        `width="${(opts.width - hiX).toFixed(2)}" height="${plotH}"/>`,
    );
  }
  for (const b of bars) {
    parts.push(
      `<rect class="bar" x="${b.x.toFixed(2)}" y="${b.y.toFixed(2)}" ` +
        `width="${Math.max(b.width - 1, 0.5).toFixed(2)}" height="${b.height.toFixed(2)}"/>`,
    );
  }
  const edges = summary.bin_edges;
  parts.push(
    `<text class="axis" x="${opts.marginLeft}" y="${opts.height - 6}">${fmt(edges[0])}</text>`,
    `<text class="axis" x="${opts.width - 4}" y="${opts.height - 6}" ` +
      `text-anchor="end">${fmt(edges[edges.length - 1])}</text>`,
    '</svg>',
  );
  return parts.join('');
}
