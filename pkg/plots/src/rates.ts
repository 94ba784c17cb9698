/** Log-log rate figure: sigma^2, gamma, r points with +-2 SE bands and
 * dashed reference-slope lines, one image per (scenario, mode). */

import { RatesRow, SchemaError, singleGroup } from "./csv.js";
import { DEFAULT_FRAME, SERIES_COLORS, Svg, log10Scale } from "./svg.js";

export interface RatesOptions {
  refSlopes?: number[]; // sigma2, gamma, r order; defaults to the fitted slopes
  normalizeAt?: number; // divide each series by its value at this n
}

export interface RatesSeries {
  name: string;
  points: Array<{ n: number; value: number; se: number }>;
  fittedSlope: number;
  refSlope: number;
}

export interface RatesPlot {
  svg: string;
  scenario: string;
  mode: string;
  series: RatesSeries[];
}

const QUANTITIES = [
  { name: "sigma2", value: (r: RatesRow) => r.sigma2, se: (r: RatesRow) => r.sigma2_se, slope: (r: RatesRow) => r.slope_sigma2 },
  { name: "gamma", value: (r: RatesRow) => r.gamma, se: (r: RatesRow) => r.gamma_se, slope: (r: RatesRow) => r.slope_gamma },
  { name: "r", value: (r: RatesRow) => r.r, se: (r: RatesRow) => r.r_se, slope: (r: RatesRow) => r.slope_r },
] as const;

export function buildRatesPlot(rows: RatesRow[], opts: RatesOptions = {}): RatesPlot {
  if (rows.length < 3) throw new SchemaError("rates plot needs at least 3 sample sizes");
  const [scenario, mode] = singleGroup(rows);
  const sorted = [...rows].sort((a, b) => a.n - b.n);

  const series: RatesSeries[] = QUANTITIES.map((q, qi) => {
    let points = sorted.map((r) => ({ n: r.n, value: q.value(r), se: q.se(r) }));
    if (opts.normalizeAt !== undefined) {
      const ref = points.find((p) => p.n === opts.normalizeAt);
      if (!ref) throw new SchemaError(`normalize-at n=${opts.normalizeAt} is not in the csv`);
      points = points.map((p) => ({ n: p.n, value: p.value / ref.value, se: p.se / Math.abs(ref.value) }));
    }
    if (points.some((p) => p.value <= 0)) {
      throw new SchemaError(`series ${q.name} has non-positive values; cannot draw on a log scale`);
    }
    return {
      name: q.name,
      points,
      fittedSlope: q.slope(sorted[0]),
      refSlope: opts.refSlopes?.[qi] ?? q.slope(sorted[0]),
    };
  });

  const f = DEFAULT_FRAME;
  const ns = sorted.map((r) => r.n);
  const values = series.flatMap((s) => s.points.flatMap((p) => {
    const lo = Math.max(p.value - 2 * p.se, p.value / 10);
    return [lo, p.value + 2 * p.se];
  }));
  const xs = log10Scale(Math.min(...ns) / 1.3, Math.max(...ns) * 1.3, f.left, f.width - f.right);
  const ys = log10Scale(Math.min(...values) / 2, Math.max(...values) * 2, f.height - f.bottom, f.top);

  const slopeNote = series.map((s) => `${s.name} slope ${s.fittedSlope.toFixed(3)}`).join(", ");
  const svg = new Svg(f, `${scenario} (${mode}): stability rates`, `fitted: ${slopeNote}`);
  svg.axes(xs, ys, "training size n", opts.normalizeAt ? `value / value(n=${opts.normalizeAt})` : "value");

  series.forEach((s, si) => {
    const color = SERIES_COLORS[si];
    const band: Array<[number, number]> = [];
    for (const p of s.points) band.push([xs(p.n), ys(Math.max(p.value - 2 * p.se, p.value / 10))]);
    for (const p of [...s.points].reverse()) band.push([xs(p.n), ys(p.value + 2 * p.se)]);
    svg.polygon(band, color, 0.18);
    // dashed reference rate line anchored at the largest-n point
    const anchor = s.points[s.points.length - 1];
    const refLine: Array<[number, number]> = s.points.map((p) => [
      xs(p.n),
      ys(anchor.value * Math.pow(p.n / anchor.n, s.refSlope)),
    ]);
    svg.path(refLine, color, 1.2, "6 4");
    svg.path(s.points.map((p) => [xs(p.n), ys(p.value)]), color, 1.8);
    for (const p of s.points) svg.circle(xs(p.n), ys(p.value), 3.4, color);
    svg.text(f.width - f.right - 4, f.top + 16 + 16 * si,
      `${s.name}  (slope ${s.fittedSlope.toFixed(2)}, ref ${s.refSlope.toFixed(2)})`, "end", 12, color);
  });
  return { svg: svg.render(), scenario, mode, series };
}
