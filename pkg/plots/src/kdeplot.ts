/** KDE figure: per-n density curves of the two normalized CV statistics
 * (solid: within-fold sigma-hat; dashed: Monte-Carlo sigma) over the shaded
 * standard-normal density. */

import { CltRow, SchemaError, singleGroup } from "./csv.js";
import { kdeOnGrid, linspace, normalPdf, silvermanBandwidth } from "./kde.js";
import { DEFAULT_FRAME, SERIES_COLORS, Svg, linearScale } from "./svg.js";

export interface KdePlot {
  svg: string;
  scenario: string;
  mode: string;
  ns: number[];
  bandwidths: Record<string, number>;
}

export function buildKdePlot(rows: CltRow[]): KdePlot {
  if (rows.length === 0) throw new SchemaError("clt csv has no rows");
  const [scenario, mode] = singleGroup(rows);
  const byN = new Map<number, CltRow[]>();
  for (const r of rows) {
    const bucket = byN.get(r.n) ?? [];
    bucket.push(r);
    byN.set(r.n, bucket);
  }
  const ns = [...byN.keys()].sort((a, b) => a - b);

  const span = rows.reduce(
    (acc, r) => Math.max(acc, Math.abs(r.stat_true_sigma), Math.abs(r.stat_hat_sigma)),
    3.5,
  );
  const lo = -Math.min(span, 8);
  const hi = Math.min(span, 8);
  const grid = linspace(lo, hi, 301);

  const curves: Array<{ n: number; kind: string; dens: number[] }> = [];
  const bandwidths: Record<string, number> = {};
  let peak = normalPdf(0);
  for (const n of ns) {
    const bucket = byN.get(n)!;
    for (const kind of ["stat_hat_sigma", "stat_true_sigma"] as const) {
      const samples = bucket.map((r) => r[kind]);
      if (samples.length < 2) throw new SchemaError(`n=${n} has fewer than 2 replications`);
      bandwidths[`n=${n}/${kind}`] = silvermanBandwidth(samples);
      const dens = kdeOnGrid(samples, grid);
      peak = Math.max(peak, ...dens);
      curves.push({ n, kind, dens });
    }
  }

  const f = DEFAULT_FRAME;
  const xs = linearScale(lo, hi, f.left, f.width - f.right);
  const ys = linearScale(0, peak * 1.08, f.height - f.bottom, f.top);
  const bwNote = Object.entries(bandwidths)
    .map(([k, v]) => `${k} bw=${v.toFixed(4)}`)
    .join("; ");
  const svg = new Svg(
    f,
    `${scenario} (${mode}): normalized CV-error statistic vs N(0,1)`,
    `silverman rule-of-thumb bandwidths: ${bwNote}`,
  );
  svg.axes(xs, ys, "normalized statistic", "density");

  // shaded standard-normal reference
  const base = ys(0);
  const ref: Array<[number, number]> = grid.map((x) => [xs(x), ys(normalPdf(x))]);
  svg.polygon([[xs(lo), base], ...ref, [xs(hi), base]], "#999", 0.3);

  curves.forEach((c) => {
    const color = SERIES_COLORS[ns.indexOf(c.n) % SERIES_COLORS.length];
    const solid = c.kind === "stat_hat_sigma";
    svg.path(
      grid.map((x, i) => [xs(x), ys(c.dens[i])]),
      color,
      solid ? 1.8 : 1.4,
      solid ? undefined : "6 4",
    );
  });
  ns.forEach((n, i) => {
    svg.text(f.width - f.right - 4, f.top + 16 + 16 * i, `n=${n}`, "end", 12,
      SERIES_COLORS[i % SERIES_COLORS.length]);
  });
  svg.text(f.left + 6, f.top + 16, "solid: within-fold sigma-hat; dashed: MC sigma", "start", 11, "#555");
  return { svg: svg.render(), scenario, mode, ns, bandwidths };
}
