/** Gaussian kernel density estimation with Silverman's rule-of-thumb bandwidth. */

const SQRT_2PI = Math.sqrt(2 * Math.PI);

export function normalPdf(x: number): number {
  return Math.exp(-0.5 * x * x) / SQRT_2PI;
}

function quantileSorted(sorted: number[], q: number): number {
  const pos = q * (sorted.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}

export function silvermanBandwidth(samples: number[]): number {
  const m = samples.length;
  if (m < 2) throw new Error("bandwidth needs at least 2 samples");
  const mean = samples.reduce((a, b) => a + b, 0) / m;
  const sd = Math.sqrt(samples.reduce((a, b) => a + (b - mean) ** 2, 0) / (m - 1));
  const sorted = [...samples].sort((a, b) => a - b);
  const iqr = quantileSorted(sorted, 0.75) - quantileSorted(sorted, 0.25);
  const spread = iqr > 0 ? Math.min(sd, iqr / 1.34) : sd;
  if (spread <= 0) throw new Error("degenerate sample: zero spread");
  return 0.9 * spread * Math.pow(m, -0.2);
}

/** Density estimate evaluated on a grid; O(samples * grid). */
export function kdeOnGrid(samples: number[], grid: number[], bandwidth?: number): number[] {
  const h = bandwidth ?? silvermanBandwidth(samples);
  const m = samples.length;
  return grid.map((x) => {
    let s = 0;
    for (let i = 0; i < m; i++) s += normalPdf((x - samples[i]) / h);
    return s / (m * h);
  });
}

export function linspace(lo: number, hi: number, count: number): number[] {
  const out = new Array<number>(count);
  for (let i = 0; i < count; i++) out[i] = lo + ((hi - lo) * i) / (count - 1);
  return out;
}

/** sup over the grid of |kde - standard normal pdf|. */
export function supDistanceToNormal(samples: number[], gridPoints = 401): number {
  const grid = linspace(-5, 5, gridPoints);
  const dens = kdeOnGrid(samples, grid);
  let worst = 0;
  for (let i = 0; i < grid.length; i++) {
    worst = Math.max(worst, Math.abs(dens[i] - normalPdf(grid[i])));
  }
  return worst;
}
