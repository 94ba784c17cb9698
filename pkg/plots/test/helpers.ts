/** Deterministic standard normals for tests: mulberry32 driving Box-Muller. */

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function seededNormals(seed: number, count: number): number[] {
  const rand = mulberry32(seed);
  const out: number[] = [];
  while (out.length < count) {
    const u1 = 1 - rand(); // (0, 1]
    const u2 = rand();
    const r = Math.sqrt(-2 * Math.log(u1));
    out.push(r * Math.cos(2 * Math.PI * u2));
    if (out.length < count) out.push(r * Math.sin(2 * Math.PI * u2));
  }
  return out;
}

export function ratesCsv(rows: Array<Record<string, string | number>>): string {
  const cols = [
    "scenario", "mode", "n", "sigma2", "sigma2_se", "gamma", "gamma_se",
    "r", "r_se", "slope_sigma2", "slope_gamma", "slope_r",
  ];
  const lines = [cols.join(",")];
  for (const r of rows) lines.push(cols.map((c) => `${r[c]}`).join(","));
  return lines.join("\n") + "\n";
}

/** Exact power-law rates: sigma2 ~ n^0, gamma ~ n^-2, r ~ n^-1. */
export function syntheticRates(scenario = "st-fixed", mode = "single"): string {
  const rows = [90, 900, 9000].map((n) => ({
    scenario,
    mode,
    n,
    sigma2: 20000,
    sigma2_se: 100,
    gamma: 5e5 / (n * n),
    gamma_se: 5e3 / (n * n),
    r: 40 / n,
    r_se: 0.4 / n,
    slope_sigma2: 0,
    slope_gamma: -2,
    slope_r: -1,
  }));
  return ratesCsv(rows);
}

export function cltCsv(
  samples: Array<{ n: number; t: number; h: number }>,
  scenario = "st-fixed",
  mode = "single",
): string {
  const lines = ["scenario,mode,n,rep,stat_true_sigma,stat_hat_sigma"];
  samples.forEach((s, i) => lines.push(`${scenario},${mode},${s.n},${i},${s.t},${s.h}`));
  return lines.join("\n") + "\n";
}
