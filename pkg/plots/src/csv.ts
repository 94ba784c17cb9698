/** Strict readers for the experiment CSVs (no quoting, fixed schemas). */

export class SchemaError extends Error {}

export const RATES_COLUMNS = [
  "scenario", "mode", "n", "sigma2", "sigma2_se", "gamma", "gamma_se",
  "r", "r_se", "slope_sigma2", "slope_gamma", "slope_r",
] as const;

export const CLT_COLUMNS = [
  "scenario", "mode", "n", "rep", "stat_true_sigma", "stat_hat_sigma",
] as const;

export interface RatesRow {
  scenario: string;
  mode: string;
  n: number;
  sigma2: number;
  sigma2_se: number;
  gamma: number;
  gamma_se: number;
  r: number;
  r_se: number;
  slope_sigma2: number;
  slope_gamma: number;
  slope_r: number;
}

export interface CltRow {
  scenario: string;
  mode: string;
  n: number;
  rep: number;
  stat_true_sigma: number;
  stat_hat_sigma: number;
}

function splitCsv(text: string): string[][] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  return lines.map((l) => l.split(","));
}

function checkHeader(got: string[], want: readonly string[], kind: string): void {
  if (got.length !== want.length || got.some((c, i) => c !== want[i])) {
    const missing = want.filter((c) => !got.includes(c));
    const extra = got.filter((c) => !(want as readonly string[]).includes(c));
    const parts = [`${kind} csv header mismatch`];
    if (missing.length) parts.push(`missing column(s): ${missing.join(", ")}`);
    if (extra.length) parts.push(`unexpected column(s): ${extra.join(", ")}`);
    if (!missing.length && !extra.length) parts.push(`column order must be: ${want.join(",")}`);
    throw new SchemaError(parts.join("; "));
  }
}

function num(v: string, col: string, line: number): number {
  const x = Number(v);
  if (!Number.isFinite(x)) {
    throw new SchemaError(`line ${line}: column ${col} is not a finite number (got ${JSON.stringify(v)})`);
  }
  return x;
}

export function readRatesCsv(text: string): RatesRow[] {
  const cells = splitCsv(text);
  if (cells.length === 0) throw new SchemaError("rates csv is empty");
  checkHeader(cells[0], RATES_COLUMNS, "rates");
  if (cells.length === 1) throw new SchemaError("rates csv has a header but no rows");
  return cells.slice(1).map((row, i) => {
    if (row.length !== RATES_COLUMNS.length) {
      throw new SchemaError(`line ${i + 2}: expected ${RATES_COLUMNS.length} fields, got ${row.length}`);
    }
    return {
      scenario: row[0],
      mode: row[1],
      n: num(row[2], "n", i + 2),
      sigma2: num(row[3], "sigma2", i + 2),
      sigma2_se: num(row[4], "sigma2_se", i + 2),
      gamma: num(row[5], "gamma", i + 2),
      gamma_se: num(row[6], "gamma_se", i + 2),
      r: num(row[7], "r", i + 2),
      r_se: num(row[8], "r_se", i + 2),
      slope_sigma2: num(row[9], "slope_sigma2", i + 2),
      slope_gamma: num(row[10], "slope_gamma", i + 2),
      slope_r: num(row[11], "slope_r", i + 2),
    };
  });
}

export function readCltCsv(text: string): CltRow[] {
  const cells = splitCsv(text);
  if (cells.length === 0) throw new SchemaError("clt csv is empty");
  checkHeader(cells[0], CLT_COLUMNS, "clt");
  if (cells.length === 1) throw new SchemaError("clt csv has a header but no rows");
  return cells.slice(1).map((row, i) => {
    if (row.length !== CLT_COLUMNS.length) {
      throw new SchemaError(`line ${i + 2}: expected ${CLT_COLUMNS.length} fields, got ${row.length}`);
    }
    return {
      scenario: row[0],
      mode: row[1],
      n: num(row[2], "n", i + 2),
      rep: num(row[3], "rep", i + 2),
      stat_true_sigma: num(row[4], "stat_true_sigma", i + 2),
      stat_hat_sigma: num(row[5], "stat_hat_sigma", i + 2),
    };
  });
}

/** The rows must describe a single experiment; returns its (scenario, mode). */
export function singleGroup(rows: { scenario: string; mode: string }[]): [string, string] {
  const keys = new Set(rows.map((r) => `${r.scenario}/${r.mode}`));
  if (keys.size !== 1) {
    throw new SchemaError(
      `expected one (scenario, mode) per file, found: ${[...keys].sort().join(", ")}`,
    );
  }
  const [scenario, mode] = [...keys][0].split("/");
  return [scenario, mode];
}
