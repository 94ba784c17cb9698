#!/usr/bin/env node
/** cvstab-plot: render experiment CSVs to SVG.
 *
 *   cvstab-plot rates --in rates.csv --out rates.svg [--ref-slopes 0,-2,-1] [--normalize-at 900]
 *   cvstab-plot kde   --in clt.csv   --out clt.svg
 */

import { readFileSync, writeFileSync } from "node:fs";
import { SchemaError, readCltCsv, readRatesCsv } from "./csv.js";
import { buildKdePlot } from "./kdeplot.js";
import { buildRatesPlot } from "./rates.js";

interface Args {
  kind: string;
  input: string;
  output: string;
  refSlopes?: number[];
  normalizeAt?: number;
}

function usage(): string {
  return "usage: cvstab-plot rates|kde --in <csv> --out <svg> [--ref-slopes s1,s2,s3] [--normalize-at n]";
}

function parseArgs(argv: string[]): Args {
  const [kind, ...rest] = argv;
  if (kind !== "rates" && kind !== "kde") throw new UsageError(`unknown plot kind ${JSON.stringify(kind)}`);
  const args: Partial<Args> = { kind };
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) throw new UsageError(`flag ${flag} needs a value`);
    switch (flag) {
      case "--in":
        args.input = value;
        break;
      case "--out":
        args.output = value;
        break;
      case "--ref-slopes":
        args.refSlopes = value.split(",").map((s) => {
          const x = Number(s);
          if (!Number.isFinite(x)) throw new UsageError(`bad reference slope ${JSON.stringify(s)}`);
          return x;
        });
        break;
      case "--normalize-at":
        args.normalizeAt = Number(value);
        if (!Number.isFinite(args.normalizeAt)) throw new UsageError(`bad --normalize-at ${value}`);
        break;
      default:
        throw new UsageError(`unknown flag ${flag}`);
    }
  }
  if (!args.input || !args.output) throw new UsageError("--in and --out are required");
  return args as Args;
}

class UsageError extends Error {}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (e) {
    console.error(`error: ${(e as Error).message}\n${usage()}`);
    return 2;
  }
  try {
    const text = readFileSync(args.input, "utf-8");
    const svg =
      args.kind === "rates"
        ? buildRatesPlot(readRatesCsv(text), {
            refSlopes: args.refSlopes,
            normalizeAt: args.normalizeAt,
          }).svg
        : buildKdePlot(readCltCsv(text)).svg;
    writeFileSync(args.output, svg, "utf-8");
    console.log(`wrote ${args.output}`);
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`schema error: ${e.message}`);
    } else {
      console.error(`error: ${(e as Error).message}`);
    }
    return 1;
  }
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
