import { describe, expect, it } from "vitest";
import { SchemaError, readCltCsv, readRatesCsv, singleGroup } from "../src/csv.js";
import { cltCsv, syntheticRates } from "./helpers.js";

describe("csv readers", () => {
  it("parses a well-formed rates csv", () => {
    const rows = readRatesCsv(syntheticRates());
    expect(rows).toHaveLength(3);
    expect(rows[0].n).toBe(90);
    expect(rows[2].slope_gamma).toBe(-2);
  });

  it("rejects empty input", () => {
    expect(() => readRatesCsv("")).toThrow(SchemaError);
    expect(() => readRatesCsv("")).toThrow(/empty/);
  });

  it("rejects a header-only file", () => {
    const header = syntheticRates().split("\n")[0];
    expect(() => readRatesCsv(header + "\n")).toThrow(/no rows/);
  });

  it("names missing columns in the diagnostic", () => {
    const broken = syntheticRates().replace("gamma_se", "gamma_std");
    expect(() => readRatesCsv(broken)).toThrow(/missing column\(s\): gamma_se/);
  });

  it("rejects non-numeric cells with location info", () => {
    const bad = syntheticRates().replace("20000", "oops");
    expect(() => readRatesCsv(bad)).toThrow(/line 2.*sigma2/);
  });

  it("parses clt csvs and enforces one experiment per file", () => {
    const rows = readCltCsv(cltCsv([{ n: 900, t: 0.1, h: 0.2 }, { n: 900, t: -1, h: -1.1 }]));
    expect(rows).toHaveLength(2);
    expect(singleGroup(rows)).toEqual(["st-fixed", "single"]);
    const mixed = rows.map((r, i) => ({ ...r, mode: i ? "comparison" : "single" }));
    expect(() => singleGroup(mixed)).toThrow(/one \(scenario, mode\)/);
  });
});
