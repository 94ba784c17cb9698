import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { main } from "../src/cli.js";
import { cltCsv, seededNormals, syntheticRates } from "./helpers.js";

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "cvstab-plots-"));
}

describe("cli", () => {
  it("renders a rates svg deterministically", () => {
    const dir = tmp();
    const input = join(dir, "rates.csv");
    writeFileSync(input, syntheticRates());
    const out1 = join(dir, "a.svg");
    const out2 = join(dir, "b.svg");
    expect(main(["rates", "--in", input, "--out", out1])).toBe(0);
    expect(main(["rates", "--in", input, "--out", out2, "--ref-slopes", "0,-2,-1"])).toBe(0);
    expect(readFileSync(out1, "utf-8")).toContain("</svg>");
    // re-running with identical args reproduces identical bytes
    const out3 = join(dir, "c.svg");
    expect(main(["rates", "--in", input, "--out", out3])).toBe(0);
    expect(readFileSync(out3)).toEqual(readFileSync(out1));
  });

  it("renders a kde svg", () => {
    const dir = tmp();
    const input = join(dir, "clt.csv");
    const z = seededNormals(5, 500);
    writeFileSync(input, cltCsv(z.map((v) => ({ n: 900, t: v, h: v }))));
    const out = join(dir, "kde.svg");
    expect(main(["kde", "--in", input, "--out", out])).toBe(0);
    expect(readFileSync(out, "utf-8")).toContain("</svg>");
  });

  it("exits nonzero with a column diagnostic on schema mismatch", () => {
    const dir = tmp();
    const input = join(dir, "bad.csv");
    writeFileSync(input, syntheticRates().replace("slope_r", "slope_rho"));
    expect(main(["rates", "--in", input, "--out", join(dir, "x.svg")])).toBe(1);
  });

  it("exits nonzero on an empty csv", () => {
    const dir = tmp();
    const input = join(dir, "empty.csv");
    writeFileSync(input, "");
    expect(main(["rates", "--in", input, "--out", join(dir, "x.svg")])).toBe(1);
    expect(main(["kde", "--in", input, "--out", join(dir, "x.svg")])).toBe(1);
  });

  it("exits 2 on usage errors", () => {
    expect(main(["bogus"])).toBe(2);
    expect(main(["rates", "--in", "only-in.csv"])).toBe(2);
    expect(main(["rates", "--in", "a.csv", "--out", "b.svg", "--wat", "1"])).toBe(2);
  });
});
