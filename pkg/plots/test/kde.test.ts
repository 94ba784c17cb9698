import { describe, expect, it } from "vitest";
import { kdeOnGrid, linspace, normalPdf, silvermanBandwidth, supDistanceToNormal } from "../src/kde.js";
import { seededNormals } from "./helpers.js";

describe("kde", () => {
  it("stays within 0.05 sup-distance of the normal density on 50k true samples", () => {
    const samples = seededNormals(20240, 50_000);
    const d = supDistanceToNormal(samples);
    expect(d).toBeLessThan(0.05);
  });

  it("integrates to one", () => {
    const samples = seededNormals(7, 5000);
    const grid = linspace(-8, 8, 1601);
    const dens = kdeOnGrid(samples, grid);
    const dx = grid[1] - grid[0];
    const mass = dens.reduce((a, b) => a + b, 0) * dx;
    expect(mass).toBeCloseTo(1.0, 2);
  });

  it("silverman bandwidth shrinks like m^(-1/5)", () => {
    const small = silvermanBandwidth(seededNormals(1, 1000));
    const large = silvermanBandwidth(seededNormals(1, 100_000));
    expect(large).toBeLessThan(small);
    const ratio = small / large;
    expect(ratio).toBeGreaterThan(1.8); // (100)^(1/5) = 2.51 up to spread noise
    expect(ratio).toBeLessThan(3.2);
  });

  it("detects a variance-inflated sample", () => {
    const wide = seededNormals(3, 20_000).map((z) => 2.0 * z);
    expect(supDistanceToNormal(wide)).toBeGreaterThan(0.15);
  });

  it("normal pdf peak", () => {
    expect(normalPdf(0)).toBeCloseTo(0.3989422804014327, 12);
  });
});
