/** Minimal deterministic SVG scene building: scales, axes, paths, bands. */

export interface Frame {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const DEFAULT_FRAME: Frame = {
  width: 720,
  height: 480,
  left: 70,
  right: 20,
  top: 40,
  bottom: 55,
};

export interface Scale {
  (v: number): number;
  ticks: number[];
  label: (v: number) => string;
}

function fmtTick(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a >= 1e4 || a < 1e-3)) return v.toExponential(0).replace("+", "");
  return `${Number(v.toPrecision(6))}`;
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  const f = ((v: number) => outLo + ((v - lo) / span) * (outHi - outLo)) as Scale;
  const step = niceStep(span / 6);
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step) {
    ticks.push(Number(t.toPrecision(12)));
  }
  f.ticks = ticks;
  f.label = fmtTick;
  return f;
}

export function log10Scale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (lo <= 0 || hi <= 0) throw new Error("log scale needs positive bounds");
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const span = lhi - llo || 1;
  const f = ((v: number) => outLo + ((Math.log10(v) - llo) / span) * (outHi - outLo)) as Scale;
  const ticks: number[] = [];
  for (let e = Math.ceil(llo - 1e-9); e <= Math.floor(lhi + 1e-9); e++) ticks.push(10 ** e);
  if (ticks.length < 2) ticks.push(lo, hi);
  f.ticks = ticks;
  f.label = (v) => {
    const e = Math.log10(v);
    return Number.isInteger(e) ? `1e${e}` : fmtTick(v);
  };
  return f;
}

function niceStep(raw: number): number {
  const mag = 10 ** Math.floor(Math.log10(raw));
  const r = raw / mag;
  return (r >= 5 ? 10 : r >= 2 ? 5 : r >= 1 ? 2 : 1) * mag;
}

const fmt = (x: number) => Number(x.toFixed(2)).toString();

export class Svg {
  private parts: string[] = [];

  constructor(readonly frame: Frame, title: string, comment?: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}">`,
    );
    if (comment) this.parts.push(`<!-- ${comment} -->`);
    this.parts.push(`<rect width="${frame.width}" height="${frame.height}" fill="white"/>`);
    this.text(frame.width / 2, 20, title, "middle", 15, "#222");
  }

  path(points: Array<[number, number]>, stroke: string, width = 1.6, dash?: string): void {
    if (points.length === 0) return;
    const d = points.map(([x, y], i) => `${i ? "L" : "M"}${fmt(x)} ${fmt(y)}`).join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(`<path d="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`);
  }

  polygon(points: Array<[number, number]>, fill: string, opacity = 0.25): void {
    const d = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(`<polygon points="${d}" fill="${fill}" fill-opacity="${opacity}" stroke="none"/>`);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  text(x: number, y: number, s: string, anchor = "start", size = 12, fill = "#333"): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" font-family="sans-serif" font-size="${size}" fill="${fill}">${escapeXml(s)}</text>`,
    );
  }

  axes(xs: Scale, ys: Scale, xLabel: string, yLabel: string): void {
    const f = this.frame;
    const x0 = f.left;
    const x1 = f.width - f.right;
    const y0 = f.height - f.bottom;
    const y1 = f.top;
    this.path([[x0, y0], [x1, y0]], "#333", 1);
    this.path([[x0, y0], [x0, y1]], "#333", 1);
    for (const t of xs.ticks) {
      const x = xs(t);
      if (x < x0 - 0.5 || x > x1 + 0.5) continue;
      this.path([[x, y0], [x, y0 + 5]], "#333", 1);
      this.path([[x, y0], [x, y1]], "#eee", 0.8);
      this.text(x, y0 + 18, xs.label(t), "middle", 11);
    }
    for (const t of ys.ticks) {
      const y = ys(t);
      if (y > y0 + 0.5 || y < y1 - 0.5) continue;
      this.path([[x0 - 5, y], [x0, y]], "#333", 1);
      this.path([[x0, y], [x1, y]], "#eee", 0.8);
      this.text(x0 - 8, y + 4, ys.label(t), "end", 11);
    }
    this.text((x0 + x1) / 2, f.height - 12, xLabel, "middle", 13);
    this.parts.push(
      `<text x="18" y="${fmt((y0 + y1) / 2)}" text-anchor="middle" font-family="sans-serif" font-size="13" fill="#333" transform="rotate(-90 18 ${fmt((y0 + y1) / 2)})">${escapeXml(yLabel)}</text>`,
    );
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
