/** Minimal SVG assembly: scales, ticks, colormaps, document building. */

export interface Scale {
  (x: number): number;
  ticks(): number[];
  tickLabel(x: number): string;
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  const fn = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  fn.ticks = () => niceTicks(d0, d1, 6);
  fn.tickLabel = (x: number) => formatTick(x);
  return fn;
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
  if (d0 <= 0 || d1 <= 0) {
    throw new Error(`log scale requires positive bounds, got [${d0}, ${d1}]`);
  }
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const span = l1 - l0 || 1;
  const fn = ((x: number) => r0 + ((Math.log10(x) - l0) / span) * (r1 - r0)) as Scale;
  fn.ticks = () => {
    const ticks: number[] = [];
    for (let p = Math.ceil(l0 - 1e-9); p <= Math.floor(l1 + 1e-9); p++) {
      ticks.push(10 ** p);
    }
    return ticks.length >= 2 ? ticks : [d0, d1];
  };
  fn.tickLabel = (x: number) => formatTick(x);
  return fn;
}

export function niceTicks(lo: number, hi: number, n: number): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / n;
  const mag = 10 ** Math.floor(Math.log10(rawStep));
  const norm = rawStep / mag;
  const step = (norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10) * mag;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return ticks;
}

export function formatTick(x: number): string {
  if (x === 0) return "0";
  const ax = Math.abs(x);
  if (ax >= 1e4 || ax < 1e-3) return x.toExponential(0);
  return String(Number(x.toPrecision(4)));
}

/** Diverging blue-white-red map on [-1, 1] (order parameters centered at 0). */
export function divergingColor(v: number): string {
  const t = Math.max(-1, Math.min(1, v));
  const stop = (a: number[], b: number[], u: number) =>
    a.map((c, i) => Math.round(c + (b[i] - c) * u));
  const blue = [33, 102, 172];
  const white = [247, 247, 247];
  const red = [178, 24, 43];
  const rgb = t < 0 ? stop(white, blue, -t) : stop(white, red, t);
  return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}

/** Sequential dark-to-bright map on [0, 1] (rates, entropies). */
export function sequentialColor(v: number): string {
  const t = Math.max(0, Math.min(1, v));
  const stops = [
    [68, 1, 84],
    [59, 82, 139],
    [33, 145, 140],
    [94, 201, 98],
    [253, 231, 37],
  ];
  const pos = t * (stops.length - 1);
  const i = Math.min(stops.length - 2, Math.floor(pos));
  const u = pos - i;
  const rgb = stops[i].map((c, k) => Math.round(c + (stops[i + 1][k] - c) * u));
  return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const DEFAULT_MARGIN: Margin = { top: 36, right: 24, bottom: 46, left: 60 };

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export class SvgDoc {
  readonly width: number;
  readonly height: number;
  private parts: string[] = [];

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
  }

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.add(
      `<rect x="${r2(x)}" y="${r2(y)}" width="${r2(w)}" height="${r2(h)}" fill="${fill}"/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5,
           dash?: string): void {
    const attr = dash ? ` stroke-dasharray="${dash}"` : "";
    const pts = points.map(([x, y]) => `${r2(x)},${r2(y)}`).join(" ");
    this.add(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"${attr}/>`,
    );
  }

  text(x: number, y: number, content: string, anchor = "middle", size = 12,
       rotate = 0): void {
    const transform = rotate ? ` transform="rotate(${rotate} ${r2(x)} ${r2(y)})"` : "";
    this.add(
      `<text x="${r2(x)}" y="${r2(y)}" text-anchor="${anchor}" ` +
        `font-family="sans-serif" font-size="${size}"${transform}>${esc(content)}</text>`,
    );
  }

  axes(xScale: Scale, yScale: Scale, margin: Margin, xLabel: string,
       yLabel: string): void {
    const x0 = margin.left;
    const x1 = this.width - margin.right;
    const y0 = this.height - margin.bottom;
    const y1 = margin.top;
    this.polyline([[x0, y0], [x1, y0]], "#000", 1);
    this.polyline([[x0, y0], [x0, y1]], "#000", 1);
    for (const t of xScale.ticks()) {
      const px = xScale(t);
      if (px < x0 - 0.5 || px > x1 + 0.5) continue;
      this.polyline([[px, y0], [px, y0 + 4]], "#000", 1);
      this.text(px, y0 + 17, xScale.tickLabel(t));
    }
    for (const t of yScale.ticks()) {
      const py = yScale(t);
      if (py > y0 + 0.5 || py < y1 - 0.5) continue;
      this.polyline([[x0 - 4, py], [x0, py]], "#000", 1);
      this.text(x0 - 8, py + 4, yScale.tickLabel(t), "end");
    }
    this.text((x0 + x1) / 2, this.height - 10, xLabel);
    this.text(16, (y0 + y1) / 2, yLabel, "middle", 12, -90);
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

function r2(x: number): string {
  return (Math.round(x * 100) / 100).toString();
}
