/**
 * Deterministic SVG chart primitives.
 *
 * Everything is plain string assembly: no timestamps, no random ids, so a
 * rendered figure is byte-identical across runs on the same inputs.
 */

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
  log: boolean;
}

export function linearScale(domain: [number, number],
                            range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  f.log = false;
  return f;
}

export function logScale(domain: [number, number],
                         range: [number, number]): Scale {
  if (domain[0] <= 0 || domain[1] <= 0) {
    throw new Error("log scale requires a positive domain");
  }
  const inner = linearScale([Math.log10(domain[0]), Math.log10(domain[1])],
                            range);
  const f = ((v: number) => inner(Math.log10(v))) as Scale;
  f.domain = domain;
  f.range = range;
  f.log = true;
  return f;
}

/** Round-number ticks covering [lo, hi], about `count` of them. */
export function linearTicks(lo: number, hi: number, count = 5): number[] {
  if (lo === hi) return [lo];
  const rawStep = (hi - lo) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const out: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    out.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return out;
}

/** Decade ticks (1eK) inside [lo, hi]; falls back to endpoints if none. */
export function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let k = Math.ceil(Math.log10(lo) - 1e-9);
       k <= Math.floor(Math.log10(hi) + 1e-9); k++) {
    out.push(Math.pow(10, k));
  }
  return out.length >= 2 ? out : [lo, hi];
}

export function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0).replace("+", "");
  return String(parseFloat(v.toPrecision(6)));
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

const FONT = 'font-family="Helvetica, Arial, sans-serif"';

export interface ChartFrame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
  x: Scale;
  y: Scale;
}

export class SvgChart {
  private parts: string[] = [];
  readonly frame: ChartFrame;

  constructor(frame: ChartFrame) {
    this.frame = frame;
  }

  raw(s: string): void {
    this.parts.push(s);
  }

  title(text: string): void {
    const { width, margin } = this.frame;
    this.parts.push(
      `<text x="${(margin.left + width - margin.right) / 2}" y="${margin.top - 10}" ` +
      `text-anchor="middle" font-size="13" ${FONT}>${esc(text)}</text>`);
  }

  axes(xLabel: string, yLabel: string, xTicks: number[],
       yTicks: number[]): void {
    const { width, height, margin, x, y } = this.frame;
    const x0 = margin.left;
    const x1 = width - margin.right;
    const y0 = height - margin.bottom;
    const y1 = margin.top;
    const p = this.parts;
    p.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`);
    p.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`);
    for (const t of xTicks) {
      const px = x(t).toFixed(2);
      p.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="black"/>`);
      p.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y1}" stroke="#dddddd"/>`);
      p.push(`<text x="${px}" y="${y0 + 18}" text-anchor="middle" ` +
             `font-size="10" ${FONT}>${formatTick(t)}</text>`);
    }
    for (const t of yTicks) {
      const py = y(t).toFixed(2);
      p.push(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`);
      p.push(`<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="#dddddd"/>`);
      p.push(`<text x="${x0 - 8}" y="${py}" text-anchor="end" dy="0.32em" ` +
             `font-size="10" ${FONT}>${formatTick(t)}</text>`);
    }
    p.push(`<text x="${(x0 + x1) / 2}" y="${height - 6}" text-anchor="middle" ` +
           `font-size="11" ${FONT}>${esc(xLabel)}</text>`);
    p.push(`<text x="14" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
           `font-size="11" ${FONT} transform="rotate(-90 14 ${(y0 + y1) / 2})">` +
           `${esc(yLabel)}</text>`);
  }

  polyline(xs: number[], ys: number[], stroke: string, width = 1.5,
           dash = ""): void {
    const { x, y } = this.frame;
    const pts = xs.map((v, i) => `${x(v).toFixed(2)},${y(ys[i]).toFixed(2)}`)
      .join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(`<polyline points="${pts}" fill="none" stroke="${stroke}" ` +
                    `stroke-width="${width}"${dashAttr}/>`);
  }

  points(xs: number[], ys: number[], fill: string, r = 3): void {
    const { x, y } = this.frame;
    for (let i = 0; i < xs.length; i++) {
      this.parts.push(`<circle cx="${x(xs[i]).toFixed(2)}" ` +
                      `cy="${y(ys[i]).toFixed(2)}" r="${r}" fill="${fill}"/>`);
    }
  }

  errorBars(xs: number[], ys: number[], errs: number[], stroke: string): void {
    const { x, y } = this.frame;
    for (let i = 0; i < xs.length; i++) {
      const px = x(xs[i]).toFixed(2);
      const lo = y(ys[i] - errs[i]).toFixed(2);
      const hi = y(ys[i] + errs[i]).toFixed(2);
      this.parts.push(`<line x1="${px}" y1="${lo}" x2="${px}" y2="${hi}" ` +
                      `stroke="${stroke}" stroke-width="1.5"/>`);
      for (const py of [lo, hi]) {
        this.parts.push(`<line x1="${Number(px) - 4}" y1="${py}" ` +
                        `x2="${Number(px) + 4}" y2="${py}" stroke="${stroke}" ` +
                        `stroke-width="1.5"/>`);
      }
    }
  }

  legend(entries: Array<{ label: string; color: string; dash?: string }>): void {
    const { width, margin } = this.frame;
    const x0 = width - margin.right - 170;
    let y0 = margin.top + 12;
    for (const e of entries) {
      const dashAttr = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
      this.parts.push(`<line x1="${x0}" y1="${y0 - 4}" x2="${x0 + 24}" ` +
                      `y2="${y0 - 4}" stroke="${e.color}" stroke-width="2"${dashAttr}/>`);
      this.parts.push(`<text x="${x0 + 30}" y="${y0}" font-size="10" ${FONT}>` +
                      `${esc(e.label)}</text>`);
      y0 += 16;
    }
  }

  render(): string {
    const { width, height } = this.frame;
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
      `height="${height}" viewBox="0 0 ${width} ${height}">`,
      `<rect width="${width}" height="${height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
      "",
    ].join("\n");
  }
}

export function padDomain(lo: number, hi: number, frac = 0.06,
                          log = false): [number, number] {
  if (log) {
    const pad = Math.pow(hi / lo, frac);
    return [lo / pad, hi * pad];
  }
  const pad = (hi - lo || Math.abs(hi) || 1) * frac;
  return [lo - pad, hi + pad];
}
