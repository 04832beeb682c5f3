/**
 * Figure definitions: one per fracwave CLI experiment table.
 *
 * Each figure names the CLI subcommand whose run directory it consumes and
 * the CSV it expects there. Statistics (medians, fitted exponents, band
 * widths, drift) are taken from the run's manifest, never recomputed; the
 * CSV supplies only the raw points being drawn.
 */

import { CsvTable, numericColumn } from "./csv";
import {
  SvgChart,
  linearScale,
  logScale,
  linearTicks,
  logTicks,
  padDomain,
  formatTick,
} from "./svg";

export interface Manifest {
  schema_version: number;
  command: string;
  outputs: string[];
  config: { [key: string]: unknown };
  [key: string]: unknown;
}

export interface FigureSpec {
  /** Figure id; also the output file stem (<name>.svg). */
  name: string;
  /** CLI subcommand whose run directory supplies the inputs. */
  command: string;
  /** CSV file the figure consumes. */
  table: string;
  build(table: CsvTable, manifest: Manifest): string;
}

const WIDTH = 560;
const HEIGHT = 400;
const MARGIN = { top: 40, right: 30, bottom: 48, left: 64 };

function frame(x: ReturnType<typeof linearScale>,
               y: ReturnType<typeof linearScale>) {
  return { width: WIDTH, height: HEIGHT, margin: MARGIN, x, y };
}

function makeX(values: number[], log: boolean) {
  const [lo, hi] = padDomain(Math.min(...values), Math.max(...values), 0.06, log);
  const range: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
  return log ? logScale([lo, hi], range) : linearScale([lo, hi], range);
}

function makeY(values: number[], log: boolean) {
  const [lo, hi] = padDomain(Math.min(...values), Math.max(...values), 0.08, log);
  const range: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];
  return log ? logScale([lo, hi], range) : linearScale([lo, hi], range);
}

function annotate(chart: SvgChart, lines: string[]): void {
  let y = MARGIN.top + 14;
  for (const line of lines) {
    chart.raw(`<text x="${MARGIN.left + 10}" y="${y}" font-size="10" ` +
              `font-family="Helvetica, Arial, sans-serif">${line}</text>`);
    y += 14;
  }
}

/** log Z_N ladder: mean with +-1 standard-error bars against the cutoff. */
const gibbsZ: FigureSpec = {
  name: "gibbs-z",
  command: "gibbs-z",
  table: "gibbs_z.csv",
  build(table, manifest) {
    const ns = numericColumn(table, "n");
    const means = numericColumn(table, "mean");
    const errs = numericColumn(table, "stderr");
    const lo = Math.min(...means.map((m, i) => m - errs[i]));
    const hi = Math.max(...means.map((m, i) => m + errs[i]));
    const x = makeX(ns, true);
    const y = makeY([lo, hi], false);
    const chart = new SvgChart(frame(x, y));
    chart.title("Log-partition ladder (importance sampled)");
    chart.axes("cutoff N", "log Z_N", ns, linearTicks(y.domain[0], y.domain[1]));
    chart.errorBars(ns, means, errs, "#1f77b4");
    chart.polyline(ns, means, "#1f77b4", 1.0, "4 3");
    chart.points(ns, means, "#1f77b4");
    const band = manifest["band_width"] as number;
    const pooled = manifest["pooled_stderr"] as number;
    const bounded = manifest["bounded_band"] as boolean;
    annotate(chart, [
      `band width ${formatTick(band)} vs 5 x pooled se ${formatTick(5 * pooled)}`,
      `bounded band: ${bounded}`,
    ]);
    return chart.render();
  },
};

/** Closed-form drift bound growth on log-log axes with the claimed slope. */
const counterexample: FigureSpec = {
  name: "counterexample",
  command: "counterexample",
  table: "counterexample.csv",
  build(table, manifest) {
    const ns = numericColumn(table, "n");
    const bounds = numericColumn(table, "mean").map(Math.abs);
    const claimed = manifest["claimed_exponent"] as number;
    const fitted = manifest["fitted_exponent"] as number;
    const ref = ns.map((n) => bounds[0] * Math.pow(n / ns[0], claimed));
    const x = makeX(ns, true);
    const y = makeY([...bounds, ...ref], true);
    const chart = new SvgChart(frame(x, y));
    chart.title("Drift-bound growth of |log Z_N|");
    chart.axes("cutoff N", "|closed-form bound|", ns,
               logTicks(y.domain[0], y.domain[1]));
    chart.polyline(ns, ref, "#999999", 1.2, "6 4");
    chart.polyline(ns, bounds, "#d62728", 1.5);
    chart.points(ns, bounds, "#d62728");
    chart.legend([
      { label: `bound (fitted slope ${fitted.toFixed(3)})`, color: "#d62728" },
      { label: `reference slope ${claimed.toFixed(3)}`, color: "#999999",
        dash: "6 4" },
    ]);
    return chart.render();
  },
};

/** Pathwise dynamics gap: per-seed spaghetti with the median overlaid. */
const convergeDynamics: FigureSpec = {
  name: "converge-dynamics",
  command: "converge-dynamics",
  table: "dynamics_gap.csv",
  build(table, manifest) {
    const ns = numericColumn(table, "n");
    const sups = numericColumn(table, "mean");
    const seeds = numericColumn(table, "seed");
    const medians = manifest["medians"] as { [n: string]: number };
    const medNs = Object.keys(medians).map(Number).sort((a, b) => a - b);
    const medVals = medNs.map((n) => medians[String(n)]);
    const x = makeX(ns, true);
    const y = makeY([...sups, ...medVals], true);
    const chart = new SvgChart(frame(x, y));
    chart.title("Dynamics convergence: sup-norm gap to reference cutoff");
    chart.axes("cutoff N", "sup_t H-sigma gap", medNs,
               logTicks(y.domain[0], y.domain[1]));
    for (const seed of [...new Set(seeds)].sort((a, b) => a - b)) {
      const pairs = ns
        .map((n, i) => ({ n, v: sups[i], s: seeds[i] }))
        .filter((p) => p.s === seed)
        .sort((a, b) => a.n - b.n);
      chart.polyline(pairs.map((p) => p.n), pairs.map((p) => p.v),
                     "#bbbbbb", 0.8);
    }
    chart.polyline(medNs, medVals, "#2ca02c", 2.0);
    chart.points(medNs, medVals, "#2ca02c");
    chart.legend([
      { label: "median over seeds", color: "#2ca02c" },
      { label: "individual seeds", color: "#bbbbbb" },
    ]);
    annotate(chart, [
      `strictly decreasing: ${manifest["strictly_decreasing"]}`,
    ]);
    return chart.render();
  },
};

/** Single-trajectory Sobolev norm with the recorded energy drift. */
const evolve: FigureSpec = {
  name: "evolve",
  command: "evolve",
  table: "trajectory.csv",
  build(table, manifest) {
    const ts = numericColumn(table, "t");
    const norms = numericColumn(table, "h_sigma_norm");
    const l2 = numericColumn(table, "l2_sobolev_norm");
    const x = makeX(ts, false);
    const y = makeY([...norms, ...l2], false);
    const chart = new SvgChart(frame(x, y));
    chart.title("Trajectory norms under the splitting flow");
    chart.axes("t", "norm", linearTicks(x.domain[0], x.domain[1]),
               linearTicks(y.domain[0], y.domain[1]));
    chart.polyline(ts, norms, "#1f77b4", 1.5);
    chart.polyline(ts, l2, "#ff7f0e", 1.5);
    chart.legend([
      { label: "H-sigma norm", color: "#1f77b4" },
      { label: "L2 norm", color: "#ff7f0e" },
    ]);
    const drift = manifest["energy_drift_rel"] as number;
    annotate(chart, [`relative energy drift ${drift.toExponential(2)}`]);
    return chart.render();
  },
};

export const FIGURES: FigureSpec[] = [
  gibbsZ,
  counterexample,
  convergeDynamics,
  evolve,
];

export function figureByName(name: string): FigureSpec {
  const spec = FIGURES.find((f) => f.name === name);
  if (!spec) {
    const known = FIGURES.map((f) => f.name).join(", ");
    throw new Error(`unknown figure '${name}' (known: ${known})`);
  }
  return spec;
}
