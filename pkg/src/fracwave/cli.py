"""Reproducible experiment runner.

Every subcommand resolves one JSON config (file via --config plus flag
overrides), validates it against a schema, runs the experiment, and writes
into the output directory a manifest.json (resolved config, versions, wall
time, constant-table digests) plus one or more CSV tables sharing the
column prefix

    alpha, n, p, estimator, mean, stderr, n_samples, seed, ess, table_digest

Exit codes: 0 success, 2 config/validation failure, 3 degenerate statistics.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

from . import __version__
from .errors import (
    DegenerateWeights,
    FracwaveError,
    NotCritical,
    NotPositive,
    PositivityHolds,
)
from .analysis import (
    convolution_sum_oracle,
    dispersive_kernel_sup,
    kernel_decay_constants,
    truncated_interaction_rate,
)
from .dynamics import (
    EvolutionConfig,
    convergence_experiment,
    energy,
    evolve,
    invariance_diagnostic,
    sample_pair_state,
)
from .gibbs import (
    counterexample_growth,
    density_gap_mc,
    log_partition_mc,
)
from .lattice import Lattice, sobolev_norm_coeffs
from .renorm import (
    PRESETS,
    PotentialSpec,
    make_table,
    tune_gibbs_quadratic,
    validate_potential,
)
from .sampling import SeededStream
from .variational import DriftProfile, default_drift_band, minimize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3

MANIFEST_SCHEMA_VERSION = 1

CSV_PREFIX = ["alpha", "n", "p", "estimator", "mean", "stderr",
              "n_samples", "seed", "ess", "table_digest"]

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "alpha": {"type": "number", "exclusiveMinimum": 0.5,
                  "exclusiveMaximum": 1.0},
        "potential": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "preset": {"type": "string",
                           "enum": sorted(PRESETS) + ["gibbs_quartic"]},
                "degree": {"type": "integer", "minimum": 4},
                "coeffs": {"type": "array", "items": {"type": "number"}},
            },
        },
        "n": {"type": "integer", "minimum": 1},
        "n_ladder": {"type": "array", "minItems": 1,
                     "items": {"type": "integer", "minimum": 1}},
        "seeds": {"type": "array", "minItems": 1,
                  "items": {"type": "integer"}},
        "p": {"type": "number", "exclusiveMinimum": 0.0},
        "theta": {"type": "number"},
        "mc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "samples": {"type": "integer", "minimum": 1},
                "ess_min": {"type": "number", "minimum": 0.0},
                "seed_groups": {"type": "integer", "minimum": 1},
            },
        },
        "dynamics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0.0},
                "t_final": {"type": "number", "exclusiveMinimum": 0.0},
                "stride": {"type": "integer", "minimum": 1},
                "sigma": {"type": "number"},
                "mass_convention": {"type": "string",
                                    "enum": ["shifted", "unshifted"]},
                "t_probe": {"type": "number", "minimum": 0.0},
            },
        },
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "j_values": {"type": "array", "items": {"type": "integer"}},
                "t_values": {"type": "array", "items": {"type": "number"}},
                "eps": {"type": "number", "exclusiveMinimum": 0.0},
            },
        },
        "output_dir": {"type": "string"},
    },
}

DEFAULTS = {
    "alpha": 0.9,
    "potential": {"preset": "quartic"},
    "n": 16,
    "n_ladder": [8, 16, 32],
    "seeds": [1],
    "p": 1.0,
    "theta": 4.0,
    "mc": {"samples": 10_000, "ess_min": 0.01, "seed_groups": 10},
    "dynamics": {"dt": 1e-3, "t_final": 1.0, "stride": 100,
                 "sigma": -0.2, "mass_convention": "shifted",
                 "t_probe": 1.0},
    "analysis": {"j_values": [3, 4, 5, 6], "t_values": [0.2, 0.5, 1.0, 2.0],
                 "eps": 0.3},
    "output_dir": "runs/out",
}


def _deep_merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = val
    return out


def load_config(path: str | None, overrides: dict) -> dict:
    cfg = dict(DEFAULTS)
    if path is not None:
        with open(path) as fh:
            cfg = _deep_merge(cfg, json.load(fh))
    cfg = _deep_merge(cfg, overrides)
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: e.json_path)
    if errors:
        lines = [f"{e.json_path}: {e.message}" for e in errors]
        raise SystemExit_config("config validation failed:\n  "
                                + "\n  ".join(lines))
    return cfg


class SystemExit_config(Exception):
    """Config failure carrying the report text (exit code 2)."""


def resolve_potential(cfg: dict) -> PotentialSpec:
    pot = cfg["potential"]
    alpha = cfg["alpha"]
    if "preset" in pot:
        name = pot["preset"]
        if name == "gibbs_quartic":
            base = PotentialSpec(4, (0.0, 0.0, 0.25))
            return tune_gibbs_quadratic(base, alpha, cfg["n"])
        return PRESETS[name](alpha)
    if "degree" in pot and "coeffs" in pot:
        return PotentialSpec(pot["degree"], tuple(pot["coeffs"]))
    raise SystemExit_config(
        "$.potential: needs either 'preset' or 'degree'+'coeffs'")


def ensure_outdir(cfg: dict) -> Path:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_csv(outdir: Path, name: str, header, rows) -> str:
    path = outdir / name
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return name


def write_manifest(outdir: Path, command: str, cfg: dict, outputs,
                   extras: dict, wall: float) -> None:
    doc = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "command": command,
        "created_utc": datetime.datetime.now(datetime.timezone.utc)
        .isoformat(timespec="seconds"),
        "wall_time_s": round(wall, 3),
        "config": cfg,
        "versions": {
            "fracwave": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "threads": os.environ.get("FRACWAVE_THREADS", "default"),
        "outputs": list(outputs),
    }
    doc.update(extras)
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def mc_row(table, est, p):
    return [table.alpha, table.n, p, est.estimator, est.mean, est.std_error,
            est.n_samples, est.seed, est.ess, table.digest()]


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(cfg, outdir):
    spec = resolve_potential(cfg)
    table = make_table(spec, cfg["alpha"], cfg["n"])
    (outdir / "constants.json").write_text(table.to_json() + "\n")
    print(table.to_json())
    return ["constants.json"], {"table_digest": table.digest()}


def cmd_validate_potential(cfg, outdir):
    spec = resolve_potential(cfg)
    report = validate_potential(spec, cfg["alpha"])
    doc = {
        "a1_bar": report.a1_bar,
        "critical": bool(report.critical),
        "positivity_min": report.positivity_min,
        "positive": bool(report.positive),
    }
    (outdir / "validation.json").write_text(json.dumps(doc, indent=2) + "\n")
    if not report.critical:
        raise NotCritical(
            f"quadratic-coefficient criticality fails: abar_1 = {report.a1_bar:.3e}")
    if not report.positive:
        raise NotPositive(
            f"averaged-tail positivity fails: min = {report.positivity_min:.3e}")
    return ["validation.json"], {}


def cmd_sample_stats(cfg, outdir):
    from .gibbs import sample_potential_integrals

    spec = resolve_potential(cfg)
    table = make_table(spec, cfg["alpha"], cfg["n"])
    seed = cfg["seeds"][0]
    vals = sample_potential_integrals(table, cfg["mc"]["samples"],
                                      SeededStream(seed))
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(len(vals)))
    rows = [[table.alpha, table.n, "", "mean int Vt", mean, se,
             len(vals), seed, len(vals), table.digest()]]
    name = write_csv(outdir, "sample_stats.csv", CSV_PREFIX, rows)
    return [name], {"zero_mean_within_3se": bool(abs(mean) <= 3 * se)}


def cmd_gibbs_z(cfg, outdir):
    spec = resolve_potential(cfg)
    rows = []
    estimates = []
    for n in cfg["n_ladder"]:
        table = make_table(spec, cfg["alpha"], n)
        est = log_partition_mc(table, cfg["p"], cfg["mc"]["samples"],
                               SeededStream(cfg["seeds"][0]),
                               ess_min_frac=cfg["mc"]["ess_min"])
        rows.append(mc_row(table, est, cfg["p"]))
        estimates.append(est)
    name = write_csv(outdir, "gibbs_z.csv", CSV_PREFIX, rows)
    means = np.array([e.mean for e in estimates])
    pooled = float(np.sqrt(np.mean([e.std_error**2 for e in estimates])))
    band = float(means.max() - means.min())
    verdict = band <= 5.0 * pooled
    return [name], {"band_width": band, "pooled_stderr": pooled,
                    "bounded_band": bool(verdict)}


def cmd_gibbs_converge(cfg, outdir):
    spec = resolve_potential(cfg)
    ladder = cfg["n_ladder"]
    ref = make_table(spec, cfg["alpha"], max(ladder))
    groups = cfg["mc"]["seed_groups"]
    base_seed = cfg["seeds"][0]
    rows = []
    medians = {}
    for n in ladder:
        table = make_table(spec, cfg["alpha"], n)
        gaps = []
        for g in range(groups):
            est = density_gap_mc(table, ref, cfg["p"], cfg["mc"]["samples"],
                                 SeededStream(base_seed + g))
            rows.append(mc_row(table, est, cfg["p"]) + [base_seed + g])
            gaps.append(est.mean)
        medians[n] = float(np.median(gaps))
    name = write_csv(outdir, "density_gap.csv",
                     CSV_PREFIX + ["group_seed"], rows)
    ns = sorted(medians)
    decreasing = all(medians[a] > medians[b] for a, b in zip(ns, ns[1:]))
    return [name], {"medians": {str(k): v for k, v in medians.items()},
                    "strictly_decreasing": bool(decreasing)}


def cmd_counterexample(cfg, outdir):
    spec = resolve_potential(cfg)
    rows_raw, fitted = counterexample_growth(spec, cfg["alpha"], cfg["theta"],
                                             cfg["n_ladder"])
    rows = [[cfg["alpha"], n, "", f"drift bound theta={cfg['theta']}",
             bound, 0.0, 0, "", 0, ""] for n, bound in rows_raw]
    name = write_csv(outdir, "counterexample.csv", CSV_PREFIX, rows)
    return [name], {"fitted_exponent": fitted,
                    "claimed_exponent": 4.0 * (1.0 - cfg["alpha"])}


def cmd_variational(cfg, outdir):
    spec = resolve_potential(cfg)
    table = make_table(spec, cfg["alpha"], cfg["n"])
    band = default_drift_band(table.n)
    init = DriftProfile.constant(band, cfg["theta"] * table.n**table.beta)
    res = minimize(table, init)
    trace_rows = [[it, obj, gn, step] for it, obj, gn, step in res.trace]
    name = write_csv(outdir, "variational_trace.csv",
                     ["iteration", "objective", "grad_norm", "step"],
                     trace_rows)
    return [name], {"objective": res.objective, "iterations": res.iterations,
                    "converged": res.converged,
                    "table_digest": table.digest()}


def cmd_evolve(cfg, outdir):
    spec = resolve_potential(cfg)
    table = make_table(spec, cfg["alpha"], cfg["n"])
    dyn = cfg["dynamics"]
    lat = Lattice(table.n, 2 * table.n + 1, table.alpha)
    state = sample_pair_state(lat, SeededStream(cfg["seeds"][0]))
    evo = EvolutionConfig(dyn["dt"], dyn["t_final"], dyn["stride"],
                          "full_potential", dyn["mass_convention"],
                          -1.0 if dyn["mass_convention"] == "unshifted" else 0.0)
    rows = []

    def record(t, st):
        rows.append([t,
                     float(sobolev_norm_coeffs(st.u, table.alpha, dyn["sigma"])),
                     float(sobolev_norm_coeffs(st.u, table.alpha, 0.0)),
                     energy(st, table)])

    evolve(state, table, evo, callback=record)
    name = write_csv(outdir, "trajectory.csv",
                     ["t", "h_sigma_norm", "l2_sobolev_norm", "energy"], rows)
    e = [r[3] for r in rows]
    drift = abs(e[-1] - e[0]) / max(abs(e[0]), 1e-300)
    return [name], {"energy_drift_rel": drift,
                    "table_digest": table.digest()}


def cmd_converge_dynamics(cfg, outdir):
    spec = resolve_potential(cfg)
    dyn = cfg["dynamics"]
    tables = [make_table(spec, cfg["alpha"], n) for n in cfg["n_ladder"]]
    rows_map, medians = convergence_experiment(
        tables, cfg["seeds"], dyn["t_final"], dyn["sigma"],
        dt=dyn["dt"], output_stride=dyn["stride"])
    rows = [[cfg["alpha"], n, "", "sup_t H^sigma gap", sup, 0.0, 1, seed, 1, ""]
            for (seed, n), sup in sorted(rows_map.items())]
    name = write_csv(outdir, "dynamics_gap.csv", CSV_PREFIX, rows)
    ns = sorted(medians)
    decreasing = all(medians[a] > medians[b] for a, b in zip(ns, ns[1:]))
    return [name], {"medians": {str(k): v for k, v in medians.items()},
                    "strictly_decreasing": bool(decreasing)}


def cmd_invariance(cfg, outdir):
    spec = resolve_potential(cfg)
    table = make_table(spec, cfg["alpha"], cfg["n"])
    dyn = cfg["dynamics"]
    rep = invariance_diagnostic(table, dyn["t_probe"], cfg["mc"]["samples"],
                                SeededStream(cfg["seeds"][0]), dt=dyn["dt"],
                                ess_min_frac=cfg["mc"]["ess_min"])
    rows = [[table.alpha, table.n, "", f"invariance {name}",
             row["discrepancy"], row["std_error"], rep["n_samples"],
             cfg["seeds"][0], rep["ess"], table.digest()]
            for name, row in rep["observables"].items()]
    name = write_csv(outdir, "invariance.csv", CSV_PREFIX, rows)
    worst = max(r["standardized"] for r in rep["observables"].values())
    return [name], {"ess_frac": rep["ess_frac"],
                    "max_standardized_discrepancy": worst}


def cmd_dispersive(cfg, outdir):
    ana = cfg["analysis"]
    alpha = cfg["alpha"]
    rows = []
    for j in ana["j_values"]:
        for t in ana["t_values"]:
            sup = dispersive_kernel_sup(j, t, alpha)
            rows.append([j, t, sup,
                         sup * abs(t) / 2.0 ** (2 * j * (1 - alpha / 2.0))])
    name = write_csv(outdir, "dispersive.csv",
                     ["j", "t", "sup_modulus", "normalized_constant"], rows)
    rep = kernel_decay_constants(ana["j_values"], ana["t_values"], alpha)
    return [name], {"stability_ratio": rep["stability_ratio"]}


def cmd_oracles(cfg, outdir):
    alpha = cfg["alpha"]
    eps = cfg["analysis"]["eps"]
    rows = []
    for case, kwargs in (("i", {"eta1": 1.3, "eta2": 1.5}),
                         ("ii", {"eta1": 1.0, "eta2": 2.0}),
                         ("iii", {"eta1": 1.0, "eta2": 3.0})):
        rep = convolution_sum_oracle(case, **kwargs)
        rows.append([case, kwargs["eta1"], kwargs["eta2"], "",
                     rep["max_ratio"], ""])
    rep4 = convolution_sum_oracle("iv", eta1=1.6, n=2)
    rows.append(["iv", 1.6, "", 2, rep4["fitted_exponent"],
                 rep4["claimed_exponent"]])
    rate = truncated_interaction_rate(2, 1, alpha, eps, cfg["n_ladder"])
    rows.append(["corollary", 2 * alpha, "", 2, rate["fitted_exponent"],
                 rate["claimed_exponent"]])
    name = write_csv(outdir, "oracles.csv",
                     ["case", "eta1", "eta2", "n_fold", "value", "claimed"],
                     rows)
    return [name], {"interaction_rate": rate["fitted_exponent"]}


COMMANDS = {
    "constants": cmd_constants,
    "validate-potential": cmd_validate_potential,
    "sample-stats": cmd_sample_stats,
    "gibbs-z": cmd_gibbs_z,
    "gibbs-converge": cmd_gibbs_converge,
    "counterexample": cmd_counterexample,
    "variational": cmd_variational,
    "evolve": cmd_evolve,
    "converge-dynamics": cmd_converge_dynamics,
    "invariance": cmd_invariance,
    "dispersive": cmd_dispersive,
    "oracles": cmd_oracles,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracwave",
        description="renormalized fractional-wave experiments on T^2")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="JSON config file (flags override it)")
        p.add_argument("--alpha", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--ladder", type=str,
                       help="comma-separated cutoffs, e.g. 8,16,32")
        p.add_argument("--potential", type=str,
                       help="preset:<name> or a JSON coefficient list")
        p.add_argument("--p", type=float, dest="p_exp")
        p.add_argument("--theta", type=float)
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--output-dir", type=str)
    return parser


def overrides_from_args(args) -> dict:
    out: dict = {}
    if args.alpha is not None:
        out["alpha"] = args.alpha
    if args.n is not None:
        out["n"] = args.n
    if args.ladder is not None:
        out["n_ladder"] = [int(x) for x in args.ladder.split(",")]
    if args.potential is not None:
        if args.potential.startswith("preset:"):
            out["potential"] = {"preset": args.potential.split(":", 1)[1]}
        else:
            coeffs = json.loads(args.potential)
            out["potential"] = {"degree": 2 * (len(coeffs) - 1),
                                "coeffs": coeffs}
    if args.p_exp is not None:
        out["p"] = args.p_exp
    if args.theta is not None:
        out["theta"] = args.theta
    if args.samples is not None:
        out["mc"] = {"samples": args.samples}
    if args.seed is not None:
        out["seeds"] = [args.seed]
    if args.output_dir is not None:
        out["output_dir"] = args.output_dir
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.monotonic()
    try:
        cfg = load_config(args.config, overrides_from_args(args))
        outdir = ensure_outdir(cfg)
        outputs, extras = COMMANDS[args.command](cfg, outdir)
        write_manifest(outdir, args.command, cfg, outputs, extras,
                       time.monotonic() - t0)
        return EXIT_OK
    except SystemExit_config as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except (NotCritical, NotPositive, PositivityHolds) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateWeights as exc:
        print(f"degenerate statistics: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except FracwaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
