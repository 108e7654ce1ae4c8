"""Command-line front end.

Subcommands: `analyze` runs the estimate-then-select pipeline (or a
classical baseline) on a re,im CSV signal file; `simulate` runs a preset
or config-file Monte-Carlo experiment and emits metric CSVs; `bench-amps`
compares the two amplitude extractors; `presets` lists the shipped
experiment plans.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
Errors print one machine-readable line starting with `error:`.  All
randomness flows from a single seed, so every command is deterministic
given its flags and configuration.
"""
from __future__ import annotations

import argparse
import cmath
import configparser
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench, detect, estimate, perturbation, presets, signal_model
from .detect import GridConfig
from .estimate import PipelineConfig

__all__ = ["main"]


class UsageError(Exception):
    """Bad flags, bad config, or malformed input; maps to exit code 2."""


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    """Show option defaults but leave the epilog's key listing verbatim."""


# --------------------------------------------------------------------------
# Config-file schema: flat key = value entries under [section] headers.
# Every key has a parser and a documented default.

def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(part) for part in text.split(","))


def _parse_complexes(text: str) -> tuple[complex, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(complex(part.strip().replace("i", "j")) for part in text.split(","))


def _parse_grid(text: str) -> tuple[float, ...]:
    """Either `start:stop:step` (inclusive) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("grid range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + k * step for k in range(count))
    return tuple(float(part) for part in text.split(","))


def _parse_auto_float(text: str) -> float | None:
    return None if text.strip().lower() == "auto" else float(text)


def _parse_auto_int(text: str) -> int | None:
    return None if text.strip().lower() == "auto" else int(text)


CONFIG_SCHEMA = {
    "scenario": {
        "components": (int, "2", "model order (1, 2, or 4; 4 mirrors the cluster)"),
        "theta1": (float, "2.0", "first frequency in rad/sample"),
        "separation": (_parse_auto_float, "auto", "in-cluster spacing; auto = 2*pi/N"),
        "dampings": (_parse_floats, "", "per-component dampings; empty = undamped"),
        "amplitudes": (_parse_complexes, "", "per-component complex amplitudes; empty = all 1"),
        "samples": (int, "71", "sample count N"),
        "snr_db": (float, "8.0", "SNR used by non-SNR sweeps"),
    },
    "sweep": {
        "axis": (str, "snr_db", "sweep axis: snr_db | samples | separation"),
        "grid": (_parse_grid, "-10:20:2", "sweep grid, start:stop:step or comma list"),
    },
    "noise": {
        "kind": (str, "gaussian", "noise model: gaussian | binormal"),
        "binormal_threshold": (float, "0.85", "narrow-component probability"),
        "binormal_scale_ratio": (float, "3.0", "wide/narrow scale ratio"),
        "binormal_mean_ratio": (float, "2.0", "wide-component offset over its scale"),
    },
    "run": {
        "trials": (int, "500", "Monte-Carlo trials per sweep point"),
        "seed": (int, "0", "base seed; trial seeds derive from it"),
        "methods": (str, "samp,gap,sdd,eff,aic,bic", "comma list of methods"),
        "threads": (int, "1", "worker processes for sweep points"),
        "penalty": (str, "auto", "mismatch penalty divisor: auto | fixed | current"),
    },
    "detect": {
        "pencil_parameter": (_parse_auto_int, "auto", "pencil parameter L; auto = round(N/3)"),
        "truncation": (str, "effective", "weak truncation: effective | half | none"),
        "threshold_scale": (_parse_auto_float, "auto", "threshold scale c; auto = 10*sqrt(N-L)"),
        "freq_oversample": (int, "8", "frequency grid oversampling factor"),
        "radius_points": (int, "15", "number of radius grid points"),
        "max_damping": (float, "0.15", "largest damping covered by the radius grid"),
        "refine": (_parse_bool, "true", "quadratic refinement of the feature search"),
        "sdd_digits": (int, "8", "significant decimal digits for the sdd detector"),
        "ite_max_order": (_parse_auto_int, "auto", "largest aic/bic candidate order; auto = L"),
    },
}


def config_help_text() -> str:
    lines = ["configuration keys (key = value under [section] headers):"]
    for section, keys in CONFIG_SCHEMA.items():
        lines.append(f"  [{section}]")
        for key, (_, default, doc) in keys.items():
            lines.append(f"    {key} = {default}".ljust(34) + f"  {doc}")
    return "\n".join(lines)


def _parse_config_file(path: str | None, overrides: list[str]) -> dict[str, dict]:
    """Parse + validate a config file and `section.key=value` overrides."""
    values: dict[str, dict] = {
        section: {key: parser(default) for key, (parser, default, _) in keys.items()}
        for section, keys in CONFIG_SCHEMA.items()
    }
    parser_obj = configparser.ConfigParser(interpolation=None)
    if path is not None:
        read = parser_obj.read(path)
        if not read:
            raise UsageError(f"cannot read config file {path}")
        for section in parser_obj.sections():
            if section not in CONFIG_SCHEMA:
                raise UsageError(f"unknown config section [{section}]")
            for key, raw in parser_obj.items(section):
                if key not in CONFIG_SCHEMA[section]:
                    raise UsageError(f"unknown config key {key!r} in section [{section}]")
                try:
                    values[section][key] = CONFIG_SCHEMA[section][key][0](raw)
                except ValueError as exc:
                    raise UsageError(f"bad value for {section}.{key}: {exc}") from None
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise UsageError(f"override must look like section.key=value, got {item!r}")
        target, raw = item.split("=", 1)
        section, key = target.split(".", 1)
        if section not in CONFIG_SCHEMA or key not in CONFIG_SCHEMA[section]:
            raise UsageError(f"unknown config key {target!r}")
        try:
            values[section][key] = CONFIG_SCHEMA[section][key][0](raw)
        except ValueError as exc:
            raise UsageError(f"bad value for {target}: {exc}") from None
    return values


def _grid_config(det: dict) -> GridConfig:
    radius_min = math.exp(-det["max_damping"])
    if det["radius_points"] == 1:
        radii = (1.0,)
    else:
        radii = tuple(np.geomspace(radius_min, 1.0, det["radius_points"]))
    return GridConfig(
        freq_oversample=det["freq_oversample"],
        radius_grid=radii,
        refine=det["refine"],
    )


def _pipeline_config(det: dict) -> PipelineConfig:
    return PipelineConfig(
        pencil_parameter=det["pencil_parameter"],
        truncation=det["truncation"],
        grid=_grid_config(det),
        threshold_scale=det["threshold_scale"],
        sdd_digits=det["sdd_digits"],
        ite_max_order=det["ite_max_order"],
    )


def _experiment_config(values: dict[str, dict]) -> bench.ExperimentConfig:
    scn = values["scenario"]
    template = bench.ScenarioTemplate(
        order=scn["components"],
        theta1=scn["theta1"],
        separation=scn["separation"],
        dampings=scn["dampings"],
        amplitudes=scn["amplitudes"],
        sample_count=scn["samples"],
        snr_db=scn["snr_db"],
    )
    run = values["run"]
    methods = tuple(m.strip().lower() for m in run["methods"].split(",") if m.strip())
    try:
        return bench.ExperimentConfig(
            scenario=template,
            sweep=values["sweep"]["axis"],
            grid=values["sweep"]["grid"],
            trials=run["trials"],
            methods=methods,
            noise_kind=values["noise"]["kind"],
            binormal_threshold=values["noise"]["binormal_threshold"],
            binormal_scale_ratio=values["noise"]["binormal_scale_ratio"],
            binormal_mean_ratio=values["noise"]["binormal_mean_ratio"],
            seed=run["seed"],
            penalty_mode=run["penalty"],
            pipeline=_pipeline_config(values["detect"]),
            workers=run["threads"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# --------------------------------------------------------------------------
# analyze

def cmd_analyze(args) -> int:
    try:
        samples = signal_model.read_signal_csv(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"{args.input}: {exc}") from None

    values = _parse_config_file(args.config, args.set or [])
    pipeline = _pipeline_config(values["detect"])
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    detector = args.detector.lower()
    features = None
    if detector == "samp":
        try:
            analysis = estimate.run_samp(samples, pipeline)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        estimates = analysis.estimates
        features = analysis.detection.features
    else:
        try:
            estimates = estimate.classical_pipeline(samples, pipeline, detector=detector)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        analysis = None

    estimate.write_estimates_csv(out_dir / "estimates.csv", estimates, features)
    detect.write_features_csv(out_dir / "features.csv", features or ())
    with open(out_dir / "metadata.csv", "w", newline="") as fh:
        fh.write("key,value\n")
        fh.write(f"detector,{detector}\n")
        fh.write(f"samples,{samples.size}\n")
        fh.write(f"order,{estimates.order}\n")

    print(f"detected order: {estimates.order} (detector: {detector})")
    for pos in range(estimates.order):
        b = estimates.amplitudes[pos]
        print(
            f"  component {pos}: theta={estimates.frequencies[pos]:+.6f} "
            f"alpha={estimates.dampings[pos]:.6f} "
            f"|b|={abs(b):.6f} arg_b={cmath.phase(b):+.6f}"
        )

    if args.diagnostics and analysis is not None and analysis.decomposition is not None:
        decomp = analysis.decomposition
        from .pencil import build_hankel

        pair = build_hankel(samples, analysis.pencil_parameter)
        bench.dump_matrix_csv(out_dir / "hankel_y0.csv", pair.y0)
        bench.dump_matrix_csv(out_dir / "hankel_y1.csv", pair.y1)
        bench.dump_matrix_csv(out_dir / "left_modes.csv", decomp.left_modes)
        with open(out_dir / "local_ratio.csv", "w", newline="") as fh:
            fh.write("index,feature\n")
            for i in range(decomp.rank):
                value = perturbation.local_ratio_feature(
                    decomp.left_modes[:, i], decomp.eigenvalues[i]
                )
                fh.write(f"{i},{value:.17g}\n")
    return 0


# --------------------------------------------------------------------------
# simulate

def _apply_simulate_overrides(config: bench.ExperimentConfig, args) -> bench.ExperimentConfig:
    updates = {}
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.methods is not None:
        updates["methods"] = tuple(m.strip().lower() for m in args.methods.split(","))
    if args.threads is not None:
        updates["workers"] = args.threads
    try:
        return replace(config, **updates) if updates else config
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_series(out_dir: Path, prefix: str, series: bench.MetricSeries) -> None:
    tag = f"{prefix}_" if prefix else ""
    bench.write_metric_csv(out_dir / f"{tag}detection.csv", series, "p_d")
    bench.write_metric_csv(out_dir / f"{tag}rmse.csv", series, "rmse")
    bench.write_metric_csv(out_dir / f"{tag}bias.csv", series, "bias")
    bench.write_metrics_csv(out_dir / f"{tag}metrics.csv", series)


def _dump_features(out_dir: Path, config: bench.ExperimentConfig) -> None:
    """One-draw mode-feature dump at the middle sweep point."""
    xs = config.grid
    x = xs[len(xs) // 2]
    spec, variance = bench.realize_scenario(config, x)
    model = signal_model.NoiseModel(
        kind=config.noise_kind,
        variance=variance,
        binormal_threshold=config.binormal_threshold,
        binormal_scale_ratio=config.binormal_scale_ratio,
        binormal_mean_ratio=config.binormal_mean_ratio,
    )
    y = signal_model.apply_noise(signal_model.synthesize(spec), model, config.seed)
    analysis = estimate.run_samp(y, config.pipeline)
    detect.write_features_csv(out_dir / "features_dump.csv", analysis.detection.features)


def cmd_simulate(args) -> int:
    if args.preset and args.config:
        raise UsageError("--preset and --config are mutually exclusive")
    if not args.preset and not args.config:
        raise UsageError("one of --preset or --config is required")

    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.config:
        values = _parse_config_file(args.config, args.set or [])
        config = _apply_simulate_overrides(_experiment_config(values), args)
        series = bench.run_monte_carlo(config)
        _write_series(out_dir, "", series)
        rows = [("base", method, metrics.auc) for method, metrics in series.per_method.items()]
        bench.write_summary_csv(out_dir / "summary.csv", rows)
        if args.features_dump:
            _dump_features(out_dir, config)
        print(f"wrote metrics for 1 configuration to {out_dir}")
        return 0

    try:
        preset = presets.get_preset(args.preset)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None

    if preset.kind == "timing":
        _, config = preset.variants[0]
        config = _apply_simulate_overrides(config, args)
        timings = bench.time_methods(config)
        rows = [
            (x, method, seconds[ix])
            for method, seconds in timings.items()
            for ix, x in enumerate(config.grid)
        ]
        bench.write_timing_csv(out_dir / "timing.csv", rows)
        print(f"wrote timing.csv to {out_dir}")
        return 0

    if preset.kind == "amps":
        rows = bench.amplitude_study(
            n_grid=preset.amps_grid,
            trials=args.trials if args.trials is not None else 10,
            seed=args.seed if args.seed is not None else 0,
        )
        _write_amps(out_dir / "amps.csv", rows)
        print(f"wrote amps.csv to {out_dir}")
        return 0

    summary_rows = []
    multi = len(preset.variants) > 1
    for variant, config in preset.variants:
        config = _apply_simulate_overrides(config, args)
        series = bench.run_monte_carlo(config)
        _write_series(out_dir, variant if multi else "", series)
        summary_rows.extend(
            (variant, method, metrics.auc)
            for method, metrics in series.per_method.items()
        )
        if args.features_dump:
            _dump_features(out_dir, config)
    bench.write_summary_csv(out_dir / "summary.csv", summary_rows)
    print(f"wrote metrics for {len(preset.variants)} configuration(s) to {out_dir}")
    return 0


def _write_amps(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("n,method,rmse,seconds\n")
        for row in rows:
            fh.write(f"{row['n']},{row['method']},{row['rmse']:.17g},{row['seconds']:.17g}\n")


def cmd_bench_amps(args) -> int:
    try:
        n_grid = tuple(int(part) for part in args.n_grid.split(","))
    except ValueError:
        raise UsageError(f"bad N grid {args.n_grid!r}") from None
    rows = bench.amplitude_study(
        n_grid=n_grid, snr_db=args.snr_db, trials=args.trials, seed=args.seed
    )
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_amps(out_dir / "amps.csv", rows)
    for row in rows:
        print(
            f"N={row['n']:>5} {row['method']:>13}: rmse={row['rmse']:.4e} "
            f"seconds={row['seconds']:.4e}"
        )
    return 0


def cmd_presets(args) -> int:
    for name in sorted(presets.PRESETS):
        preset = presets.PRESETS[name]
        print(f"{name:12s} {preset.description}")
    return 0


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="samp",
        description="Detection and estimation of complex exponentials in noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser(
        "analyze",
        help="estimate the components of a re,im CSV signal file",
        formatter_class=_HelpFormatter,
        epilog=config_help_text() + "\n(only the [detect] section applies to analyze)",
    )
    p_analyze.add_argument("input", help="signal CSV file (columns re,im)")
    p_analyze.add_argument("-o", "--output-dir", default=".", help="where to write estimates.csv and features.csv")
    p_analyze.add_argument(
        "--detector",
        default="samp",
        choices=("samp",) + estimate.CLASSICAL_DETECTORS,
        help="detection method",
    )
    p_analyze.add_argument("--config", default=None, help="config file ([detect] section)")
    p_analyze.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="config override")
    p_analyze.add_argument("--diagnostics", action="store_true", help="dump pencil matrices and local-ratio features")
    p_analyze.set_defaults(func=cmd_analyze)

    p_sim = sub.add_parser(
        "simulate",
        help="run a preset or config-file Monte-Carlo experiment",
        formatter_class=_HelpFormatter,
        epilog=config_help_text(),
    )
    p_sim.add_argument("--preset", default=None, help="preset name (see `samp presets`)")
    p_sim.add_argument("--config", default=None, help="experiment config file")
    p_sim.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="config override")
    p_sim.add_argument("-o", "--output-dir", default="samp-out", help="output directory (default: samp-out)")
    p_sim.add_argument("--trials", type=int, default=None, help="override Monte-Carlo trials")
    p_sim.add_argument("--seed", type=int, default=None, help="override base seed")
    p_sim.add_argument("--methods", default=None, help="override comma list of methods")
    p_sim.add_argument("--threads", type=int, default=None, help="worker processes for sweep points")
    p_sim.add_argument("--features-dump", action="store_true", help="also write features_dump.csv")
    p_sim.set_defaults(func=cmd_simulate)

    p_amps = sub.add_parser(
        "bench-amps",
        help="compare the amplitude extractors at full truncation rank",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p_amps.add_argument("--n-grid", default="100,200,400,600", help="comma list of signal lengths")
    p_amps.add_argument("--snr-db", type=float, default=10.0, help="SNR of the test signals")
    p_amps.add_argument("--trials", type=int, default=10, help="trials per signal length")
    p_amps.add_argument("--seed", type=int, default=0, help="base seed")
    p_amps.add_argument("-o", "--output-dir", default="samp-out", help="output directory")
    p_amps.set_defaults(func=cmd_bench_amps)

    p_presets = sub.add_parser("presets", help="list shipped experiment presets")
    p_presets.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
