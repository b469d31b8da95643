"""Command-line interface: generate, score, smooth, analyze, plot, run, validate.

Exit codes: 0 success, 2 configuration error, 3 transport error, 4 data
error. The FUZZPROBE_ENDPOINT environment variable overrides any configured
scoring endpoint.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import build_report, fit_hedge_exponent, pooled_curve, read_report, write_report
from .errors import ConfigurationError, FuzzprobeError
from .pipeline import (
    ENDPOINT_ENV_VAR,
    _parse_oracle,
    default_config_path,
    load_config,
    parse_config,
    run_pipeline,
    validate,
)
from .plotting import render_all
from .scoring import RemoteScorerConfig, cache_read, cache_write, score_oracle, score_remote
from .smoothing import SmootherConfig, build_curves, read_curves, smooth, write_curves
from .stimuli import generate_dataset, read_pairs, write_pairs


def _config_arg(parser, required=False):
    parser.add_argument(
        "--config",
        type=Path,
        default=None if required else default_config_path(),
        required=required,
        help="pipeline config JSON (defaults to the shipped oracle config)",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzprobe",
        description="Probe NLI models for fuzzy-set-like entailment behaviour.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="expand stimulus templates into a pair file")
    _config_arg(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("score", help="score a pair file with a remote service or the oracle")
    p.add_argument("--in", dest="pairs", type=Path, required=True)
    p.add_argument("--scorer", choices=["remote", "oracle"], required=True)
    p.add_argument("--endpoint", default=None, help="remote service base URL")
    p.add_argument("--oracle-spec", type=Path, default=None, help="oracle spec JSON")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("smooth", help="group scores into curves and smooth them")
    p.add_argument("--in", dest="cache", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument(
        "--lambda",
        dest="lambda_mode",
        default="gcv",
        help="'gcv' or 'fixed:<value>' smoothing weight selection",
    )
    p.add_argument("--per-location", action="store_true")

    p = sub.add_parser("analyze", help="fit hedge exponents and ordering statistics")
    p.add_argument("--curves", type=Path, required=True)
    p.add_argument("--raw", type=Path, required=True, help="score cache with raw per-pair values")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--fit-on", choices=["smoothed", "raw"], default="smoothed")

    p = sub.add_parser("plot", help="render SVG plots and CSV series")
    p.add_argument("--curves", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--report", type=Path, default=None, help="reuse fits from a report")

    p = sub.add_parser("run", help="run the whole pipeline from one config")
    _config_arg(p)
    p.add_argument("--out", type=Path, default=None, help="artifact directory override")

    p = sub.add_parser("validate", help="check a config without running anything")
    _config_arg(p)

    return parser


def _cmd_generate(args) -> int:
    config = parse_config(load_config(args.config))
    write_pairs(generate_dataset(config.stimuli), args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_score(args) -> int:
    pairs = read_pairs(args.pairs)
    if args.scorer == "oracle":
        if args.oracle_spec is None:
            raise ConfigurationError("--oracle-spec is required with --scorer oracle")
        spec = _parse_oracle(load_config(args.oracle_spec), "oracle-spec", None)
        scorer_id = spec.scorer_id()
        score_missing = lambda missing: score_oracle(missing, spec)
    else:
        endpoint = os.environ.get(ENDPOINT_ENV_VAR) or args.endpoint
        if not endpoint:
            raise ConfigurationError(
                f"--endpoint (or {ENDPOINT_ENV_VAR}) is required with --scorer remote"
            )
        remote = RemoteScorerConfig(endpoint=endpoint, batch_size=args.batch_size)
        scorer_id = f"remote({endpoint})"
        score_missing = lambda missing: score_remote(missing, remote)

    # Scores are keyed by (premise, hypothesis, scorer_id): an existing cache
    # is reused and only unseen pairs are scored.
    cached = {}
    if args.out.exists():
        for item in cache_read(args.out):
            cached[(item.pair.premise, item.pair.hypothesis, item.scorer_id)] = item
    missing = [
        p for p in pairs if (p.premise, p.hypothesis, scorer_id) not in cached
    ]
    for item in score_missing(missing):
        cached[(item.pair.premise, item.pair.hypothesis, item.scorer_id)] = item
    ordered = [cached[(p.premise, p.hypothesis, scorer_id)] for p in pairs]
    cache_write(ordered, args.out)
    print(f"scored {len(missing)} of {len(pairs)} pairs ({len(pairs) - len(missing)} cached)")
    return 0


def _smoother_from_mode(mode: str) -> SmootherConfig:
    if mode == "gcv":
        return SmootherConfig()
    if mode.startswith("fixed:"):
        try:
            value = float(mode.split(":", 1)[1])
        except ValueError:
            raise ConfigurationError(f"bad fixed smoothing weight in {mode!r}")
        return SmootherConfig(selection="fixed", fixed_lambda=value)
    raise ConfigurationError(f"--lambda must be 'gcv' or 'fixed:<value>', got {mode!r}")


def _cmd_smooth(args) -> int:
    scored = cache_read(args.cache)
    config = _smoother_from_mode(args.lambda_mode)
    curves = build_curves(scored, per_location=args.per_location)
    write_curves([smooth(curve, config) for curve in curves], args.out)
    print(f"wrote {len(curves)} curves to {args.out}")
    return 0


def _cmd_analyze(args) -> int:
    curves = read_curves(args.curves)
    scored = cache_read(args.raw)
    report = build_report(curves, scored, fit_on=args.fit_on)
    write_report(report, args.out)
    for unit, fit in report.hedge_fits.items():
        print(
            f"{unit}: lambda*={fit.lambda_star:.4f} rmse={fit.rmse_at_star:.4f} "
            f"ordering={report.ordering_fractions[unit]:.4f}"
        )
    print(f"wrote {args.out}")
    return 0


def _cmd_plot(args) -> int:
    curves = read_curves(args.curves)
    if args.report is not None:
        fits = read_report(args.report).hedge_fits
    else:
        fits = {}
        units = []
        for curve in curves:
            if curve.unit not in units:
                units.append(curve.unit)
        for unit in units:
            try:
                base = pooled_curve(curves, unit, "warm")
                target = pooled_curve(curves, unit, "hot")
            except (ConfigurationError, ValueError):
                continue
            fits[unit.value] = fit_hedge_exponent(base, target)
    written = render_all(curves, fits, args.out)
    print(f"wrote {len(written)} files to {args.out}")
    return 0


def _cmd_run(args) -> int:
    result = run_pipeline(args.config, out_dir=args.out)
    print(f"artifacts in {result.directory}")
    return 0


def _cmd_validate(args) -> int:
    diagnostics = validate(args.config)
    for diag in diagnostics:
        print(diag, file=sys.stderr)
    if diagnostics:
        print(f"{len(diagnostics)} problem(s) found", file=sys.stderr)
        return 2
    print("config ok")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "score": _cmd_score,
    "smooth": _cmd_smooth,
    "analyze": _cmd_analyze,
    "plot": _cmd_plot,
    "run": _cmd_run,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FuzzprobeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
