"""Command-line front end.

Exit codes:
    0  success
    1  partial failure (some manifest entries failed)
    2  usage error (unknown flag, missing argument)
    3  data, format or configuration error
    4  evaluation failure (every entry failed, or nothing to evaluate)
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import baseline as baselines
from .config import PRESETS, config_to_text, resolve_config
from .depthio import colorize, load_class_map, load_depth_u16, save_class_map, save_depth_u16, save_rgb
from .discretization import IGNORE, boundaries, dequantize, dequantize_map, format_boundaries, quantize, quantize_map
from .errors import DepthBenchError, EvaluationError
from .harness import EXIT_USAGE, load_manifest, run_baseline_eval, run_eval
from .metrics import format_table_header

log = logging.getLogger("depthbench")

JOBS_ENV = "DEPTHBENCH_JOBS"


def _default_jobs():
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def _add_scheme_args(p):
    g = p.add_argument_group("configuration (preset < config file < flags)")
    g.add_argument("--preset", choices=sorted(PRESETS), default="kitti-71", help="built-in preset (default: kitti-71)")
    g.add_argument("--config", "--scheme", dest="config", metavar="FILE", help="INI config file layered over the preset")
    g.add_argument("--mode", choices=("ud", "sid"), help="discretization mode")
    g.add_argument("--alpha", type=float, help="lower depth bound in meters")
    g.add_argument("--beta", type=float, help="upper depth bound in meters")
    g.add_argument("--classes", type=int, dest="num_classes", help="number of classes K")
    g.add_argument("--scale-divisor", type=float, help="16-bit value per meter (default 256)")
    return g


def _add_eval_args(p):
    g = _add_scheme_args(p)
    g.add_argument("--min-depth", type=float, help="smallest ground-truth depth scored")
    g.add_argument("--max-depth", type=float, help="largest ground-truth depth scored")
    g.add_argument("--no-clamp", action="store_true", help="do not clamp predictions to [min-depth, max-depth]")
    g.add_argument("--crop", choices=("none", "eigen", "bottom-center"), help="evaluation crop preset")
    g.add_argument("--aggregation", choices=("per-image-mean", "pixel-pooled"), help="how images are combined")
    p.add_argument("--manifest", required=True, metavar="FILE", help="TSV manifest: gt_path<TAB>pred_path per line")
    p.add_argument("--format", choices=("table", "json"), default="table", help="stdout format (default: table)")
    p.add_argument("--jobs", type=int, default=_default_jobs(), help=f"parallel entries (default: ${JOBS_ENV} or 1)")
    p.add_argument("--output", metavar="FILE", help="also write the JSON run document here")
    p.add_argument("--figures", metavar="DIR", help="write summary figures (PNG) into DIR")
    p.add_argument("--per-image", action="store_true", help="table format: one row per image before the aggregate")
    p.add_argument("--label", default=None, help="row label for the aggregate table row")


def _overrides(args):
    get = lambda name: getattr(args, name, None)  # noqa: E731
    out = {
        "scheme": {"mode": get("mode"), "alpha": get("alpha"), "beta": get("beta"), "num_classes": get("num_classes")},
        "policy": {"min_depth": get("min_depth"), "max_depth": get("max_depth")},
        "loader": {"scale_divisor": get("scale_divisor")},
        "eval": {"aggregation": get("aggregation"), "prediction_format": get("prediction_format")},
        "crop": {"kind": get("crop")},
    }
    if get("no_clamp"):
        out["policy"]["clamp_predictions"] = "false"
    return out


def _resolve(args):
    config = resolve_config(args.preset, args.config, _overrides(args))
    if args.verbose:
        sys.stderr.write("# resolved configuration\n" + config_to_text(config))
    return config


EXIT_CODES = """exit codes:
  0  success
  1  partial failure (some manifest entries failed)
  2  usage error
  3  data, format or configuration error
  4  evaluation failure (all entries failed)"""


def _subcommand(sub, name, help):
    return sub.add_parser(name, help=help, epilog=EXIT_CODES, formatter_class=argparse.RawDescriptionHelpFormatter)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="depthbench",
        description="Depth discretization and evaluation toolkit.",
        epilog=EXIT_CODES,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress and echo the resolved config")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = _subcommand(sub, "boundaries", "print the K+1 bin edges of a scheme")
    _add_scheme_args(p)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--figure", metavar="FILE", help="also render the edges as a PNG figure")

    p = _subcommand(sub, "quantize", "depth to class labels (a value or a 16-bit depth PNG)")
    _add_scheme_args(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--value", type=float, help="single depth in meters; prints its class or IGNORE")
    src.add_argument("--input", metavar="FILE", help="16-bit depth PNG")
    p.add_argument("--output", metavar="FILE", help="8-bit class PNG to write (255 = IGNORE)")

    p = _subcommand(sub, "dequantize", "class labels to depth (a value or an 8-bit class PNG)")
    _add_scheme_args(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--value", type=int, help="single class index; prints its representative depth")
    src.add_argument("--input", metavar="FILE", help="8-bit class PNG")
    p.add_argument("--output", metavar="FILE", help="16-bit depth PNG to write")

    p = _subcommand(sub, "eval", "score predictions listed in a manifest")
    _add_eval_args(p)
    p.add_argument("--prediction-format", choices=("depth", "classes"), help="predictions are depth or class PNGs")

    p = _subcommand(sub, "baseline", "score a non-learned baseline on a manifest's ground truth")
    _add_eval_args(p)
    p.add_argument("--kind", choices=("round-trip", "constant", "row-prior"), default="round-trip")
    p.add_argument("--depth", type=float, help="depth for --kind constant (default: sqrt(alpha*beta))")
    p.add_argument("--table", metavar="FILE", help="row-prior table, one class per line")
    p.add_argument("--fit-manifest", metavar="FILE", help="fit the row prior on this manifest's ground truth")
    p.add_argument("--save-table", metavar="FILE", help="write the fitted row-prior table here")
    p.add_argument("--output-dir", metavar="DIR", help="write predictions and colorized PNGs here")

    p = _subcommand(sub, "colorize", "render a 16-bit depth PNG as RGB (blue is nearer)")
    _add_scheme_args(p)
    p.add_argument("--input", required=True, metavar="FILE", help="16-bit depth PNG")
    p.add_argument("--output", required=True, metavar="FILE", help="RGB PNG to write")
    return parser


def _emit(text):
    sys.stdout.write(text)
    sys.stdout.flush()


def cmd_boundaries(args):
    scheme = _resolve(args).scheme
    if args.format == "json":
        _emit(json.dumps({"scheme": scheme.to_dict(), "boundaries": boundaries(scheme).tolist()}, indent=2) + "\n")
    else:
        _emit(format_boundaries(scheme))
    if args.figure:
        from .report import render_boundaries

        render_boundaries(scheme, args.figure)
    return 0


def cmd_quantize(args):
    config = _resolve(args)
    if args.value is not None:
        label = quantize(args.value, config.scheme)
        _emit(("IGNORE" if label == IGNORE else str(label)) + "\n")
        return 0
    labels = quantize_map(load_depth_u16(args.input, config.scale_divisor, config.zero_is_invalid), config.scheme)
    if args.output:
        save_class_map(labels, args.output)
    ignored = int((labels == IGNORE).sum())
    log.info("quantized %d pixels (%d ignored)", labels.size, ignored)
    return 0


def cmd_dequantize(args):
    config = _resolve(args)
    if args.value is not None:
        _emit(f"{dequantize(args.value, config.scheme):.6f}\n")
        return 0
    depth = dequantize_map(load_class_map(args.input), config.scheme)
    if args.output:
        save_depth_u16(depth, args.output, config.scale_divisor)
    return 0


def _finish_run(args, run, label):
    if args.output:
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        Path(args.output).write_text(run.to_json(generated_at=stamp))
    if args.figures:
        from .report import render_run_summary

        out = Path(args.figures)
        out.mkdir(parents=True, exist_ok=True)
        render_run_summary(run, out / "summary.png", title=label)
    if args.format == "json":
        _emit(run.to_json())
    else:
        if args.verbose:
            _emit(format_table_header() + "\n")
        _emit(run.format_table(label=label, per_image=args.per_image))
    for failure in run.failures:
        print(f"depthbench: entry {failure.entry_id} failed: {failure.error}", file=sys.stderr)
    return run.exit_status


def cmd_eval(args):
    config = _resolve(args)
    manifest = load_manifest(args.manifest, config)
    run = run_eval(manifest, jobs=args.jobs)
    return _finish_run(args, run, args.label or Path(args.manifest).stem)


def _baseline_kind(args, config):
    if args.kind == "round-trip":
        return baselines.RoundTrip()
    if args.kind == "constant":
        if args.depth is None:
            return baselines.constant_for_scheme(config.scheme)
        return baselines.Constant(args.depth)
    if args.table:
        return baselines.load_row_prior(args.table)
    if args.fit_manifest:
        prior = baselines.fit_row_prior(load_manifest(args.fit_manifest, config))
        if args.save_table:
            baselines.save_row_prior(prior, args.save_table)
        return prior
    return baselines.RowPrior()


def cmd_baseline(args):
    config = _resolve(args)
    manifest = load_manifest(args.manifest, config)
    kind = _baseline_kind(args, config)
    run = run_baseline_eval(manifest, kind, output_dir=args.output_dir, jobs=args.jobs, figures=bool(args.figures))
    return _finish_run(args, run, args.label or args.kind)


def cmd_colorize(args):
    config = _resolve(args)
    depth = load_depth_u16(args.input, config.scale_divisor, config.zero_is_invalid)
    save_rgb(colorize(depth, config.scheme), args.output)
    return 0


COMMANDS = {
    "boundaries": cmd_boundaries,
    "quantize": cmd_quantize,
    "dequantize": cmd_dequantize,
    "eval": cmd_eval,
    "baseline": cmd_baseline,
    "colorize": cmd_colorize,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except EvaluationError as exc:
        print(f"depthbench: evaluation failed: {exc}", file=sys.stderr)
        for failure in exc.failures:
            print(f"  entry {failure['id']}: {failure['error']}", file=sys.stderr)
        return exc.exit_code
    except DepthBenchError as exc:
        print(f"depthbench: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
