"""Command-line entry point: ``analyze``, ``trace``, ``plot`` and ``presets``.

Exit codes: 0 on success, 1 on parse or validation errors, 2 when every
requested branch seed failed numerically (or the analysis itself failed).
"""

import argparse
import json
import sys
from pathlib import Path

from .errors import BcfgError, EmptyBranch, ParseError, ValidationError
from .plotting import KINDS, emit_plot
from .presets import PRESETS
from .records import BranchRecord
from .runner import run_analyze, run_trace
from .scenario import BUILTIN_SCENARIOS, apply_overrides, builtin_scenario, load_scenario

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--out-dir", default=default("bcfg-out"),
                        help="directory for branch CSVs, plots and reports (default: bcfg-out)")
    parser.add_argument("--seed", type=int, default=default(None),
                        help="seed for the optional random probe at turning points")
    parser.add_argument("--override", action="append", default=default([]), metavar="KEY=VALUE",
                        help="override a scenario key, e.g. delta=0.005 or s_max=5 (repeatable)")


def build_parser():
    parser = argparse.ArgumentParser(prog="bcfg", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("analyze", parents=[common], help="spectrum, candidates and spectral flow")
    p.add_argument("scenario", help="scenario file or built-in scenario name")

    p = sub.add_parser("trace", parents=[common], help="switch onto and trace every branch")
    p.add_argument("scenario", help="scenario file or built-in scenario name")
    p.add_argument("--workers", type=int, default=1, help="branches traced concurrently")
    p.add_argument("--probe", action="store_true",
                   help="run the seeded random-direction probe at turning points")

    p = sub.add_parser("plot", parents=[common], help="render a branch CSV as SVG")
    p.add_argument("branch", help="branch CSV written by 'trace'")
    p.add_argument("--kind", choices=KINDS, required=True)

    p = sub.add_parser("presets", parents=[common], help="list presets and built-in scenarios")
    p.add_argument("--list", action="store_true", help="list presets (the default action)")
    return parser


def resolve_scenario(arg, overrides=()):
    path = Path(arg)
    if path.is_file():
        spec = load_scenario(path.read_text())
    elif arg in BUILTIN_SCENARIOS:
        spec = builtin_scenario(arg)
    else:
        raise ParseError(f"{arg!r} is neither a scenario file nor a built-in scenario")
    if overrides:
        spec = apply_overrides(spec, overrides)
    return spec


def _analyze(args):
    spec = resolve_scenario(args.scenario, args.override)
    report = run_analyze(spec)
    print(report.text())
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{spec.name}_analysis.json"
    path.write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n")
    print(f"report written to {path}")
    return EXIT_OK


def _trace(args):
    overrides = list(args.override)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.probe:
        overrides.append("random_probe=true")
    spec = resolve_scenario(args.scenario, overrides)
    summary = run_trace(spec, out_dir=args.out_dir, workers=args.workers)
    print(summary.text())
    for e in summary.branches:
        print(f"wrote {e.path}")
    return summary.exit_code()


def _plot(args):
    record = BranchRecord.read(args.branch)
    svg = emit_plot(record, args.kind)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{Path(args.branch).stem}_{args.kind}.svg"
    path.write_text(svg)
    print(f"wrote {path}")
    return EXIT_OK


def _presets(args):
    print("presets:")
    for tag, text in PRESETS.items():
        print(f"  {tag:16s} {text}")
    print("built-in scenarios:")
    for name, (tag, masses) in BUILTIN_SCENARIOS.items():
        print(f"  {name:16s} preset {tag}, masses {list(masses)}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; those are input errors here
        return EXIT_INPUT if exc.code == 2 else exc.code
    handlers = {"analyze": _analyze, "trace": _trace, "plot": _plot, "presets": _presets}
    try:
        return handlers[args.verb](args)
    except (ParseError, ValidationError, EmptyBranch, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BcfgError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
