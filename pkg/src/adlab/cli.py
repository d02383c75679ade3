"""Command-line entry point: run scenario presets/configs, explain filters."""

from __future__ import annotations

import argparse
import sys

from .scenarios import FILTER_EXPLANATIONS, PRESETS, build_scenario, run_scenario


def _cmd_run(args) -> int:
    try:
        config = build_scenario(args.scenario, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    config.master_seed = args.seed
    try:
        report = run_scenario(config, args.out)
    except OSError as exc:
        print(f"error: cannot write to {args.out}: {exc}", file=sys.stderr)
        return 1
    print(f"scenario {report.name}: {report.n_kept}/{report.n_tests} tests kept")
    for reason, count in sorted(report.dropped.items()):
        print(f"  dropped {count} ({reason})")
    overall = report.summary["uniformity"]["overall"]
    print(f"  pooled p-values: N={overall['N']}  KS D={overall['KS D']:.4f} "
          f"(p={overall['KS p']:.4g})  CvM Omega={overall['CvM Omega']:.4g} "
          f"(p={overall['CvM p']:.4g})")
    print(f"  %p<=0.05={overall['% p<=0.05']:.2f}  "
          f"%|SMD|>0.20={overall['% |SMD|>0.20']:.2f}")
    for kind, path in sorted(report.files.items()):
        print(f"  wrote {path}")
    return 0


def _cmd_filters(args) -> int:
    if args.explain:
        print("Stepwise configuration filters (a test is kept only if every")
        print("enabled filter passes); drop reason codes:")
        for code, flag, text in FILTER_EXPLANATIONS:
            print(f"  {code:<18} [{flag}] {text}")
        return 0
    print("use --explain to list the filter ladder")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adlab",
        description="Deterministic ad-delivery experiment simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a preset or JSON scenario config")
    p_run.add_argument("scenario",
                       help=f"preset name ({', '.join(sorted(PRESETS))}) or config.json")
    p_run.add_argument("--seed", type=int, default=0, help="master seed")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_filters = sub.add_parser("filters", help="describe the sample filters")
    p_filters.add_argument("--explain", action="store_true")
    p_filters.set_defaults(func=_cmd_filters)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
