"""Command-line entry point.

Subcommands:
  run           execute the experiment described by a config file; writes
                per-step CSVs, aggregate CSVs, plot-data CSVs and PNG figures
  validate      parse and validate a config file, reporting the first error
  oracle-check  compare closed forms against brute-force oracles
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import ConfigError, emit_plot_data, load_config, run_experiment

ORACLE_TOL = 1e-8


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seeds:
        config = replace(config, seeds=tuple(int(s) for s in args.seeds.split(",")))
    if args.out:
        config = replace(config, output_dir=args.out)

    summaries = []
    for policy in config.policies:
        print(f"running policy={policy} over {len(config.seeds)} seed(s)...")
        summaries.append(run_experiment(config, policy, jobs=args.jobs))
    written = emit_plot_data(summaries, config.output_dir)
    for name, path in written.items():
        print(f"wrote {name} data: {path}")

    from .report import render_comparison, render_regret

    print(f"wrote figure: {render_comparison(summaries, config.output_dir)}")
    blended = next((s for s in summaries if s.policy == "blender"), summaries[0])
    print(f"wrote figure: {render_regret(blended, config.output_dir)}")
    return 0


def _cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 2
    print(f"ok: env={config.env} mode={config.mode} policies={','.join(config.policies)} "
          f"seeds={len(config.seeds)} horizon={config.horizon}")
    return 0


def _cmd_oracle_check(args) -> int:
    from .oracles import estimator_oracle_deviation, pareto_oracle_deviation

    if args.module == "pareto":
        dev = pareto_oracle_deviation(args.cases, seed=args.seed)
    else:
        dev = estimator_oracle_deviation(args.cases, seed=args.seed)
    print(f"{args.module}: max deviation {dev:.3e} over {args.cases} cases "
          f"(tolerance {ORACLE_TOL:.0e})")
    return 0 if dev <= ORACLE_TOL else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctrlblend")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--seeds", help="comma-separated seed override")
    run.add_argument("--out", help="output directory override")
    run.add_argument("--jobs", type=int, default=1, help="parallel workers across seeds")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="validate a config file")
    val.add_argument("--config", required=True)
    val.set_defaults(func=_cmd_validate)

    orc = sub.add_parser("oracle-check", help="run brute-force oracle suites")
    orc.add_argument("--module", choices=("pareto", "estimator"), required=True)
    orc.add_argument("--cases", type=int, default=1000)
    orc.add_argument("--seed", type=int, default=0)
    orc.set_defaults(func=_cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
