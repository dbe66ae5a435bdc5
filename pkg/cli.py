# cli.py: command-line surface: generate, run, summarize, check-assumptions
import argparse
import logging
import sys

from dotenv import load_dotenv

import presets
from config import default_workers, load_any_scenario, load_experiment
from errors import ConfigError, InputError, InvariantViolation
from harness import assumption_sweep, run_sweep, summarize, summary_table
from logging_setup import setup_logging
from storage import read_report_csv, write_report_csv, write_scenario_json, write_summary_csv

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def cmd_generate(args) -> int:
    scenario = presets.PRESETS[args.preset](seed=args.seed)
    write_scenario_json(scenario, args.out)
    print(f"Scenario '{args.preset}' written to {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_experiment(args.config)
    out = args.out or cfg.output_path
    workers = args.workers if args.workers is not None else default_workers()
    report = run_sweep(cfg, workers=workers)
    write_report_csv(report, out)
    if report.all_failed:
        logger.error(f"[CLI] every estimator call failed; see error_code column in {out}")
        return EXIT_NUMERICAL
    print(f"{len(report.rows)} rows written to {out}")
    return EXIT_OK


def cmd_summarize(args) -> int:
    try:
        report = read_report_csv(args.inp)
    except FileNotFoundError:
        raise ConfigError(f"report not found: {args.inp}") from None
    summary = summarize(report)
    print(summary_table(summary))
    if args.csv:
        write_summary_csv(summary, args.csv)
    return EXIT_OK


def cmd_check_assumptions(args) -> int:
    scenario = load_any_scenario(args.config)
    dims = args.d or [1_000, 10_000, 100_000]
    rows = assumption_sweep(scenario, sorted(dims), args.trials)
    print(f"{'d':>8}  {'norm_dev':>12}  {'cross_dev':>12}  {'signal_noise_dev':>16}")
    for r in rows:
        print(f"{r['d']:>8}  {r['median_norm_dev']:>12.6g}  {r['median_cross_dev']:>12.6g}  "
              f"{r['median_signal_noise_dev']:>16.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgram",
        description="Debiased Gaussian kernel Gram matrices from noisy high-dimensional data.")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (env KGRAM_LOG_LEVEL)")
    parser.add_argument("--plain-logs", action="store_true", help="Human-readable logs instead of JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="Write a preset scenario as JSON")
    p.add_argument("--preset", required=True, choices=sorted(presets.PRESETS))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="Run a Monte Carlo sweep and write the CSV report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="Defaults to the config's output_path")
    p.add_argument("--workers", type=int, default=None, help="Concurrent trials (env KGRAM_WORKERS)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("summarize", help="Summarize a CSV report")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--csv", default=None, help="Also write the summary table as CSV")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("check-assumptions", help="Empirical noise-limit statistics per d")
    p.add_argument("--config", required=True, help="Scenario JSON or experiment config")
    p.add_argument("--d", type=int, action="append", help="Dimension (repeatable)")
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_check_assumptions)
    return parser


def main(argv=None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, json_logs=False if args.plain_logs else None)
    try:
        return args.func(args)
    except (ConfigError, InputError, InvariantViolation, OSError) as e:
        logger.error(f"[CLI] {args.command}: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
