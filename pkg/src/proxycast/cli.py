"""Command-line driver.

Subcommands: rank, forecast, report, run (all three in sequence). Every config
key is overridable with a flag of the same name; exit codes are 0 success,
1 usage/config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields

from .config import KEY_TO_SECTION, RunConfig, load_config
from .errors import ConfigError, DataError, NumericError
from .pipeline import run_forecast, run_rank
from .reports import render_chart, write_forecast_reports, write_ranking_reports

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for data errors.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="INI config file")
    defaults = RunConfig()
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "offline":
            parser.add_argument(flag, action="store_true", default=None,
                                help="forbid cold-cache network fetches")
            continue
        section = KEY_TO_SECTION[f.name]
        parser.add_argument(
            flag,
            metavar="V",
            default=None,
            help=f"[{section}] {f.name} (default: {getattr(defaults, f.name)!r})",
        )


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {}
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is None:
            continue
        overrides[f.name] = "true" if value is True else str(value)
    config = load_config(args.config, overrides)
    config.validate()
    return config


def _cmd_rank(config: RunConfig) -> int:
    outcome = run_rank(config)
    paths = write_ranking_reports(outcome, config.out_dir())
    for p in paths:
        print(p)
    print(f"winner: {outcome.consensus.winner}")
    return EXIT_OK


def _cmd_forecast(config: RunConfig) -> int:
    outcome = run_forecast(config)
    paths = write_forecast_reports(outcome, config.out_dir())
    for p in paths:
        print(p)
    m = outcome.test_metrics
    print(
        f"proxy: {outcome.proxy_id}  test rmse: {m.rmse:.4f}  mae: {m.mae:.4f}  "
        f"r2: {m.r2 if m.r2 is None else round(m.r2, 4)}"
    )
    return EXIT_OK


def _cmd_report(config: RunConfig) -> int:
    chart = render_chart(config.out_dir())
    if chart is None:
        print("chart omitted (empty test window)")
    else:
        print(chart)
    return EXIT_OK


def _cmd_run(config: RunConfig) -> int:
    rank_outcome = run_rank(config)
    write_ranking_reports(rank_outcome, config.out_dir())
    forecast_outcome = run_forecast(config, proxy_id=rank_outcome.consensus.winner)
    write_forecast_reports(forecast_outcome, config.out_dir())
    chart = render_chart(config.out_dir())
    print(f"winner: {rank_outcome.consensus.winner}")
    m = forecast_outcome.test_metrics
    print(
        f"test rmse: {m.rmse:.4f}  mae: {m.mae:.4f}  "
        f"r2: {m.r2 if m.r2 is None else round(m.r2, 4)}"
    )
    print(f"outputs in {config.out_dir()}" + ("" if chart else " (chart omitted)"))
    return EXIT_OK


_COMMANDS = {
    "rank": _cmd_rank,
    "forecast": _cmd_forecast,
    "report": _cmd_report,
    "run": _cmd_run,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="proxycast", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (
        ("rank", "rank candidates and select the consensus proxy"),
        ("forecast", "train on the proxy and emit the interval forecast"),
        ("report", "render the chart for prior forecast outputs"),
        ("run", "rank, forecast, and report in sequence"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_config_flags(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = _config_from_args(args)
        return _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"proxycast: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"proxycast: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"proxycast: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
