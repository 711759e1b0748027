"""
Command-line front end.

Sub-commands:
    build          write a graph file (and optionally its default certificate)
    certify        run the certification pipeline on G □ C_2k or G □ K2
    oracle         exhaustive minimum forcing number of a small graph
    verify-suite   run the verification grid

Flags given on the command line override data/settings.json, which overrides
the defaults in config.py.
"""

import argparse
import logging
import time
from typing import List, Optional, Sequence

import humanfriendly

import config
from modules.certificate_registry import get_certificate_registry
from modules.certificates import write_certificate
from modules.errors import (
    ExpressionParseError,
    ForcingToolError,
    GraphConstructionError,
    PreconditionError,
)
from modules.graph_families import graph_to_text, parse_family_expression, write_graph_file
from modules.pipeline import CertifyContext, OracleContext, run_certify, run_oracle
from modules.report_manager import certify_report, oracle_report, suite_report, write_report
from modules.settings_manager import SettingsManager
from modules.verify_suite import build_cases, group_summary, parse_grid, run_suite, summary_table

logger = logging.getLogger(__name__)


def exit_code_for(error: Optional[BaseException]) -> int:
    """Map a failure to the exit-code contract."""
    if error is None:
        return config.EXIT_VERIFICATION_FAILED
    if isinstance(error, ExpressionParseError):
        return config.EXIT_PARSE_ERROR
    if isinstance(error, (PreconditionError, GraphConstructionError)):
        return config.EXIT_PRECONDITION
    return config.EXIT_VERIFICATION_FAILED


def _runner_exit_code(runner) -> int:
    failed = runner.failed_stage
    if failed is None:
        return config.EXIT_OK
    return exit_code_for(failed.error)


# ─────────────────────────────────────────────────────────
# Parser
# ─────────────────────────────────────────────────────────
def build_parser() -> argparse.ArgumentParser:
    registry = get_certificate_registry()
    epilog = (
        "fields: Q | GFp:<p> | Qsqrt:<d>\n"
        f"{registry.help_text()}\n\n"
        f"exit codes: {config.EXIT_OK} ok, {config.EXIT_PARSE_ERROR} parse error, "
        f"{config.EXIT_PRECONDITION} precondition failure, {config.EXIT_VERIFICATION_FAILED} verification failure, "
        f"{config.EXIT_BUDGET_TRUNCATED} budget truncation"
    )
    parser = argparse.ArgumentParser(
        prog="main.py",
        description=f"{config.APP_NAME} {config.VERSION}: forcing numbers of bipartite products",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {config.VERSION}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--settings", default=config.SETTINGS_FILE, help="settings file (default: %(default)s)")
    common.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    common.add_argument("--seed", type=int, help="seed of randomized searches and checks")
    common.add_argument("--out", help="write the result document to this path")

    parallel = argparse.ArgumentParser(add_help=False)
    parallel.add_argument("--jobs", type=int, help="worker processes for independent sub-tasks")

    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", parents=[common], help="write a graph file",
                           epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    build.add_argument("expression", help='family expression, e.g. "prod(Kmn:2,2;C:6)"')
    build.add_argument("--certificate", help="also write the family's default certificate to this path")
    build.add_argument("--field", help="field of the certificate (default: per family)")
    build.add_argument("--prism", action="store_true", help="write a row-inverse pair instead of an involutory certificate")

    certify = sub.add_parser("certify", parents=[common], help="certify f(G □ C_2k) or f(G □ K2)",
                             epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    certify.add_argument("expression", nargs="?", default="", help="base graph G (optional with --certificate)")
    target = certify.add_mutually_exclusive_group()
    target.add_argument("--k", type=int, help="certify G □ C_2k")
    target.add_argument("--prism", action="store_true", help="certify G □ K2")
    certify.add_argument("--field", help="field of the certificate (default: per family)")
    certify.add_argument("--certificate", help="use this certificate file instead of the registry")

    oracle = sub.add_parser("oracle", parents=[common, parallel], help="exhaustive minimum forcing number",
                            epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    oracle.add_argument("expression", help="graph expression")
    oracle.add_argument("--cap", type=int, help="stop after this many perfect matchings (0 = unlimited)")
    oracle.add_argument("--known-lower", type=int, help="stop once a matching reaches this lower bound")

    suite = sub.add_parser("verify-suite", parents=[common, parallel], help="run the verification grid")
    suite.add_argument("--grid", help='comma-separated groups, "default" or "all"')
    return parser


# ─────────────────────────────────────────────────────────
# Commands
# ─────────────────────────────────────────────────────────
def cmd_build(args, settings: SettingsManager) -> int:
    graph = parse_family_expression(args.expression)
    if args.out:
        write_graph_file(graph, args.out)
    else:
        print(graph_to_text(graph), end="")
    print(f"{graph.name}: |V| = {graph.n_vertices}, |E| = {graph.n_edges}, "
          f"|X| = {len(graph.x_vertices)}, |Y| = {len(graph.y_vertices)}")
    if args.certificate:
        registry = get_certificate_registry()
        if args.prism:
            candidate = registry.build_pair(args.expression, args.field)
        else:
            candidate = registry.build_involutory(args.expression, args.field)
        write_certificate(candidate, args.certificate)
        print(f"certificate over {candidate.field.descriptor}: {candidate.provenance}")
    return config.EXIT_OK


def cmd_certify(args, settings: SettingsManager, argv: Sequence[str]) -> int:
    if not args.expression and not args.certificate:
        raise PreconditionError("certify needs a graph expression or --certificate")
    context = CertifyContext(
        expression=args.expression,
        k=args.k,
        prism=args.prism,
        field=args.field,
        certificate_path=args.certificate,
        cross_check_primes=settings.cross_check_primes(),
    )
    runner = run_certify(context)
    write_report(certify_report(context, runner, ["main.py", *argv]), args.out)

    code = _runner_exit_code(runner)
    if code != config.EXIT_OK:
        failed = runner.failed_stage
        print(f"FAILED at stage '{failed.name}': {failed.message}")
        return code
    report = context.forcing
    print(f"{report.graph}: {report.lower_bound} <= f <= {report.upper_bound} ({report.verdict})")
    return config.EXIT_OK if report.exact is not None else config.EXIT_VERIFICATION_FAILED


def cmd_oracle(args, settings: SettingsManager, argv: Sequence[str]) -> int:
    cap = settings.matching_cap() if args.cap is None else (args.cap or None)
    context = OracleContext(
        expression=args.expression,
        cap=cap,
        jobs=args.jobs or settings.jobs(),
        known_lower=args.known_lower,
    )
    runner = run_oracle(context)
    write_report(oracle_report(context, runner, ["main.py", *argv]), args.out)

    code = _runner_exit_code(runner)
    if code != config.EXIT_OK:
        failed = runner.failed_stage
        print(f"FAILED: {failed.message}")
        return code
    report = context.forcing
    for matching, value in report.table:
        logger.debug(f"{matching}: {value}")
    if report.exact is None:
        print(f"{report.graph}: f <= {report.upper_bound} after {report.matchings_examined} matchings (TRUNCATED)")
        return config.EXIT_BUDGET_TRUNCATED
    print(f"{report.graph}: f = {report.exact} ({report.closure}, {report.matchings_examined} matchings)")
    return config.EXIT_OK


def cmd_verify_suite(args, settings: SettingsManager, argv: Sequence[str]) -> int:
    try:
        groups = parse_grid(args.grid)
    except ValueError as exc:
        raise ExpressionParseError(str(exc)) from exc
    cases = build_cases(groups, settings.suite_settings(), settings.seed())
    logger.info(f"Running {len(cases)} cases in groups {', '.join(groups)}")
    start = time.perf_counter()
    rows = run_suite(cases, jobs=args.jobs or settings.jobs())
    elapsed = time.perf_counter() - start

    print(summary_table(rows)[["group", "case", "passed", "seconds"]].to_string(index=False))
    print()
    print(group_summary(rows).to_string(index=False))
    failures = [row for row in rows if not row["passed"]]
    for row in failures:
        print(f"FAILED [{row['group']}] {row['case']}: {row['detail']}\n  reproduce: {row['command']}")
    print(f"{len(rows) - len(failures)}/{len(rows)} passed in {humanfriendly.format_timespan(elapsed)}")

    write_report(suite_report(rows, ["main.py", *argv], elapsed), args.out)
    return config.EXIT_OK if not failures else config.EXIT_VERIFICATION_FAILED


COMMANDS = {
    "build": lambda args, settings, argv: cmd_build(args, settings),
    "certify": cmd_certify,
    "oracle": cmd_oracle,
    "verify-suite": cmd_verify_suite,
}


# ─────────────────────────────────────────────────────────
# Dispatch
# ─────────────────────────────────────────────────────────
def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    return build_parser().parse_args(list(argv))


def log_level(args, settings: SettingsManager) -> str:
    return "DEBUG" if args.verbose else settings.log_level()


def execute(args: argparse.Namespace, settings: SettingsManager, argv: List[str]) -> int:
    """Run one parsed command and return its exit code."""
    if args.seed is not None:
        settings.override_seed(args.seed)
    get_certificate_registry().configure(
        search_prime=settings.search_prime(),
        search_trials=settings.search_trials(),
        seed=settings.seed(),
    )
    try:
        return COMMANDS[args.command](args, settings, argv)
    except ForcingToolError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}")
        return exit_code_for(exc)
