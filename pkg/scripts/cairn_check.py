#!/usr/bin/env python3
"""
Cairn-Check Command Line
Reproducible experiments over the free-group interval calculus, the cairn
models, their level decomposition and the spectral side of the Kazhdan bound.

Exit codes:
    0  every check passed
    1  a verification check failed (the payload carries the counterexample)
    2  usage, parse, configuration or resource error

Every payload is deterministic given the arguments and the seed: JSON is
written with sorted keys and floats rounded to 12 significant digits.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

# Allow running as a plain script from a checkout
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import rich.console  # noqa: E402
import rich.table  # noqa: E402
import structlog  # noqa: E402

from library.cairn import (  # noqa: E402
    CoordinateCairn,
    build_graded,
    build_measure_cairn,
    verify_cairn,
    verify_measure_independence,
)
from library.config import Config, load_config  # noqa: E402
from library.errors import (  # noqa: E402
    CairnCheckError,
    CheckFailed,
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    DecompositionError,
    ParseError,
    ResourceLimitError,
)
from library.freegroup import iter_ball, words_to_json  # noqa: E402
from library.hilbert import check_independence_axioms  # noqa: E402
from library.intervals import (  # noqa: E402
    IntervalSystem,
    parse_interval_literal,
    stabilizer_report,
    verify_interval_statements,
)
from library.log_config import setup_logging  # noqa: E402
from library.repsplit import (  # noqa: E402
    certify_regular_multiple,
    decompose,
    displacement_bound,
    displacement_sweep,
)
from library.spectral import (  # noqa: E402
    cayley_adjacency,
    check_kesten_rows,
    kazhdan_eta,
    kesten_report,
    minimax_displacement,
)
from library.suite import SuiteOptions, run_suite  # noqa: E402

logger = structlog.get_logger("cairn-check")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

# Exceptions that mean "the input or the environment is wrong", not "a check failed"
USAGE_ERRORS = (ParseError, ResourceLimitError, ConfigError, ConvergenceError, ValueError, KeyError)
CHECK_ERRORS = (CheckFailed, ConsistencyError, DecompositionError)


def normalize_floats(value: Any) -> Any:
    """Round every float to 12 significant digits so reruns are byte-identical"""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return float(format(value, ".12g"))
    if isinstance(value, dict):
        return {str(k): normalize_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize_floats(v) for v in value]
    if hasattr(value, "item"):
        return normalize_floats(value.item())
    return value


def render_json(payload: Any) -> str:
    return json.dumps(normalize_floats(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_csv(rows: List[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    if rows:
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(normalize_floats(row))
    return buffer.getvalue()


def render_text(payload: Dict[str, Any], rows: Optional[List[Dict[str, Any]]], title: str) -> str:
    buffer = io.StringIO()
    console = rich.console.Console(file=buffer, width=120, color_system=None)
    if rows:
        table = rich.table.Table(title=title)
        for column in rows[0]:
            table.add_column(str(column))
        for row in normalize_floats(rows):
            table.add_row(*(str(v) for v in row.values()))
    else:
        table = rich.table.Table(title=title, show_header=False)
        table.add_column("key", style="bold")
        table.add_column("value")
        for key, value in sorted(normalize_floats(payload).items()):
            shown = value if isinstance(value, (str, int, float, bool)) else json.dumps(value, sort_keys=True)
            table.add_row(str(key), str(shown))
    console.print(table)
    return buffer.getvalue()


class Emitter:
    """Writes one command's payload in the configured format"""

    def __init__(self, config: Config, stream=None):
        self.config = config
        self.stream = stream

    def emit(self, payload: Dict[str, Any], rows: Optional[List[Dict[str, Any]]] = None,
             default_format: str = "json", title: str = "cairn-check") -> None:
        fmt = self.config.format or default_format
        if fmt == "csv":
            if rows is None:
                raise ConfigError("this command has no tabular output; use --format json or text")
            text = render_csv(rows)
        elif fmt == "text":
            text = render_text(payload, rows, title)
        else:
            text = render_json(payload)

        path = self.config.output_path()
        if path is None:
            (self.stream or sys.stdout).write(text)
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        logger.info("Wrote output", file=str(path), format=fmt)


def _system(args) -> IntervalSystem:
    return IntervalSystem(args.settings.caps.interval_rank)


def _exit_for(passed: bool) -> int:
    return EXIT_OK if passed else EXIT_CHECK_FAILED


# -- intervals ------------------------------------------------------------------

def cmd_intervals(args) -> int:
    system = _system(args)
    out = args.emitter
    if args.action == "gen":
        words = words_to_json(system.base_set(args.n))
        out.emit({"n": args.n, "size": len(words), "elements": words},
                 [{"n": args.n, "word": w} for w in words], title=f"I{args.n}")
        return EXIT_OK
    if args.action == "verify":
        report = verify_interval_statements(args.max_n, system, args.settings.max_consecutive_failures)
        rows = [{"statement": name, "n": r.n, "instances": r.instances,
                 "failures": len(r.failures), "passed": r.passed}
                for name, results in report.statements.items() for r in results]
        out.emit(report.to_dict(), rows, title="interval statements")
        return _exit_for(report.passed)
    if args.action == "subs":
        subs = system.subintervals(system.base_interval(args.n), include_empty=args.include_empty)
        out.emit({"n": args.n, "count": len(subs), "intervals": [I.label() for I in subs]},
                 [{"rank": I.rank, "interval": I.label(), "size": len(I)} for I in subs],
                 title=f"subintervals of I{args.n}")
        return EXIT_OK
    if args.action == "stab":
        report = stabilizer_report(args.max_n, system)
        rows = [{"n": n, "stabilizer": " ".join(words)} for n, words in report["stabilizers"].items()]
        out.emit(report, rows, title="stabilizers")
        return _exit_for(report["trivial"])
    if args.action == "intersect":
        first = parse_interval_literal(args.i, system)
        second = parse_interval_literal(args.j, system)
        meet = system.intersect(first, second)
        out.emit({"i": first.label(), "j": second.label(), "result": meet.label(),
                  "elements": words_to_json(meet.elements)}, title="intersection")
        return EXIT_OK
    raise ValueError(f"unknown intervals action {args.action}")


# -- cairn --------------------------------------------------------------------------

def _build_model(args, system: IntervalSystem):
    caps = args.settings.caps
    if args.model == "graded":
        return build_graded(args.window, system, seed=args.settings.seed, max_ambient_dim=caps.ambient_dim)
    if args.model == "coordinate":
        if args.ball:
            if args.window > caps.ball_radius:
                raise ResourceLimitError("ball radius", args.window, caps.ball_radius)
            return CoordinateCairn(iter_ball(args.window, caps.ball_radius), system, args.fiber_dim,
                                   max_ambient_dim=caps.ambient_dim)
        return CoordinateCairn.from_base_interval(args.window, system, args.fiber_dim,
                                                  max_ambient_dim=caps.ambient_dim)
    return build_measure_cairn(args.window, system, caps.measure_coords)


def cmd_cairn(args) -> int:
    system = _system(args)
    model = _build_model(args, system)
    out = args.emitter
    if args.action == "build":
        out.emit(model.summary(), title=f"{args.model} cairn")
        return EXIT_OK
    if args.model == "measure":
        report = verify_measure_independence(model, args.settings.max_consecutive_failures)
        out.emit(report.to_dict(), title="measure cairn")
        return _exit_for(report.passed)
    tol = args.tol if args.tol is not None else args.settings.tolerances.relation
    report = verify_cairn(model, tol, args.settings.workers)
    rows = [c.to_dict() for c in report.checks]
    for row in rows:
        row.setdefault("letter", "")
    out.emit(report.to_dict(), rows, title=f"{args.model} cairn checks")
    return _exit_for(report.passed)


# -- split ----------------------------------------------------------------------------

def cmd_split(args) -> int:
    settings = args.settings
    out = args.emitter
    if args.action == "displacement":
        if args.sweep:
            results = displacement_sweep(args.radius, seed=settings.seed, cap=settings.caps.spectral_radius)
        else:
            results = [displacement_bound(args.radius, seed=settings.seed, cap=settings.caps.spectral_radius)]
        rows = [r.to_dict() for r in results]
        payload = dict(rows[-1]) if not args.sweep else {"rows": rows}
        passed = all(r.passed for r in results)
        if args.minimax:
            search = minimax_displacement(args.radius, args.restarts, seed=settings.seed)
            payload["minimax"] = search.to_dict()
            passed = passed and search.passed
        payload["pass"] = passed
        out.emit(payload, rows, title="displacement")
        return _exit_for(passed)

    system = _system(args)
    c = build_graded(args.window, system, seed=settings.seed, max_ambient_dim=settings.caps.ambient_dim)
    tol = settings.tolerances.decomposition
    orthogonality_tol = settings.tolerances.orthogonality
    if args.action == "run":
        d = decompose(c, tol, strict=True, seed=settings.seed, workers=settings.workers,
                      orthogonality_tol=orthogonality_tol)
        rows = [{"n": level.n, "dim": level.dim, "block_count": len(level.blocks)} for level in d.levels]
        out.emit(d.to_dict(), rows, title="levels")
        return EXIT_OK
    d = decompose(c, tol, strict=False, seed=settings.seed, workers=settings.workers,
                  orthogonality_tol=orthogonality_tol)
    certificate = certify_regular_multiple(d, tol, settings.workers)
    rows = [{"n": level.n, "valid": level.valid, "reachable": level.reachable,
             "translates": level.translates, "residual": level.block_permutation_residual}
            for level in certificate.levels]
    out.emit(certificate.to_dict(), rows, title="certificate")
    return _exit_for(certificate.valid)


# -- spectral ---------------------------------------------------------------------------

def cmd_spectral(args) -> int:
    settings = args.settings
    out = args.emitter
    if args.action == "eta":
        out.emit(kazhdan_eta().to_dict(), title="Kazhdan constant")
        return EXIT_OK
    if args.action == "edges":
        edges = cayley_adjacency(args.radius, settings.caps.spectral_radius).to_edge_list()
        path = settings.output_path()
        if path is None:
            (out.stream or sys.stdout).write(edges)
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(edges)
        return EXIT_OK
    rows = kesten_report(args.max_radius, settings.caps.spectral_radius, settings.seed)
    problems = check_kesten_rows(rows, max_gap_at_10=settings.tolerances.max_gap_at_10)
    table = [row.to_dict() for row in rows]
    out.emit({"rows": table, "problems": problems, "pass": not problems}, table,
             default_format="csv", title="Kesten sweep")
    return _exit_for(not problems)


# -- hilbert ------------------------------------------------------------------------------

def cmd_hilbert(args) -> int:
    settings = args.settings
    tol = args.tol if args.tol is not None else settings.tolerances.decomposition
    report = check_independence_axioms(args.trials, args.dim, settings.seed, tol)
    rows = [{"axiom": name, **{k: v for k, v in tally.to_dict().items() if k != "witnesses"}}
            for name, tally in report.axioms.items()]
    args.emitter.emit(report.to_dict(), rows, title="independence axioms")
    return _exit_for(report.passed)


# -- suite and report -----------------------------------------------------------------------

def cmd_suite(args) -> int:
    options = SuiteOptions.quick() if args.quick else SuiteOptions()
    results = run_suite(args.settings, options)
    rows = [{"section": name, "status": s["status"], "total_checks": s["total_checks"],
             "failed_checks": s["failed_checks"]} for name, s in results["sections"].items()]
    args.emitter.emit(results, rows, title="suite")
    return _exit_for(not results["summary"]["failed_sections"])


def cmd_report(args) -> int:
    from scripts.report_generator import ReportGenerator

    if not args.output:
        raise ConfigError("report needs --output for the HTML file")
    if not os.path.isfile(args.results):
        raise ConfigError(f"results file {args.results} does not exist")
    generator = ReportGenerator(args.results, args.output, logger)
    if not generator.load_results():
        return EXIT_USAGE
    generator.generate_html_report()
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", help="YAML configuration file")
    common.add_argument("--format", "-f", choices=("json", "csv", "text"),
                        help="Output format (default depends on the command)")
    common.add_argument("--output", "-o", help="Write the payload to this file instead of stdout")
    common.add_argument("--seed", "-s", type=int, help="Random seed (default 0)")
    common.add_argument("--workers", "-w", type=int, help="Worker threads for pairwise checks")
    common.add_argument("--log-file", "-l", help="Log file path (JSON lines)")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="cairn-check",
        description="Cairn-Check: free-group intervals, cairn models and the Kazhdan bound",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Examples:\n"
               "  cairn-check intervals gen --n 2\n"
               "  cairn-check intervals intersect --i I3 --j 'b^-1*I3'\n"
               "  cairn-check cairn verify --model graded --window 4 --seed 7\n"
               "  cairn-check split run --window 3 --format text\n"
               "  cairn-check spectral kesten --max-radius 10\n",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    intervals = commands.add_parser("intervals", help="Interval chain and its statements")
    actions = intervals.add_subparsers(dest="action", required=True)
    p = actions.add_parser("gen", parents=[common], help="Elements of I_n")
    p.add_argument("--n", type=int, required=True)
    p = actions.add_parser("verify", parents=[common], help="Exhaustive interval statements up to max-n")
    p.add_argument("--max-n", type=int, required=True)
    p = actions.add_parser("subs", parents=[common], help="Subintervals of I_n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--include-empty", action="store_true")
    p = actions.add_parser("stab", parents=[common], help="Stabilizers of I_0..I_max-n")
    p.add_argument("--max-n", type=int, required=True)
    p = actions.add_parser("intersect", parents=[common], help="Intersect two interval literals")
    p.add_argument("--i", required=True, help='Interval literal, e.g. "I3" or "b^-1*I3"')
    p.add_argument("--j", required=True)
    intervals.set_defaults(handler=cmd_intervals)

    cairn = commands.add_parser("cairn", help="Build or verify a cairn model")
    actions = cairn.add_subparsers(dest="action", required=True)
    for name in ("build", "verify"):
        p = actions.add_parser(name, parents=[common])
        p.add_argument("--model", choices=("graded", "coordinate", "measure"), required=True)
        p.add_argument("--window", type=int, required=True, help="Window rank (ball radius with --ball)")
        p.add_argument("--fiber-dim", type=int, default=1, help="Coordinate model fiber dimension")
        p.add_argument("--ball", action="store_true", help="Coordinate model over ball(window)")
        p.add_argument("--tol", type=float, help="Relation tolerance (default from config)")
    cairn.set_defaults(handler=cmd_cairn)

    split = commands.add_parser("split", help="Level decomposition and certificate")
    actions = split.add_subparsers(dest="action", required=True)
    p = actions.add_parser("run", parents=[common], help="Decompose the graded model")
    p.add_argument("--window", type=int, required=True)
    p = actions.add_parser("certify", parents=[common], help="Certificate for the graded model")
    p.add_argument("--window", type=int, required=True)
    p = actions.add_parser("displacement", parents=[common], help="Displacement bound on ball(R)")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--sweep", action="store_true", help="Every radius 0..R")
    p.add_argument("--minimax", action="store_true", help="Also run the minimax vector search")
    p.add_argument("--restarts", type=int, default=50)
    split.set_defaults(handler=cmd_split)

    spectral = commands.add_parser("spectral", help="Cayley ball spectra")
    actions = spectral.add_subparsers(dest="action", required=True)
    p = actions.add_parser("kesten", parents=[common], help="Top eigenvalue for radius 1..R (CSV)")
    p.add_argument("--max-radius", type=int, required=True)
    actions.add_parser("eta", parents=[common], help="Kazhdan constant")
    p = actions.add_parser("edges", parents=[common], help="Edge list of the Cayley ball")
    p.add_argument("--radius", type=int, required=True)
    spectral.set_defaults(handler=cmd_spectral)

    hilbert = commands.add_parser("hilbert", help="Relative orthogonality axioms")
    actions = hilbert.add_subparsers(dest="action", required=True)
    p = actions.add_parser("axioms", parents=[common], help="Randomized axiom suite")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--dim", type=int, default=12)
    p.add_argument("--tol", type=float)
    hilbert.set_defaults(handler=cmd_hilbert)

    p = commands.add_parser("suite", parents=[common], help="Run every acceptance check")
    p.add_argument("--quick", action="store_true", help="Small instances")
    p.set_defaults(handler=cmd_suite)

    p = commands.add_parser("report", parents=[common], help="Render suite results to HTML")
    p.add_argument("--results", "-r", required=True, help="JSON file written by the suite command")
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None, stream=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logging(args.log_file, logging.DEBUG if args.verbose else logging.INFO)
    log = logger.bind(command=args.command, action=getattr(args, "action", None))

    try:
        args.settings = load_config(args.config, {
            "seed": args.seed,
            "format": args.format,
            "output": None if args.command == "report" else args.output,
            "workers": args.workers,
        })
        args.emitter = Emitter(args.settings, stream)
        code = args.handler(args)
    except CHECK_ERRORS as e:
        log.error("Check failed", error=str(e), error_type=type(e).__name__)
        payload = {"error": type(e).__name__, "message": str(e)}
        if isinstance(e, DecompositionError):
            payload["worst"] = e.worst
        if isinstance(e, CheckFailed):
            payload["counterexample"] = e.counterexample
        (stream or sys.stdout).write(render_json(payload))
        return EXIT_CHECK_FAILED
    except USAGE_ERRORS as e:
        log.error("Usage or resource error", error=str(e), error_type=type(e).__name__)
        sys.stderr.write(f"cairn-check: {e}\n")
        return EXIT_USAGE
    except CairnCheckError as e:
        log.error("Unexpected cairn-check error", error=str(e))
        return EXIT_USAGE

    log.info("Command finished", exit_code=code)
    return code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
