#!/usr/bin/env python3
"""Command-line front end: check, sld, compile, run, bench and version."""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src import __version__
from src.application.bench_service import (
    CHAIN_PROGRAM,
    CHAIN_QUERY,
    ENGINES,
    BenchService,
)
from src.application.bottomup import sorted_answers
from src.application.magic import magic_transform
from src.application.sld_interpreter import SLDTree, TreeLimits, build_tree
from src.application.slddb_compiler import ExploreLimits, explore
from src.application.slddb_emitter import emit_rules, export_dot
from src.application.slddb_states import Granularity
from src.domain.analysis import classify_recursion, validate
from src.domain.datalog import Database, Program
from src.domain.errors import SlddbError
from src.infrastructure.fact_loader import load_csv_facts, load_fact_file, merge_databases, parse_csv_spec
from src.infrastructure.parser import parse_program, parse_query
from src.infrastructure.report_writer import RENDERERS
from src.infrastructure.settings import Settings

settings = Settings.from_env()

logging.basicConfig(
    level=getattr(logging, settings.log_level, logging.WARNING),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

logger = logging.getLogger(__name__)


class InvalidProgram(Exception):
    """The program file parsed but failed validation."""
    pass


def _positive_ints(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or any(value < 1 for value in values):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def _engines(text: str) -> List[str]:
    engines = [part.strip() for part in text.split(",") if part.strip()]
    unknown = [engine for engine in engines if engine not in ENGINES]
    if not engines or unknown:
        raise argparse.ArgumentTypeError(f"engines must be among {', '.join(ENGINES)}, got {text!r}")
    return engines


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slddb", description="SLD resolution on a bottom-up machine")
    commands = parser.add_subparsers(dest="command", required=True)

    def program_args(sub: argparse.ArgumentParser, query_required: bool = True) -> None:
        sub.add_argument("program", help="Datalog program file")
        sub.add_argument("--query", required=query_required, help='query text, e.g. "?- path(0, A)."')

    def data_args(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--facts", action="append", default=[], help="fact file (repeatable)")
        sub.add_argument("--facts-csv", action="append", default=[], metavar="PRED:FILE",
                         help="headerless CSV file of PRED facts (repeatable)")

    check = commands.add_parser("check", help="validate a program")
    check.add_argument("program")
    check.add_argument("--recursion", action="store_true", help="print the recursion class of each predicate")

    sld = commands.add_parser("sld", help="answer a query with the SLD interpreter")
    program_args(sld)
    data_args(sld)
    sld.add_argument("--tree", action="store_true", help="print the SLD tree instead of the answers")
    sld.add_argument("--stats", action="store_true")
    sld.add_argument("--max-depth", type=int, default=settings.max_depth)
    sld.add_argument("--max-nodes", type=int, default=settings.max_nodes)

    compile_ = commands.add_parser("compile", help="compile program and query to guarded rules")
    program_args(compile_)
    compile_.add_argument("--granularity", choices=[g.value for g in Granularity], default=Granularity.MAXIMAL.value)
    compile_.add_argument("--emit", choices=["rules", "dot", "magic"], default="rules")
    compile_.add_argument("--force", action="store_true", help="compile despite left recursion or IDB facts")
    compile_.add_argument("--max-states", type=int, default=settings.max_states)
    compile_.add_argument("--closure-bound", type=int, default=settings.closure_bound)
    compile_.add_argument("--max-params", type=int, default=settings.max_params)
    compile_.add_argument("--max-cases", type=int, default=settings.max_cases)

    run = commands.add_parser("run", help="answer a query with a bottom-up engine")
    program_args(run)
    data_args(run)
    run.add_argument("--engine", choices=[e for e in ENGINES if e != "sld"], default="slddb")
    run.add_argument("--stats", action="store_true", help="print key=value statistics after the answers")
    run.add_argument("--force", action="store_true")
    run.add_argument("--max-states", type=int, default=settings.max_states)
    run.add_argument("--closure-bound", type=int, default=settings.closure_bound)
    run.add_argument("--max-params", type=int, default=settings.max_params)
    run.add_argument("--max-cases", type=int, default=settings.max_cases)

    bench = commands.add_parser("bench", help="compare engines on generated chains")
    bench.add_argument("generator", choices=["chain"])
    bench.add_argument("--n", type=_positive_ints, default=[3, 10], help="comma-separated chain lengths")
    bench.add_argument("--engines", type=_engines, default=list(ENGINES))
    bench.add_argument("--format", choices=sorted(RENDERERS), default="table")

    commands.add_parser("version", help="print the version")
    return parser


def _load_program(path: str) -> Program:
    program = parse_program(Path(path).read_text(encoding="utf-8"))
    diagnostics = validate(program)
    if diagnostics:
        raise InvalidProgram("\n".join(str(d) for d in diagnostics))
    return program


def _load_database(args, program: Program) -> Database:
    databases = [load_fact_file(path, program) for path in args.facts]
    for spec in args.facts_csv:
        predicate, path = parse_csv_spec(spec)
        databases.append(load_csv_facts(predicate, path, program))
    return merge_databases(databases)


def _print_answers(answers) -> None:
    for row in sorted_answers(answers):
        print(", ".join(str(value) for value in row) if row else "yes")


def _print_tree(tree: SLDTree) -> None:
    stack = [0]
    while stack:
        node = tree.nodes[stack.pop()]
        print(f"{'  ' * node.depth}{node.goal}")
        stack.extend(reversed(node.children))


def _check(args) -> int:
    program = parse_program(Path(args.program).read_text(encoding="utf-8"))
    diagnostics = validate(program)
    for diagnostic in diagnostics:
        print(diagnostic)
    if diagnostics:
        return 1
    print("ok")
    if args.recursion:
        report = classify_recursion(program)
        for predicate in sorted(report.classes):
            print(f"{predicate}: {report.classes[predicate].value}")
        print(f"summary: {report.summary.value}")
        if report.has_idb_facts:
            print("idb facts: yes")
    return 0


def _sld(args) -> int:
    program = _load_program(args.program)
    query = parse_query(args.query, program)
    db = _load_database(args, program)
    tree = build_tree(program, db, query, TreeLimits(args.max_depth, args.max_nodes))
    if args.tree:
        _print_tree(tree)
    else:
        _print_answers(tree.answers)
    if args.stats:
        print(f"node_count={tree.node_count}")
        print(f"truncated={tree.truncated or 'no'}")
    return 0


def _compile(args) -> int:
    program = _load_program(args.program)
    query = parse_query(args.query, program)
    if args.emit == "magic":
        print(magic_transform(program, query), end="")
        return 0
    limits = ExploreLimits(args.max_states, args.closure_bound, args.max_params, args.max_cases)
    system = explore(program, query, Granularity(args.granularity), limits, args.force)
    if args.emit == "dot":
        print(export_dot(system), end="")
    else:
        print(emit_rules(system), end="")
    return 0


def _run(args) -> int:
    program = _load_program(args.program)
    query = parse_query(args.query, program)
    db = _load_database(args, program)
    service = BenchService(
        Settings(
            max_states=args.max_states,
            closure_bound=args.closure_bound,
            max_params=args.max_params,
            max_cases=args.max_cases,
        )
    )
    result = service.run(args.engine, program, query, db, force=args.force)
    _print_answers(result.answers)
    if args.stats:
        for line in result.stats:
            print(line)
    return 0


def _bench(args) -> int:
    program = parse_program(CHAIN_PROGRAM)
    query = parse_query(CHAIN_QUERY, program)
    report = BenchService(settings).bench(program, query, args.engines, args.n)
    print(RENDERERS[args.format](report), end="")
    return 0


def _version(args) -> int:
    print(f"slddb {__version__}")
    return 0


COMMANDS = {
    "check": _check,
    "sld": _sld,
    "compile": _compile,
    "run": _run,
    "bench": _bench,
    "version": _version,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        return COMMANDS[args.command](args)
    except InvalidProgram as e:
        print(e, file=sys.stderr)
        return 1
    except SlddbError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.error(f"slddb {args.command} failed: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
