"""Application service running every engine on a program, query and database."""

import logging
import time
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from src.application.bottomup import EvaluationStats, Row, naive_answers, run_compiled
from src.application.magic import magic_stats
from src.application.sld_interpreter import TreeLimits, build_tree
from src.application.slddb_compiler import ExploreLimits, explore
from src.application.slddb_emitter import emit_rules
from src.application.slddb_states import Granularity
from src.domain.datalog import Constant, Database, Literal, Program, Query
from src.domain.errors import EngineDisagreement
from src.infrastructure.settings import Settings

logger = logging.getLogger(__name__)

ENGINES = ("sld", "slddb", "slddb-single", "magic", "naive")

CHAIN_PROGRAM = """\
% edb edge/2
path(X, Y) :- edge(X, Y).
path(X, Z) :- edge(X, Y), path(Y, Z).
"""

CHAIN_QUERY = "?- path(0, A)."


def generate_chain(n: int) -> Database:
    """The path graph edge(0,1), ..., edge(n-1,n)."""
    if n < 1:
        raise ValueError(f"Chain length must be >= 1, got {n}")
    return Database.of(Literal("edge", (Constant(i - 1), Constant(i))) for i in range(1, n + 1))


@dataclass(frozen=True)
class EngineResult:
    answers: FrozenSet[Row]
    facts_derived: Optional[int] = None
    sld_nodes: Optional[int] = None
    truncated: Optional[str] = None
    stats: Tuple[str, ...] = ()  # key=value lines


@dataclass(frozen=True)
class BenchRow:
    engine: str
    n: int
    answers_count: int
    facts_derived: Optional[int]
    sld_nodes: Optional[int]
    wall_time_ms: float


@dataclass(frozen=True)
class BenchReport:
    rows: Sequence[BenchRow]

    def for_n(self, n: int) -> List[BenchRow]:
        return [row for row in self.rows if row.n == n]

    def row(self, engine: str, n: int) -> BenchRow:
        for row in self.rows:
            if row.engine == engine and row.n == n:
                return row
        raise KeyError((engine, n))


class BenchService:
    """Runs the engines with limits taken from the settings."""

    def __init__(self, settings: Optional[Settings] = None):
        settings = settings or Settings()
        self.tree_limits = TreeLimits(settings.max_depth, settings.max_nodes)
        self.explore_limits = ExploreLimits(
            settings.max_states, settings.closure_bound, settings.max_params, settings.max_cases
        )

    def run(self, engine: str, program: Program, query: Query, db: Database, force: bool = False) -> EngineResult:
        if engine == "sld":
            tree = build_tree(program, db, query, self.tree_limits)
            lines = (f"node_count={tree.node_count}", f"truncated={tree.truncated or 'no'}")
            return EngineResult(tree.answers, sld_nodes=tree.node_count, truncated=tree.truncated, stats=lines)
        if engine in ("slddb", "slddb-single"):
            granularity = Granularity.MAXIMAL if engine == "slddb" else Granularity.SINGLE_GOAL
            system = explore(program, query, granularity, self.explore_limits, force)
            answers, stats = run_compiled(emit_rules(system), db)
            lines = (f"states={len(system.states)}", f"transitions={len(system.transitions)}") + tuple(stats.lines())
            return EngineResult(answers, facts_derived=stats.facts_derived, stats=lines)
        if engine == "magic":
            stats = magic_stats(program, query, db)
            return EngineResult(stats.answers, facts_derived=stats.facts_derived, stats=tuple(stats.evaluation.lines()))
        if engine == "naive":
            answers, store = naive_answers(program, db, query)
            stats = EvaluationStats.of(store)
            return EngineResult(answers, facts_derived=stats.facts_derived, stats=tuple(stats.lines()))
        raise ValueError(f"Unknown engine {engine!r}; expected one of {', '.join(ENGINES)}")

    def bench(
        self,
        program: Program,
        query: Query,
        engines: Sequence[str] = ENGINES,
        ns: Sequence[int] = (3, 10),
    ) -> BenchReport:
        """
        Run every engine on generate_chain(n) for each n.

        Args:
            program: Program to benchmark
            query: Query over program
            engines: Engine names from ENGINES
            ns: Chain lengths

        Returns:
            One row per engine and n, grouped by n

        Raises:
            ValueError: If an engine name is unknown
            EngineDisagreement: If two engines return different answers for one n
        """
        unknown = [engine for engine in engines if engine not in ENGINES]
        if unknown:
            raise ValueError(f"Unknown engines: {', '.join(unknown)}")

        rows: List[BenchRow] = []
        for n in ns:
            db = generate_chain(n)
            found: Dict[str, FrozenSet[Row]] = {}
            for engine in engines:
                start = time.perf_counter()
                result = self.run(engine, program, query, db)
                elapsed = (time.perf_counter() - start) * 1000
                found[engine] = result.answers
                row = BenchRow(engine, n, len(result.answers), result.facts_derived, result.sld_nodes, elapsed)
                logger.info(f"Bench {engine} n={n}: {row}")
                rows.append(row)
            if len(set(found.values())) > 1:
                raise EngineDisagreement(n, found)

        return BenchReport(tuple(rows))
