"""Loading database facts from Datalog fact files and headerless CSV files."""

import csv
import logging
import re
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

from src.domain.datalog import Constant, Database, Literal, Program
from src.domain.errors import FactFileError
from src.infrastructure.parser import parse_facts

logger = logging.getLogger(__name__)

_INTEGER = re.compile(r"-?[0-9]+\Z")

PathLike = Union[str, Path]


def _constant(cell: str) -> Constant:
    cell = cell.strip()
    return Constant(int(cell)) if _INTEGER.match(cell) else Constant(cell)


def load_fact_file(path: PathLike, program: Optional[Program] = None) -> Database:
    """Read a file with one ground atom per clause."""
    text = Path(path).read_text(encoding="utf-8")
    database = parse_facts(text, program)
    logger.info(f"Loaded {len(database)} facts from {path}")
    return database


def load_csv_facts(predicate: str, path: PathLike, program: Optional[Program] = None) -> Database:
    """Read a headerless CSV file; every row becomes one fact of `predicate`."""
    facts: List[Literal] = []
    with open(path, newline="", encoding="utf-8") as f:
        for line_number, row in enumerate(csv.reader(f), start=1):
            if not row:
                continue
            fact = Literal(predicate, tuple(_constant(cell) for cell in row))
            if program is not None and not program.is_edb(fact.predicate):
                raise FactFileError(
                    f"{path}:{line_number}: {fact.predicate} is not a declared EDB predicate"
                )
            facts.append(fact)
    database = Database.of(facts)
    logger.info(f"Loaded {len(database)} {predicate} facts from {path}")
    return database


def parse_csv_spec(spec: str) -> Tuple[str, str]:
    """Split a `pred:file` command-line value."""
    predicate, sep, path = spec.partition(":")
    if not sep or not predicate or not path:
        raise FactFileError(f"Expected pred:file, got {spec!r}")
    return predicate, path


def merge_databases(databases: Iterable[Database]) -> Database:
    return Database.of(fact for database in databases for fact in database)
