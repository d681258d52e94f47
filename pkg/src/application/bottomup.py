"""Bottom-up fixpoint evaluation: naive T_P iteration and semi-naive evaluation.

Joins run left to right over hash indexes on the bound argument
positions; indexes are rebuilt in every iteration. Facts derived in an
iteration are merged only after the iteration, so iteration order and
results are deterministic. Disequality guards are checked once all body
literals are bound.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Sequence, Tuple, Union

from src.application.slddb_emitter import CompiledRules
from src.domain.datalog import (
    ANSWER,
    Constant,
    Database,
    Literal,
    Predicate,
    Program,
    Query,
    Rule,
    Term,
    Value,
    Variable,
    value_key,
)

logger = logging.getLogger(__name__)

Row = Tuple[Value, ...]
Relation = Mapping[Row, None]
RuleSource = Union[Program, CompiledRules, Sequence[Rule]]

_EMPTY: Dict[Row, None] = {}


@dataclass
class FactStore:
    """Per-predicate insertion-ordered sets of ground tuples with derivation counters."""

    relations: Dict[Predicate, Dict[Row, None]] = field(default_factory=dict)
    facts_derived: int = 0
    rule_applications: int = 0
    iterations: int = 0

    @classmethod
    def from_database(cls, db: Database) -> "FactStore":
        store = cls()
        for fact in db:
            store.relations.setdefault(fact.predicate, {})[fact.values()] = None
        return store

    def relation(self, predicate: Predicate) -> Relation:
        return self.relations.get(predicate, _EMPTY)

    def add(self, predicate: Predicate, row: Row) -> bool:
        relation = self.relations.setdefault(predicate, {})
        if row in relation:
            return False
        relation[row] = None
        return True

    def count(self, predicate: Predicate) -> int:
        return len(self.relation(predicate))

    def counts(self) -> Dict[str, int]:
        return {str(predicate): len(rows) for predicate, rows in sorted(self.relations.items())}

    def facts(self) -> FrozenSet[Tuple[Predicate, Row]]:
        return frozenset((predicate, row) for predicate, rows in self.relations.items() for row in rows)

    def answers(self) -> FrozenSet[Row]:
        return frozenset(
            row for predicate, rows in self.relations.items() if predicate.name == ANSWER for row in rows
        )


@dataclass(frozen=True)
class EvaluationStats:
    facts_derived: int
    iterations: int
    rule_applications: int
    counts: Mapping[str, int]

    @classmethod
    def of(cls, store: FactStore) -> "EvaluationStats":
        return cls(store.facts_derived, store.iterations, store.rule_applications, store.counts())

    def lines(self) -> List[str]:
        lines = [
            f"facts_derived={self.facts_derived}",
            f"iterations={self.iterations}",
            f"rule_applications={self.rule_applications}",
        ]
        lines.extend(f"{predicate}={count}" for predicate, count in self.counts.items())
        return lines


class _IndexCache:
    """Hash indexes on (relation, bound positions), valid for one iteration."""

    def __init__(self):
        self._indexes: Dict[Tuple[int, Tuple[int, ...]], Dict[Row, List[Row]]] = {}

    def lookup(self, relation: Relation, positions: Tuple[int, ...], key: Row) -> Iterable[Row]:
        if not positions:
            return relation
        cache_key = (id(relation), positions)
        index = self._indexes.get(cache_key)
        if index is None:
            index = {}
            for row in relation:
                index.setdefault(tuple(row[p] for p in positions), []).append(row)
            self._indexes[cache_key] = index
        return index.get(key, ())


def _value(term: Term, binding: Mapping[Variable, Value]) -> Value:
    if isinstance(term, Constant):
        return term.value
    return binding[term]


def _evaluate_rule(rule: Rule, sources: Sequence[Relation], indexes: _IndexCache) -> Iterator[Row]:
    body = rule.body

    def extend(i: int, binding: Dict[Variable, Value]) -> Iterator[Row]:
        if i == len(body):
            if all(_value(g.left, binding) != _value(g.right, binding) for g in rule.guards):
                yield tuple(_value(arg, binding) for arg in rule.head.args)
            return
        args = body[i].args
        positions = tuple(
            j for j, arg in enumerate(args) if isinstance(arg, Constant) or arg in binding
        )
        key = tuple(_value(args[j], binding) for j in positions)
        for row in indexes.lookup(sources[i], positions, key):
            extended = dict(binding)
            for j, arg in enumerate(args):
                if j in positions:
                    continue
                if arg in extended:
                    if extended[arg] != row[j]:
                        break
                else:
                    extended[arg] = row[j]
            else:
                yield from extend(i + 1, extended)

    yield from extend(0, {})


def _rules_of(source: RuleSource) -> Tuple[Rule, ...]:
    if isinstance(source, (Program, CompiledRules)):
        return tuple(source.rules)
    return tuple(source)


def _merge(store: FactStore, derived: Iterable[Tuple[Predicate, Row]]) -> Dict[Predicate, Dict[Row, None]]:
    delta: Dict[Predicate, Dict[Row, None]] = {}
    for predicate, row in derived:
        if store.add(predicate, row):
            store.facts_derived += 1
            delta.setdefault(predicate, {})[row] = None
    return delta


def naive_eval(program: RuleSource, db: Database) -> FactStore:
    """Least fixpoint by applying every rule to all known facts until nothing changes."""
    rules = _rules_of(program)
    store = FactStore.from_database(db)
    while True:
        store.iterations += 1
        indexes = _IndexCache()
        derived = []
        for rule in rules:
            sources = [store.relation(literal.predicate) for literal in rule.body]
            for row in _evaluate_rule(rule, sources, indexes):
                store.rule_applications += 1
                derived.append((rule.head.predicate, row))
        if not _merge(store, derived):
            break
    logger.info(f"Naive evaluation: {store.facts_derived} facts in {store.iterations} iterations")
    return store


def seminaive_eval(rules: RuleSource, db: Database) -> FactStore:
    """Same fixpoint as naive_eval; after the first round every rule
    application uses at least one fact derived in the previous round."""
    rules = _rules_of(rules)
    store = FactStore.from_database(db)

    store.iterations += 1
    indexes = _IndexCache()
    derived = []
    for rule in rules:
        sources = [store.relation(literal.predicate) for literal in rule.body]
        for row in _evaluate_rule(rule, sources, indexes):
            store.rule_applications += 1
            derived.append((rule.head.predicate, row))
    delta = _merge(store, derived)

    while delta:
        store.iterations += 1
        indexes = _IndexCache()
        derived = []
        for rule in rules:
            for i, literal in enumerate(rule.body):
                if literal.predicate not in delta:
                    continue
                sources = [
                    delta[lit.predicate] if j == i else store.relation(lit.predicate)
                    for j, lit in enumerate(rule.body)
                ]
                for row in _evaluate_rule(rule, sources, indexes):
                    store.rule_applications += 1
                    derived.append((rule.head.predicate, row))
        delta = _merge(store, derived)

    logger.info(f"Semi-naive evaluation: {store.facts_derived} facts in {store.iterations} iterations")
    return store


def run_compiled(rules: RuleSource, db: Database) -> Tuple[FrozenSet[Row], EvaluationStats]:
    """
    Evaluate compiled rules semi-naively and read off the answers.

    Args:
        rules: Emitted rules or any rule source with an `answer` head
        db: Input facts

    Returns:
        Tuple of (answer rows, evaluation statistics)
    """
    store = seminaive_eval(rules, db)
    return store.answers(), EvaluationStats.of(store)


def answer_rule(query: Query) -> Rule:
    return Rule(Literal(ANSWER, query.answer_vars), query.literals)


def naive_answers(program: Program, db: Database, query: Query) -> Tuple[FrozenSet[Row], FactStore]:
    """Query answers read off the minimal model of program and database."""
    store = naive_eval(program.rules + (answer_rule(query),), db)
    return store.answers(), store


def sorted_answers(answers: Iterable[Row]) -> List[Row]:
    return sorted(answers, key=lambda row: tuple(value_key(value) for value in row))
