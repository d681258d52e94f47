"""Magic-sets rewriting with left-to-right sideways information passing.

Every IDB predicate reachable from the query is specialised per binding
pattern ("adornment", one b/f letter per argument). A rule for p^a is
guarded by magic_p^a over its bound head arguments, and each IDB body
literal with at least one bound argument gets a magic rule built from
the guard and the literals to its left. All-free adornments carry no
magic guard.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Set, Tuple

from src.application.bottomup import EvaluationStats, Row, seminaive_eval
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
    Variable,
)

logger = logging.getLogger(__name__)

Adorned = Tuple[Predicate, str]


def adornment(literal: Literal, bound: Iterable[Variable]) -> str:
    bound = set(bound)
    return "".join("b" if isinstance(arg, Constant) or arg in bound else "f" for arg in literal.args)


def _bound_args(literal: Literal, pattern: str) -> Tuple[Term, ...]:
    return tuple(arg for arg, mode in zip(literal.args, pattern) if mode == "b")


class _Names:
    """Allocates adorned and magic predicate names that clash with nothing in the program."""

    def __init__(self, program: Program):
        self._taken: Set[str] = {predicate.name for predicate in program.predicates} | {ANSWER}
        self._allocated: Dict[Tuple[str, Adorned], str] = {}

    def _fresh(self, base: str) -> str:
        name = base
        while name in self._taken:
            name += "_"
        self._taken.add(name)
        return name

    def get(self, kind: str, key: Adorned) -> str:
        if (kind, key) not in self._allocated:
            predicate, pattern = key
            base = f"{predicate.name}_{pattern}" if kind == "adorned" else f"magic_{predicate.name}_{pattern}"
            self._allocated[(kind, key)] = self._fresh(base)
        return self._allocated[(kind, key)]


@dataclass(frozen=True)
class AdornedProgram:
    program: Program
    adorned: Mapping[Adorned, Predicate]
    magic: Mapping[Adorned, Predicate]

    def original(self, predicate: Predicate) -> Predicate:
        """The source predicate an adorned predicate specialises; other predicates map to themselves."""
        for (source, _), target in self.adorned.items():
            if target == predicate:
                return source
        return predicate


class _Rewriter:
    def __init__(self, program: Program):
        self.program = program
        self.names = _Names(program)
        self.adorned: Dict[Adorned, Predicate] = {}
        self.magic: Dict[Adorned, Predicate] = {}
        self.pending: List[Adorned] = []
        self.rules: Dict[Rule, None] = {}

    def _is_idb(self, predicate: Predicate) -> bool:
        return not self.program.is_edb(predicate) and predicate.name != ANSWER

    def _adorned_literal(self, literal: Literal, pattern: str) -> Literal:
        key = (literal.predicate, pattern)
        if key not in self.adorned:
            name = self.names.get("adorned", key)
            self.adorned[key] = Predicate(name, literal.arity)
            self.pending.append(key)
        return Literal(self.adorned[key].name, literal.args)

    def _magic_literal(self, literal: Literal, pattern: str) -> Literal:
        key = (literal.predicate, pattern)
        if key not in self.magic:
            name = self.names.get("magic", key)
            self.magic[key] = Predicate(name, pattern.count("b"))
        return Literal(self.magic[key].name, _bound_args(literal, pattern))

    def rewrite_body(self, guard: Tuple[Literal, ...], body: Tuple[Literal, ...], bound: Set[Variable]):
        """Adorned body plus one magic rule per IDB literal that receives bindings."""
        adorned_body: List[Literal] = []
        for literal in body:
            if self._is_idb(literal.predicate):
                pattern = adornment(literal, bound)
                if "b" in pattern:
                    magic_head = self._magic_literal(literal, pattern)
                    self.rules.setdefault(Rule(magic_head, guard + tuple(adorned_body)))
                adorned_body.append(self._adorned_literal(literal, pattern))
            else:
                adorned_body.append(literal)
            bound.update(literal.variables())
        return tuple(adorned_body)

    def rewrite_rule(self, rule: Rule, pattern: str) -> None:
        head = rule.head
        guard: Tuple[Literal, ...] = ()
        if "b" in pattern:
            guard = (self._magic_literal(head, pattern),)
        bound = {arg for arg, mode in zip(head.args, pattern) if mode == "b" and isinstance(arg, Variable)}
        body = self.rewrite_body(guard, rule.body, bound)
        new_head = Literal(self.adorned[(head.predicate, pattern)].name, head.args)
        self.rules.setdefault(Rule(new_head, guard + body, rule.guards))

    def run(self, query: Query) -> None:
        body = self.rewrite_body((), query.literals, set())
        answer_rule = Rule(Literal(ANSWER, query.answer_vars), body)
        while self.pending:
            predicate, pattern = self.pending.pop(0)
            for rule in self.program.rules_for(predicate):
                self.rewrite_rule(rule, pattern)
        self.rules.setdefault(answer_rule)


def adorn(program: Program, query: Query) -> AdornedProgram:
    rewriter = _Rewriter(program)
    rewriter.run(query)
    rewritten = program.with_rules(rewriter.rules)
    logger.info(
        f"Magic rewriting: {len(rewriter.adorned)} adorned predicates, "
        f"{len(rewriter.magic)} magic predicates, {len(rewritten.rules)} rules"
    )
    return AdornedProgram(rewritten, dict(rewriter.adorned), dict(rewriter.magic))


def magic_transform(program: Program, query: Query) -> Program:
    """Magic-sets rewrite of program for the bindings of query."""
    return adorn(program, query).program


@dataclass(frozen=True)
class MagicStats:
    answers: FrozenSet[Row]
    counts: Mapping[str, int]  # by rewritten predicate
    original_counts: Mapping[str, int]  # adorned versions summed per source predicate
    evaluation: EvaluationStats

    @property
    def facts_derived(self) -> int:
        return self.evaluation.facts_derived


def magic_stats(program: Program, query: Query, db: Database) -> MagicStats:
    rewritten = adorn(program, query)
    store = seminaive_eval(rewritten.program, db)
    original_counts: Dict[str, int] = {}
    for predicate in rewritten.adorned.values():
        source = str(rewritten.original(predicate))
        original_counts[source] = original_counts.get(source, 0) + store.count(predicate)
    return MagicStats(store.answers(), store.counts(), original_counts, EvaluationStats.of(store))
