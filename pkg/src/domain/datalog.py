"""Domain values for Datalog programs: terms, literals, rules, programs, databases, queries and goals."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Tuple, Union

Value = Union[str, int]

ANSWER = "answer"

_SYMBOL = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Variable:
    """A logical variable. Normalized goals use the names V1, V2, ..."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Constant:
    """A symbol or an integer. Integers carry no arithmetic."""

    value: Value

    def __str__(self) -> str:
        if isinstance(self.value, int):
            return str(self.value)
        if _SYMBOL.match(self.value):
            return self.value
        escaped = self.value.replace("\\", "\\\\").replace("'", "\\'")
        return f"'{escaped}'"


@dataclass(frozen=True)
class Parameter:
    """Placeholder C<index> for a constant that is only known at runtime.

    Parameters are global within a parameterized state and are never
    renamed apart during unification.
    """

    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"Parameter index must be >= 1, got {self.index}")

    def __str__(self) -> str:
        return f"C{self.index}"


Term = Union[Variable, Constant, Parameter]


def normalized_variable(index: int) -> Variable:
    if index < 1:
        raise ValueError(f"Normalized variable index must be >= 1, got {index}")
    return Variable(f"V{index}")


def value_key(value: Value) -> Tuple[int, Value]:
    """Sort key ordering integers before symbols."""
    return (0, value) if isinstance(value, int) else (1, value)


def term_key(term: Term) -> tuple:
    """Total order on terms: constants, then parameters, then variables."""
    if isinstance(term, Constant):
        return (0,) + value_key(term.value)
    if isinstance(term, Parameter):
        return (1, term.index)
    return (2, term.name)


@dataclass(frozen=True, order=True)
class Predicate:
    name: str
    arity: int

    def __str__(self) -> str:
        return f"{self.name}/{self.arity}"


@dataclass(frozen=True)
class Literal:
    """A positive literal p(t1, ..., tn)."""

    name: str
    args: Tuple[Term, ...] = ()

    @property
    def predicate(self) -> Predicate:
        return Predicate(self.name, len(self.args))

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> Iterator[Variable]:
        return (arg for arg in self.args if isinstance(arg, Variable))

    def parameters(self) -> Iterator[Parameter]:
        return (arg for arg in self.args if isinstance(arg, Parameter))

    @property
    def is_ground(self) -> bool:
        return all(isinstance(arg, Constant) for arg in self.args)

    def values(self) -> Tuple[Value, ...]:
        """Argument values of a ground literal."""
        return tuple(arg.value for arg in self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(str(arg) for arg in self.args)})"


@dataclass(frozen=True)
class Disequality:
    """Guard condition `left != right`; it never binds variables."""

    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} != {self.right}"


@dataclass(frozen=True)
class Rule:
    head: Literal
    body: Tuple[Literal, ...] = ()
    guards: Tuple[Disequality, ...] = ()

    @property
    def is_fact(self) -> bool:
        return not self.body and not self.guards

    def body_variables(self) -> List[Variable]:
        seen: Dict[Variable, None] = {}
        for literal in self.body:
            for variable in literal.variables():
                seen.setdefault(variable)
        return list(seen)

    def __str__(self) -> str:
        if self.is_fact:
            return f"{self.head}."
        conditions = [str(literal) for literal in self.body]
        conditions.extend(str(guard) for guard in self.guards)
        return f"{self.head} :- {', '.join(conditions)}."


@dataclass(frozen=True)
class Program:
    """Rules plus the declared EDB predicates. IDB = predicates in rule heads."""

    rules: Tuple[Rule, ...] = ()
    edb: FrozenSet[Predicate] = frozenset()

    @cached_property
    def idb(self) -> FrozenSet[Predicate]:
        return frozenset(rule.head.predicate for rule in self.rules)

    @cached_property
    def _rules_by_predicate(self) -> Dict[Predicate, Tuple[Rule, ...]]:
        grouped: Dict[Predicate, List[Rule]] = {}
        for rule in self.rules:
            grouped.setdefault(rule.head.predicate, []).append(rule)
        return {predicate: tuple(rules) for predicate, rules in grouped.items()}

    def rules_for(self, predicate: Predicate) -> Tuple[Rule, ...]:
        return self._rules_by_predicate.get(predicate, ())

    def is_edb(self, predicate: Predicate) -> bool:
        return predicate in self.edb

    @cached_property
    def predicates(self) -> FrozenSet[Predicate]:
        found = set(self.edb)
        for rule in self.rules:
            found.add(rule.head.predicate)
            found.update(literal.predicate for literal in rule.body)
        return frozenset(found)

    def with_rules(self, rules: Iterable[Rule]) -> "Program":
        return Program(rules=tuple(rules), edb=self.edb)

    def __str__(self) -> str:
        lines = [f"% edb {predicate}" for predicate in sorted(self.edb)]
        lines.extend(str(rule) for rule in self.rules)
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class Database:
    """Finite set of ground EDB facts, iterated in insertion order."""

    facts: Tuple[Literal, ...] = ()

    @classmethod
    def of(cls, facts: Iterable[Literal]) -> "Database":
        unique: Dict[Literal, None] = {}
        for fact in facts:
            if not fact.is_ground:
                raise ValueError(f"Database facts must be ground: {fact}")
            unique.setdefault(fact)
        return cls(tuple(unique))

    @cached_property
    def by_predicate(self) -> Dict[Predicate, Tuple[Literal, ...]]:
        grouped: Dict[Predicate, List[Literal]] = {}
        for fact in self.facts:
            grouped.setdefault(fact.predicate, []).append(fact)
        return {predicate: tuple(facts) for predicate, facts in grouped.items()}

    def facts_for(self, predicate: Predicate) -> Tuple[Literal, ...]:
        return self.by_predicate.get(predicate, ())

    @property
    def predicates(self) -> FrozenSet[Predicate]:
        return frozenset(self.by_predicate)

    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.facts)

    def __contains__(self, fact: object) -> bool:
        return fact in self.by_predicate.get(getattr(fact, "predicate", None), ())


@dataclass(frozen=True)
class Query:
    literals: Tuple[Literal, ...]

    @property
    def answer_vars(self) -> Tuple[Variable, ...]:
        """Query variables in first-occurrence order."""
        seen: Dict[Variable, None] = {}
        for literal in self.literals:
            for variable in literal.variables():
                seen.setdefault(variable)
        return tuple(seen)

    def __str__(self) -> str:
        return f"?- {', '.join(str(literal) for literal in self.literals)}."


@dataclass(frozen=True)
class Goal:
    """Ordered conjunction of literals terminated by the answer literal."""

    literals: Tuple[Literal, ...]

    def __post_init__(self):
        if not self.literals or self.literals[-1].name != ANSWER:
            raise ValueError(f"Goal must end with an {ANSWER} literal: {self}")
        if any(literal.name == ANSWER for literal in self.literals[:-1]):
            raise ValueError(f"Goal has more than one {ANSWER} literal: {self}")

    @property
    def first(self) -> Literal:
        return self.literals[0]

    @property
    def rest(self) -> Tuple[Literal, ...]:
        return self.literals[1:]

    @property
    def answer(self) -> Literal:
        return self.literals[-1]

    @property
    def is_answer_only(self) -> bool:
        return len(self.literals) == 1

    def parameters(self) -> Iterator[Parameter]:
        for literal in self.literals:
            yield from literal.parameters()

    def __len__(self) -> int:
        return len(self.literals)

    def __str__(self) -> str:
        return ", ".join(str(literal) for literal in self.literals)
