"""Substitutions, unification, goal normalization and parameter conditions.

Terms are variables, constants or parameters only (no function symbols),
so unification needs no occurs-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Mapping, Optional, Tuple, TypeVar

from src.domain.datalog import (
    Constant,
    Disequality,
    Goal,
    Literal,
    Parameter,
    Rule,
    Term,
    Variable,
    normalized_variable,
    term_key,
)

T = TypeVar("T")


def map_terms(value: T, fn: Callable[[Term], Term]) -> T:
    """Rebuild a term, literal, goal, guard, rule or tuple of these with fn applied to every term."""
    if isinstance(value, (Variable, Constant, Parameter)):
        return fn(value)
    if isinstance(value, Literal):
        return Literal(value.name, tuple(fn(arg) for arg in value.args))
    if isinstance(value, Goal):
        return Goal(tuple(map_terms(literal, fn) for literal in value.literals))
    if isinstance(value, Disequality):
        return Disequality(fn(value.left), fn(value.right))
    if isinstance(value, Rule):
        return Rule(
            map_terms(value.head, fn),
            tuple(map_terms(literal, fn) for literal in value.body),
            tuple(map_terms(guard, fn) for guard in value.guards),
        )
    if isinstance(value, tuple):
        return tuple(map_terms(item, fn) for item in value)
    raise TypeError(f"Cannot map terms of {type(value).__name__}")


@dataclass(frozen=True)
class Substitution:
    """Idempotent finite map from variables to terms."""

    bindings: Mapping[Variable, Term] = field(default_factory=dict)

    def resolve(self, term: Term) -> Term:
        if isinstance(term, Variable):
            return self.bindings.get(term, term)
        return term

    def bind(self, variable: Variable, term: Term) -> "Substitution":
        """Extend with variable/term; term must already be resolved."""
        updated = {
            bound: (term if image == variable else image)
            for bound, image in self.bindings.items()
        }
        updated[variable] = term
        return Substitution(updated)

    def __len__(self) -> int:
        return len(self.bindings)

    def __contains__(self, variable: object) -> bool:
        return variable in self.bindings

    def __str__(self) -> str:
        pairs = ", ".join(f"{var}/{term}" for var, term in self.bindings.items())
        return "{" + pairs + "}"


def apply(subst: Substitution, value: T) -> T:
    """Simultaneously replace bound variables in a term, literal, goal or rule."""
    if not subst.bindings:
        return value
    return map_terms(value, subst.resolve)


def mgu(a: Literal, b: Literal) -> Optional[Substitution]:
    """Most general unifier of two literals with disjoint variables, or None.

    When both sides are variables the one from `a` is bound. Parameters
    are treated as rigid symbols here.
    """
    if a.predicate != b.predicate:
        return None
    subst = Substitution()
    for left, right in zip(a.args, b.args):
        left, right = subst.resolve(left), subst.resolve(right)
        if left == right:
            continue
        if isinstance(left, Variable):
            subst = subst.bind(left, right)
        elif isinstance(right, Variable):
            subst = subst.bind(right, left)
        else:
            return None
    return subst


def normalize(goal: Goal) -> Goal:
    """Rename non-parameter variables to V1, V2, ... in order of first occurrence."""
    renaming: Dict[Variable, Variable] = {}

    def rename(term: Term) -> Term:
        if isinstance(term, Variable):
            if term not in renaming:
                renaming[term] = normalized_variable(len(renaming) + 1)
            return renaming[term]
        return term

    return map_terms(goal, rename)


def variant(a: Goal, b: Goal) -> bool:
    """True iff the goals are equal up to renaming of variables (parameters are rigid)."""
    return normalize(a) == normalize(b)


def rename_apart(rule: Rule, tag: object) -> Rule:
    """Give every variable of the rule a fresh name that no parsed program can use."""
    return map_terms(
        rule,
        lambda term: Variable(f"_{tag}_{term.name}") if isinstance(term, Variable) else term,
    )


def disequality(left: Term, right: Term) -> Disequality:
    """Guard `left != right` written with any constant on the right."""
    if isinstance(left, Constant) and not isinstance(right, Constant):
        return Disequality(right, left)
    return Disequality(left, right)


def _ordered(left: Term, right: Term) -> Tuple[Term, Term]:
    return (left, right) if term_key(left) <= term_key(right) else (right, left)


@dataclass(frozen=True)
class ConditionConjunction:
    """Consistent conjunction of equalities and disequalities over parameters.

    Equalities are kept as union-find classes: each non-representative
    parameter maps to its class representative, which is the class's
    constant if it has one, otherwise its lowest-index parameter.
    Disequalities relate representatives, stored in term order.
    """

    equalities: FrozenSet[Tuple[Parameter, Term]] = frozenset()
    disequalities: FrozenSet[Tuple[Term, Term]] = frozenset()

    @cached_property
    def _representatives(self) -> Dict[Parameter, Term]:
        return dict(self.equalities)

    @property
    def is_trivial(self) -> bool:
        return not self.equalities and not self.disequalities

    def find(self, term: Term) -> Term:
        if isinstance(term, Parameter):
            return self._representatives.get(term, term)
        return term

    def apply(self, value: T) -> T:
        """Replace every parameter by its class representative."""
        if not self.equalities:
            return value
        return map_terms(value, self.find)

    def with_equality(self, left: Term, right: Term) -> Optional["ConditionConjunction"]:
        a, b = self.find(left), self.find(right)
        if a == b:
            return self
        if isinstance(a, Constant) and isinstance(b, Constant):
            return None
        if isinstance(a, Constant):
            winner, loser = a, b
        elif isinstance(b, Constant):
            winner, loser = b, a
        else:
            winner, loser = _ordered(a, b)
        representatives = {
            parameter: (winner if rep == loser else rep)
            for parameter, rep in self._representatives.items()
        }
        representatives[loser] = winner
        return self._rebuild(representatives, self.disequalities)

    def with_disequality(self, left: Term, right: Term) -> Optional["ConditionConjunction"]:
        a, b = self.find(left), self.find(right)
        if a == b:
            return None
        if isinstance(a, Constant) and isinstance(b, Constant):
            return self
        return ConditionConjunction(self.equalities, self.disequalities | {_ordered(a, b)})

    @staticmethod
    def _rebuild(representatives: Dict[Parameter, Term], disequalities) -> Optional["ConditionConjunction"]:
        def find(term: Term) -> Term:
            return representatives.get(term, term) if isinstance(term, Parameter) else term

        kept = set()
        for left, right in disequalities:
            left, right = find(left), find(right)
            if left == right:
                return None
            if isinstance(left, Constant) and isinstance(right, Constant):
                continue
            kept.add(_ordered(left, right))
        return ConditionConjunction(frozenset(representatives.items()), frozenset(kept))

    def entails_equal(self, left: Term, right: Term) -> bool:
        return self.find(left) == self.find(right)

    def refutes_equal(self, left: Term, right: Term) -> bool:
        a, b = self.find(left), self.find(right)
        if a == b:
            return False
        if isinstance(a, Constant) and isinstance(b, Constant):
            return True
        return _ordered(a, b) in self.disequalities

    def first_new_equality(self, stronger: "ConditionConjunction") -> Optional[Tuple[Parameter, Term]]:
        """An equality of `stronger` that this conjunction does not entail, if any."""
        for parameter, rep in sorted(stronger.equalities, key=lambda eq: (term_key(eq[0]), term_key(eq[1]))):
            if not self.entails_equal(parameter, rep):
                return parameter, rep
        return None

    def satisfied_by(self, assignment: Mapping[Parameter, Constant]) -> bool:
        """Check the conjunction under a grounding of its parameters."""
        def ground(term: Term) -> Term:
            return assignment.get(term, term) if isinstance(term, Parameter) else term

        return all(ground(p) == ground(rep) for p, rep in self.equalities) and all(
            ground(left) != ground(right) for left, right in self.disequalities
        )

    def parameters(self) -> FrozenSet[Parameter]:
        found = set()
        for pair in list(self.equalities) + list(self.disequalities):
            found.update(term for term in pair if isinstance(term, Parameter))
        return frozenset(found)

    def __str__(self) -> str:
        parts = [f"{p} = {rep}" for p, rep in sorted(self.equalities, key=lambda eq: term_key(eq[0]))]
        parts.extend(str(disequality(left, right)) for left, right in sorted(
            self.disequalities, key=lambda d: (term_key(d[0]), term_key(d[1]))))
        return ", ".join(parts) if parts else "true"


TRUE = ConditionConjunction()


def param_unify(
    a: Literal,
    b: Literal,
    conditions: ConditionConjunction = TRUE,
) -> Optional[Tuple[Substitution, ConditionConjunction]]:
    """Unify two literals whose parameters stand for unknown runtime constants.

    A plain variable meeting a parameter is bound to the parameter. A
    parameter meeting another parameter or a constant adds an equality to
    the returned conjunction instead of binding. Returns None on a
    constant clash or when the conditions become inconsistent.
    """
    if a.predicate != b.predicate:
        return None
    subst = Substitution()
    for left, right in zip(a.args, b.args):
        left = conditions.find(subst.resolve(left))
        right = conditions.find(subst.resolve(right))
        if left == right:
            continue
        if isinstance(left, Variable):
            subst = subst.bind(left, right)
        elif isinstance(right, Variable):
            subst = subst.bind(right, left)
        elif isinstance(left, Constant) and isinstance(right, Constant):
            return None
        else:
            conditions = conditions.with_equality(left, right)
            if conditions is None:
                return None
    return subst, conditions
