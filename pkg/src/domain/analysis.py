"""Static checks and predicate dependency analysis for Datalog programs."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

import networkx as nx

from src.domain.datalog import ANSWER, Predicate, Program, Variable


@dataclass(frozen=True)
class Diagnostic:
    """A static problem found in a program. `rule` is 1-based, None for program-level findings."""

    rule: Optional[int]

    @property
    def message(self) -> str:
        return type(self).__name__

    def __str__(self) -> str:
        where = f"rule {self.rule}: " if self.rule is not None else ""
        return f"{where}{self.message}"


@dataclass(frozen=True)
class RangeRestrictionViolation(Diagnostic):
    variable: Variable

    @property
    def message(self) -> str:
        return f"variable {self.variable} does not occur in a body literal"


@dataclass(frozen=True)
class EdbInHead(Diagnostic):
    predicate: Predicate

    @property
    def message(self) -> str:
        return f"EDB predicate {self.predicate} occurs in a rule head"


@dataclass(frozen=True)
class ReservedPredicateUse(Diagnostic):
    @property
    def message(self) -> str:
        return f"reserved predicate '{ANSWER}' is used"


@dataclass(frozen=True)
class ArityMismatch(Diagnostic):
    name: str
    arities: Tuple[int, ...]

    @property
    def message(self) -> str:
        return f"predicate {self.name} used with arities {', '.join(map(str, self.arities))}"


def validate(program: Program) -> List[Diagnostic]:
    """Return all diagnostics; an empty list means the program is valid."""
    diagnostics: List[Diagnostic] = []
    arities: Dict[str, set] = {}
    for predicate in program.edb:
        arities.setdefault(predicate.name, set()).add(predicate.arity)
        if predicate.name == ANSWER:
            diagnostics.append(ReservedPredicateUse(None))

    for number, rule in enumerate(program.rules, start=1):
        bound = set(rule.body_variables())
        unbound: Dict[Variable, None] = {}
        for variable in rule.head.variables():
            if variable not in bound:
                unbound.setdefault(variable)
        for guard in rule.guards:
            for term in (guard.left, guard.right):
                if isinstance(term, Variable) and term not in bound:
                    unbound.setdefault(term)
        diagnostics.extend(RangeRestrictionViolation(number, variable) for variable in unbound)

        if program.is_edb(rule.head.predicate):
            diagnostics.append(EdbInHead(number, rule.head.predicate))
        literals = (rule.head,) + rule.body
        if any(literal.name == ANSWER for literal in literals):
            diagnostics.append(ReservedPredicateUse(number))
        for literal in literals:
            arities.setdefault(literal.name, set()).add(literal.arity)

    for name in sorted(arities):
        if len(arities[name]) > 1:
            diagnostics.append(ArityMismatch(None, name, tuple(sorted(arities[name]))))
    return diagnostics


@dataclass(frozen=True)
class PredGraph:
    """Predicate dependency graph: p -> q when q occurs in the body of a rule for p.

    `first_graph` keeps only the edges to the first body literal.
    """

    graph: nx.DiGraph
    first_graph: nx.DiGraph

    @property
    def nodes(self) -> FrozenSet[Predicate]:
        return frozenset(self.graph.nodes)

    @property
    def edges(self) -> FrozenSet[Tuple[Predicate, Predicate]]:
        return frozenset(self.graph.edges)

    @property
    def first_edges(self) -> FrozenSet[Tuple[Predicate, Predicate]]:
        return frozenset(self.first_graph.edges)

    def reachable(self, source: Predicate) -> FrozenSet[Predicate]:
        """Predicates reachable from source through at least one edge."""
        if source not in self.graph:
            return frozenset()
        found = set()
        for successor in self.graph.successors(source):
            found.add(successor)
            found.update(nx.descendants(self.graph, successor))
        return frozenset(found)

    def depends_on(self, source: Predicate, target: Predicate) -> bool:
        return target in self.reachable(source)


def dependency_graph(program: Program) -> PredGraph:
    """
    Build the predicate dependency graph.

    Edges run from a rule head to each predicate in its body. A second
    graph keeps only the edge to the first body literal, which is what
    left recursion is read from. Every predicate of the program is a node.

    Args:
        program: Parsed program

    Returns:
        Both graphs, frozen
    """
    graph = nx.DiGraph()
    first_graph = nx.DiGraph()
    graph.add_nodes_from(sorted(program.predicates))
    first_graph.add_nodes_from(sorted(program.predicates))
    for rule in program.rules:
        head = rule.head.predicate
        for literal in rule.body:
            graph.add_edge(head, literal.predicate)
        if rule.body:
            first_graph.add_edge(head, rule.body[0].predicate)
    return PredGraph(nx.freeze(graph), nx.freeze(first_graph))


class RecursionClass(str, Enum):
    NON_RECURSIVE = "non_recursive"
    TAIL_RECURSIVE = "tail_recursive"
    GENERAL = "general"
    LEFT_RECURSIVE = "left_recursive"

    @property
    def severity(self) -> int:
        return list(RecursionClass).index(self)


@dataclass(frozen=True)
class RecursionReport:
    classes: Mapping[Predicate, RecursionClass]
    summary: RecursionClass
    has_idb_facts: bool

    @property
    def closure_is_finite(self) -> bool:
        """Closure stays finite when there are no IDB facts and no left recursion."""
        return not self.has_idb_facts and self.summary is not RecursionClass.LEFT_RECURSIVE


def classify_recursion(program: Program) -> RecursionReport:
    """
    Classify each IDB predicate by how it recurses.

    Args:
        program: Parsed program

    Returns:
        Per-predicate classes, the most severe class as summary and whether
        any IDB predicate has facts
    """
    graph = dependency_graph(program)
    reach = {predicate: graph.reachable(predicate) for predicate in graph.nodes}

    def reaches(source: Predicate, target: Predicate) -> bool:
        return source == target or target in reach.get(source, frozenset())

    classes: Dict[Predicate, RecursionClass] = {}
    for predicate in sorted(program.idb):
        rules = program.rules_for(predicate)
        if any(rule.body and reaches(rule.body[0].predicate, predicate) for rule in rules):
            classes[predicate] = RecursionClass.LEFT_RECURSIVE
        elif predicate not in reach[predicate]:
            classes[predicate] = RecursionClass.NON_RECURSIVE
        elif all(
            not reaches(literal.predicate, predicate)
            for rule in rules
            for literal in rule.body[:-1]
        ):
            classes[predicate] = RecursionClass.TAIL_RECURSIVE
        else:
            classes[predicate] = RecursionClass.GENERAL

    summary = max(classes.values(), key=lambda cls: cls.severity, default=RecursionClass.NON_RECURSIVE)
    has_idb_facts = any(not rule.body for rule in program.rules)
    return RecursionReport(classes, summary, has_idb_facts)
