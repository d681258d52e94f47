"""Encoding SLDDB-systems as guarded Datalog rules and as GraphViz text.

A state with k parameters becomes a predicate of arity k; the fact
s(c1, ..., ck) stands for the state's goals with Ci := ci. Guard
equalities are compiled away by substitution, disequalities stay as
`X != Y` body conditions.
"""

import logging
import re
from dataclasses import dataclass
from typing import Callable, List, Tuple

from src.application.slddb_states import SLDDBSystem, Transition
from src.domain.datalog import (
    ANSWER,
    Literal,
    Parameter,
    Predicate,
    Rule,
    Term,
    Variable,
    term_key,
)
from src.domain.unify import ConditionConjunction, disequality

logger = logging.getLogger(__name__)

DOT_LABEL_LIMIT = 120


@dataclass(frozen=True)
class CompiledRules:
    rules: Tuple[Rule, ...]
    state_predicates: Tuple[Predicate, ...]  # indexed by state id

    def __str__(self) -> str:
        return "".join(f"{rule}\n" for rule in self.rules)


def _state_prefix(reserved) -> str:
    prefix = "s"
    while any(re.fullmatch(rf"{re.escape(prefix)}[0-9]+", name) for name in reserved):
        prefix += "_"
    return prefix


def _rule_variable(parameter: Parameter) -> Variable:
    return Variable(f"X{parameter.index}")


def _term_under(guard: ConditionConjunction) -> Callable[[Term], Term]:
    def convert(term: Term) -> Term:
        term = guard.find(term)
        return _rule_variable(term) if isinstance(term, Parameter) else term

    return convert


def _state_literal(predicate: Predicate, convert: Callable[[Term], Term]) -> Literal:
    return Literal(predicate.name, tuple(convert(Parameter(i)) for i in range(1, predicate.arity + 1)))


def _transition_rule(transition: Transition, predicates: Tuple[Predicate, ...]) -> Rule:
    convert = _term_under(transition.guard)
    body = [_state_literal(predicates[transition.source], convert)]
    if transition.fact is not None:
        body.append(Literal(transition.fact.name, tuple(convert(arg) for arg in transition.fact.args)))
    head = Literal(
        predicates[transition.target].name,
        tuple(convert(term) for term in transition.param_passing),
    )
    guards = tuple(
        disequality(convert(left), convert(right))
        for left, right in sorted(
            transition.guard.disequalities, key=lambda d: (term_key(d[0]), term_key(d[1]))
        )
    )
    return Rule(head, tuple(body), guards)


def emit_rules(system: SLDDBSystem) -> CompiledRules:
    """
    Emit the compiled system as plain Datalog rules.

    Each state becomes a predicate `s<id>` with one argument per parameter,
    the prefix lengthened until it clashes with no program predicate.
    The initial state is a fact, each transition is one rule and every
    accepting template yields an `answer` rule.

    Args:
        system: Explored state system

    Returns:
        Rules together with the state predicates they use, indexed by state id
    """
    prefix = _state_prefix(system.reserved_names)
    predicates = tuple(
        Predicate(f"{prefix}{state_id}", state.param_count)
        for state_id, state in enumerate(system.states)
    )
    identity = _term_under(ConditionConjunction())

    rules: List[Rule] = [Rule(_state_literal(predicates[system.initial], identity))]
    rules.extend(_transition_rule(transition, predicates) for transition in system.transitions)
    for state_id in sorted(system.accepting):
        for template in system.accepting[state_id]:
            head = Literal(ANSWER, tuple(identity(arg) for arg in template))
            rules.append(Rule(head, (_state_literal(predicates[state_id], identity),)))

    logger.info(f"Emitted {len(rules)} rules over {len(predicates)} state predicates")
    return CompiledRules(tuple(rules), predicates)


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _truncate(text: str) -> str:
    if len(text) <= DOT_LABEL_LIMIT:
        return text
    return text[: DOT_LABEL_LIMIT - 3] + "..."


def export_dot(system: SLDDBSystem) -> str:
    """
    Render the state system as Graphviz DOT text.

    Accepting states are drawn with a double border. Long labels are cut to
    DOT_LABEL_LIMIT characters.
    """
    lines = ["digraph slddb {", "  rankdir=LR;", "  node [shape=box];"]
    for state_id, state in enumerate(system.states):
        label = _truncate(f"s{state_id}: " + "; ".join(str(goal) for goal in state.goals))
        attributes = f'label="{_dot_escape(label)}"'
        if state_id in system.accepting:
            attributes += ", peripheries=2"
        lines.append(f"  s{state_id} [{attributes}];")
    for transition in system.transitions:
        label = "ε" if transition.is_epsilon else str(transition.fact)
        if not transition.guard.is_trivial:
            label += f" [{transition.guard}]"
        lines.append(f'  s{transition.source} -> s{transition.target} [label="{_dot_escape(label)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
