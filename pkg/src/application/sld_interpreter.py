"""Reference SLD-resolution with Prolog's first-literal selection rule.

Used as the correctness oracle for the compiled engines. Every goal in
the tree counts as a node, the root included; a goal consisting only of
a ground answer literal is a success leaf (no extra empty-clause node).
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

from src.domain.datalog import ANSWER, Database, Goal, Literal, Program, Query, Rule, Value
from src.domain.unify import apply, mgu, rename_apart

logger = logging.getLogger(__name__)

AnswerTuple = Tuple[Value, ...]


@dataclass(frozen=True)
class TreeLimits:
    max_depth: int = 10_000
    max_nodes: int = 1_000_000

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_nodes <= 0:
            raise ValueError("SLD tree limits must be positive")


@dataclass
class SLDNode:
    goal: Goal
    depth: int
    parent: Optional[int]
    children: List[int] = field(default_factory=list)


@dataclass
class SLDTree:
    root: Goal
    nodes: List[SLDNode]
    answers: FrozenSet[AnswerTuple]
    truncated: Optional[str] = None  # name of the limit that fired

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def goals(self) -> Iterator[Goal]:
        return (node.goal for node in self.nodes)


class AnswerSet(frozenset):
    """Answer tuples plus the truncation flag of the tree they were read from."""

    def __new__(cls, tuples: Iterable[AnswerTuple] = (), truncated: Optional[str] = None):
        instance = super().__new__(cls, tuples)
        instance.truncated = truncated
        return instance


def extend_query(query: Query) -> Goal:
    """Append answer(A1, ..., Am) over the query's answer variables."""
    return Goal(query.literals + (Literal(ANSWER, query.answer_vars),))


def sld_step(goal: Goal, clause: Union[Rule, Literal]) -> Optional[Goal]:
    """Resolve the goal's first literal with a clause renamed apart from it, or None."""
    if isinstance(clause, Rule):
        head, body = clause.head, clause.body
    else:
        head, body = clause, ()
    theta = mgu(goal.first, head)
    if theta is None:
        return None
    return Goal(apply(theta, body + goal.rest))


def _resolvents(program: Program, db: Database, goal: Goal, fresh: Iterator[int]) -> Iterator[Goal]:
    predicate = goal.first.predicate
    if program.is_edb(predicate):
        for fact in db.facts_for(predicate):
            resolvent = sld_step(goal, fact)
            if resolvent is not None:
                yield resolvent
        return
    for rule in program.rules_for(predicate):
        resolvent = sld_step(goal, rename_apart(rule, next(fresh)))
        if resolvent is not None:
            yield resolvent


def build_tree(program: Program, db: Database, query: Query, limits: TreeLimits = TreeLimits()) -> SLDTree:
    """Build the SLD tree depth-first, children in rule order then fact order."""
    root = extend_query(query)
    nodes = [SLDNode(root, 0, None)]
    answers = set()
    truncated: Optional[str] = None
    fresh = itertools.count(1)
    stack = [0]

    while stack:
        index = stack.pop()
        node = nodes[index]
        goal = node.goal
        if goal.is_answer_only:
            if goal.answer.is_ground:
                answers.add(goal.answer.values())
            else:
                logger.warning(f"Non-ground answer leaf {goal}")
            continue
        if node.depth >= limits.max_depth:
            truncated = truncated or "max_depth"
            continue

        for resolvent in _resolvents(program, db, goal, fresh):
            if len(nodes) >= limits.max_nodes:
                truncated = "max_nodes"
                break
            node.children.append(len(nodes))
            nodes.append(SLDNode(resolvent, node.depth + 1, index))
        if truncated == "max_nodes":
            break
        stack.extend(reversed(node.children))

    if truncated:
        logger.warning(f"SLD tree truncated by {truncated} after {len(nodes)} nodes")
    logger.info(f"SLD tree for {query}: {len(nodes)} nodes, {len(answers)} answers")
    return SLDTree(root, nodes, frozenset(answers), truncated)


def answers(program: Program, db: Database, query: Query, limits: TreeLimits = TreeLimits()) -> AnswerSet:
    tree = build_tree(program, db, query, limits)
    return AnswerSet(tree.answers, tree.truncated)
