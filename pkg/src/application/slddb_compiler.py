"""Compile-time construction of SLDDB-systems.

States are sets of normalized goals whose unknown runtime constants are
parameters. In maximal granularity each state is closed under SLD steps
with program rules, so only EDB facts cause transitions; in single-goal
granularity every state holds one goal and program-rule steps become
epsilon transitions. Parameter conditions raised by unification are
settled by splitting into cases, each case carrying its guard.
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from src.application.sld_interpreter import extend_query
from src.application.slddb_states import (
    Granularity,
    SLDDBSystem,
    State,
    Transition,
    make_state,
)
from src.domain.analysis import RecursionClass, classify_recursion
from src.domain.datalog import ANSWER, Goal, Literal, Parameter, Predicate, Program, Query, Term
from src.domain.errors import (
    LeftRecursionDiverged,
    StateSpaceExceeded,
    UndecidedCondition,
    UnsupportedProgram,
)
from src.domain.unify import (
    TRUE,
    ConditionConjunction,
    Substitution,
    apply,
    normalize,
    param_unify,
    rename_apart,
)

logger = logging.getLogger(__name__)

Case = Tuple[ConditionConjunction, FrozenSet[Goal]]


@dataclass(frozen=True)
class ExploreLimits:
    max_states: int = 10_000
    closure_bound: int = 10_000
    max_params: int = 64
    max_cases: int = 128


@dataclass(frozen=True)
class Successor:
    guard: ConditionConjunction
    state: State
    param_passing: Tuple[Term, ...]
    fact: Optional[Literal] = None


def _decided(
    conditions: ConditionConjunction,
    unified: Optional[Tuple[Substitution, ConditionConjunction]],
) -> Optional[Substitution]:
    """Substitution of a unification that holds in every case of `conditions`.

    Returns None when the unification fails in every such case and raises
    UndecidedCondition when it depends on a condition not yet decided.
    """
    if unified is None:
        return None
    subst, stronger = unified
    new = conditions.first_new_equality(stronger)
    if new is not None:
        raise UndecidedCondition(*new)
    return subst


def _resolve_with_rules(program: Program, goal: Goal, conditions: ConditionConjunction) -> List[Goal]:
    resolvents = []
    for rule in program.rules_for(goal.first.predicate):
        renamed = rename_apart(rule, "r")
        subst = _decided(conditions, param_unify(goal.first, renamed.head, conditions))
        if subst is None:
            continue
        resolvent = apply(subst, Goal(renamed.body + goal.rest))
        resolvents.append(normalize(conditions.apply(resolvent)))
    return resolvents


def _expandable(program: Program, goal: Goal) -> bool:
    return not goal.is_answer_only and not program.is_edb(goal.first.predicate)


def closure(
    program: Program,
    goals: Iterable[Goal],
    bound: int = 10_000,
    conditions: ConditionConjunction = TRUE,
) -> FrozenSet[Goal]:
    """Saturate goals under SLD steps with program rules, normalizing each result.

    Goals starting with an EDB or the answer predicate are not expanded.
    Raises LeftRecursionDiverged with the goals in generation order once
    more than `bound` distinct goals appear, and UndecidedCondition when a
    rule head needs a parameter condition that `conditions` leaves open.
    """
    generated: Dict[Goal, None] = {}
    queue = deque()

    def add(goal: Goal) -> None:
        if goal in generated:
            return
        if len(generated) >= bound:
            raise LeftRecursionDiverged(bound, list(generated))
        generated[goal] = None
        queue.append(goal)

    for goal in goals:
        add(normalize(conditions.apply(goal)))
    while queue:
        goal = queue.popleft()
        if _expandable(program, goal):
            for resolvent in _resolve_with_rules(program, goal, conditions):
                add(resolvent)
    return frozenset(generated)


def split_cases(
    compute: Callable[[ConditionConjunction], FrozenSet[Goal]],
    conditions: ConditionConjunction = TRUE,
    max_cases: Optional[int] = None,
) -> List[Case]:
    """Run compute, splitting on every condition it reports as undecided.

    Each branch assumes the condition or its negation; inconsistent
    branches are dropped as soon as they arise. Cases come out with the
    assumed equality before its negation.

    Args:
        compute: Goal computation under a conjunction of parameter conditions.
        conditions: Conditions every case starts from.
        max_cases: Largest number of cases allowed, or None for no limit.

    Returns:
        One (conditions, goals) pair per consistent case.

    Raises:
        StateSpaceExceeded: When more than max_cases cases arise.
    """
    cases: List[Case] = []
    pending = [conditions]
    while pending:
        current = pending.pop()
        try:
            goals = compute(current)
        except UndecidedCondition as undecided:
            logger.debug(f"Case split on {undecided.parameter} = {undecided.term} under {current}")
            branches = (
                current.with_equality(undecided.parameter, undecided.term),
                current.with_disequality(undecided.parameter, undecided.term),
            )
            pending.extend(branch for branch in reversed(branches) if branch is not None)
            continue
        cases.append((current, goals))
        if max_cases is not None and len(cases) > max_cases:
            raise StateSpaceExceeded(max_cases, "cases for one transition")
    return cases


def closure_cases(
    program: Program,
    goals: Iterable[Goal],
    bound: int = 10_000,
    conditions: ConditionConjunction = TRUE,
) -> List[Case]:
    goals = tuple(goals)
    return split_cases(lambda case: closure(program, goals, bound, case), conditions)


def initial_state(
    program: Program,
    query: Query,
    granularity: Granularity = Granularity.MAXIMAL,
    bound: int = 10_000,
) -> State:
    extended = normalize(extend_query(query))
    if granularity is Granularity.MAXIMAL:
        goals = closure(program, [extended], bound)
    else:
        goals = frozenset({extended})
    return make_state(goals)[0]


def _successors(state: State, cases: List[Case], fact: Optional[Literal]) -> List[Successor]:
    successors = []
    for guard, goals in cases:
        if not goals:
            continue
        target, renaming = make_state(goals)
        passing: List[Term] = [None] * target.param_count
        for old, new in renaming.items():
            passing[new.index - 1] = old
        successors.append(Successor(guard, target, tuple(passing), fact))
    return successors


def fact_pattern(predicate: Predicate, first_index: int) -> Literal:
    """predicate(C<first_index>, ..., C<first_index + arity - 1>)."""
    return Literal(
        predicate.name,
        tuple(Parameter(first_index + i) for i in range(predicate.arity)),
    )


def successor_cases(
    program: Program,
    state: State,
    edb_pred: Predicate,
    granularity: Granularity = Granularity.MAXIMAL,
    bound: int = 10_000,
    max_cases: Optional[int] = None,
) -> List[Successor]:
    """Successor states for an unknown fact of edb_pred, one per consistent case.

    The fact is a pattern over fresh parameters C(k+1)..C(k+a); cases
    without any resolvent are omitted.
    """
    pattern = fact_pattern(edb_pred, state.param_count + 1)
    matching = [goal for goal in state.goals if not goal.is_answer_only and goal.first.predicate == edb_pred]
    if not matching:
        return []

    def compute(conditions: ConditionConjunction) -> FrozenSet[Goal]:
        fact = conditions.apply(pattern)
        resolvents = []
        for goal in matching:
            goal = conditions.apply(goal)
            subst = _decided(conditions, param_unify(goal.first, fact, conditions))
            if subst is None:
                continue
            resolvents.append(normalize(conditions.apply(apply(subst, Goal(goal.rest)))))
        if not resolvents:
            return frozenset()
        if granularity is Granularity.MAXIMAL:
            return closure(program, resolvents, bound, conditions)
        return frozenset(resolvents)

    return _successors(state, split_cases(compute, max_cases=max_cases), pattern)


def epsilon_successors(program: Program, state: State, max_cases: Optional[int] = None) -> List[Successor]:
    """Single-goal granularity: one SLD step with each program rule, per case."""
    if len(state.goals) != 1:
        raise ValueError("epsilon_successors needs a single-goal state")
    goal = state.goals[0]
    if not _expandable(program, goal):
        return []

    successors: List[Successor] = []
    for rule in program.rules_for(goal.first.predicate):
        renamed = rename_apart(rule, "r")

        def compute(conditions: ConditionConjunction, renamed=renamed) -> FrozenSet[Goal]:
            current = conditions.apply(goal)
            subst = _decided(conditions, param_unify(current.first, renamed.head, conditions))
            if subst is None:
                return frozenset()
            resolvent = apply(subst, Goal(renamed.body + current.rest))
            return frozenset({normalize(conditions.apply(resolvent))})

        successors.extend(_successors(state, split_cases(compute, max_cases=max_cases), None))
    return successors


def _precheck(program: Program, granularity: Granularity, force: bool) -> None:
    if granularity is not Granularity.MAXIMAL:
        return
    report = classify_recursion(program)
    reasons = []
    if report.summary is RecursionClass.LEFT_RECURSIVE:
        left = [str(p) for p, cls in report.classes.items() if cls is RecursionClass.LEFT_RECURSIVE]
        reasons.append(f"left recursion in {', '.join(left)}")
    if report.has_idb_facts:
        reasons.append("program contains IDB facts")
    if not reasons:
        return
    if not force:
        raise UnsupportedProgram(reasons)
    logger.warning(f"Forcing maximal-state exploration despite: {'; '.join(reasons)}")


def explore(
    program: Program,
    query: Query,
    granularity: Granularity = Granularity.MAXIMAL,
    limits: ExploreLimits = ExploreLimits(),
    force: bool = False,
) -> SLDDBSystem:
    """
    Build all reachable parameterized states and their transitions.

    States are explored breadth-first and numbered in discovery order, so
    the initial state is always state 0.

    Args:
        program: Parsed program
        query: Query to compile
        granularity: Maximal states or single-goal states with epsilon moves
        limits: Bounds on states, parameters, case splits and closure size
        force: Explore maximal states even for left-recursive programs or
            programs with IDB facts

    Returns:
        The explored state system

    Raises:
        UnsupportedProgram: If maximal exploration is not safe and force is off
        StateSpaceExceeded: If any of the limits is crossed
    """
    _precheck(program, granularity, force)
    initial = initial_state(program, query, granularity, limits.closure_bound)
    states: List[State] = [initial]
    ids: Dict[State, int] = {initial: 0}
    transitions: List[Transition] = []
    queue = deque([0])

    while queue:
        source = queue.popleft()
        state = states[source]
        successors: List[Successor] = []
        if granularity is Granularity.SINGLE_GOAL:
            successors.extend(epsilon_successors(program, state, limits.max_cases))
        for predicate in state.first_predicates():
            if program.is_edb(predicate):
                successors.extend(
                    successor_cases(
                        program, state, predicate, granularity, limits.closure_bound, limits.max_cases
                    )
                )
        for successor in successors:
            target = ids.get(successor.state)
            if target is None:
                if len(states) >= limits.max_states:
                    raise StateSpaceExceeded(limits.max_states)
                if successor.state.param_count > limits.max_params:
                    raise StateSpaceExceeded(limits.max_params, "parameters in one state")
                target = len(states)
                states.append(successor.state)
                ids[successor.state] = target
                queue.append(target)
                logger.debug(f"State {target}: {successor.state}")
            transitions.append(
                Transition(source, target, successor.guard, successor.param_passing, successor.fact)
            )

    accepting = {
        state_id: state.answer_templates()
        for state_id, state in enumerate(states)
        if state.answer_templates()
    }
    reserved = frozenset({p.name for p in program.predicates} | {ANSWER})
    logger.info(
        f"Explored {len(states)} states, {len(transitions)} transitions "
        f"({granularity.value} granularity) for {query}"
    )
    return SLDDBSystem(tuple(states), 0, tuple(transitions), accepting, granularity, reserved)
