"""Parameterized states of an SLDDB-system and their canonical form."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from src.domain.datalog import Constant, Goal, Literal, Parameter, Predicate, Term, value_key
from src.domain.unify import TRUE, ConditionConjunction, map_terms

logger = logging.getLogger(__name__)

# Search calls allowed in canonical_form before the first complete ordering is kept.
MAX_CANONICAL_STEPS = 20_000


class Granularity(str, Enum):
    SINGLE_GOAL = "single"
    MAXIMAL = "max"


AnswerTemplate = Tuple[Term, ...]


@dataclass(frozen=True)
class State:
    """Canonical set of normalized goals over parameters C1..Ck."""

    goals: Tuple[Goal, ...]
    param_count: int

    def __post_init__(self):
        if not self.goals:
            raise ValueError("A state needs at least one goal")

    def answer_templates(self) -> Tuple[AnswerTemplate, ...]:
        """Argument templates of the goals that are a lone answer literal."""
        return tuple(
            goal.answer.args
            for goal in self.goals
            if goal.is_answer_only
            and all(isinstance(arg, (Parameter, Constant)) for arg in goal.answer.args)
        )

    def first_predicates(self) -> List[Predicate]:
        return sorted({goal.first.predicate for goal in self.goals if not goal.is_answer_only})

    def __str__(self) -> str:
        return "{" + "; ".join(str(goal) for goal in self.goals) + "}"


@dataclass(frozen=True)
class Transition:
    """Edge source -> target; `fact` is None for an epsilon transition.

    param_passing[i] is the term (a parameter of the source state or of
    the fact pattern, or a constant) that becomes parameter C(i+1) of the
    target state.
    """

    source: int
    target: int
    guard: ConditionConjunction = TRUE
    param_passing: Tuple[Term, ...] = ()
    fact: Optional[Literal] = None

    @property
    def is_epsilon(self) -> bool:
        return self.fact is None


@dataclass(frozen=True)
class SLDDBSystem:
    """States (id = position), initial state id, transitions and accepting templates."""

    states: Tuple[State, ...]
    initial: int
    transitions: Tuple[Transition, ...]
    accepting: Mapping[int, Tuple[AnswerTemplate, ...]]
    granularity: Granularity = Granularity.MAXIMAL
    reserved_names: FrozenSet[str] = field(default_factory=frozenset)


def _arguments(goal: Goal) -> Tuple[Term, ...]:
    return tuple(arg for literal in goal.literals for arg in literal.args)


def _goal_key(goal: Goal, mapping: Mapping[Parameter, int], colours: Mapping[Parameter, int]) -> tuple:
    """Encoding of a goal where mapped parameters show their new index and
    unmapped ones their colour and first-occurrence order within the goal."""
    local: Dict[Parameter, int] = {}
    parts: list = [len(goal)]
    for literal in goal.literals:
        parts.append(literal.name)
        parts.append(len(literal.args))
        for arg in literal.args:
            if isinstance(arg, Parameter):
                if arg in mapping:
                    parts.append((1, mapping[arg]))
                else:
                    parts.append((2, colours.get(arg, 0), local.setdefault(arg, len(local) + 1)))
            elif isinstance(arg, Constant):
                parts.append((0,) + value_key(arg.value))
            else:
                parts.append((3, arg.name))
    return tuple(parts)


def parameter_colours(goals: Sequence[Goal]) -> Dict[Parameter, int]:
    """Colour refinement of the parameters of a goal set.

    A parameter's colour is refined by the encodings of the goals it occurs
    in (under the current colours) and its positions there, until the number
    of colours stops growing. Colours depend only on the structure of the
    goals, never on parameter names.

    Args:
        goals: Normalized goals over any parameters.

    Returns:
        Colour index per parameter; equal colours mark parameters the goals
        do not tell apart.
    """
    occurrences: Dict[Parameter, List[Tuple[Goal, int]]] = {}
    for goal in goals:
        for position, arg in enumerate(_arguments(goal)):
            if isinstance(arg, Parameter):
                occurrences.setdefault(arg, []).append((goal, position))

    colours = {parameter: 0 for parameter in occurrences}
    count = 1
    while occurrences:
        signatures = {
            parameter: (colours[parameter], tuple(sorted(
                (_goal_key(goal, {}, colours), position) for goal, position in found
            )))
            for parameter, found in occurrences.items()
        }
        ranks = {signature: rank for rank, signature in enumerate(sorted(set(signatures.values())))}
        colours = {parameter: ranks[signature] for parameter, signature in signatures.items()}
        if len(ranks) == count:
            break
        count = len(ranks)
    return colours


def _swap(first: Goal, second: Goal, mapping: Mapping[Parameter, int]) -> Optional[Dict[Parameter, Parameter]]:
    """Permutation carrying the unmapped parameters of `first` onto those of `second`, if one exists."""
    ours = [p for p in dict.fromkeys(first.parameters()) if p not in mapping]
    theirs = [p for p in dict.fromkeys(second.parameters()) if p not in mapping]
    forward = dict(zip(ours, theirs))
    if set(ours) == set(theirs):
        return forward
    if set(ours) & set(theirs):
        return None
    forward.update(zip(theirs, ours))
    return forward


def _interchangeable(
    first: Goal,
    second: Goal,
    mapping: Mapping[Parameter, int],
    containing: Mapping[Parameter, List[Goal]],
) -> bool:
    """True when swapping the two goals' unmapped parameters maps the goal set onto itself.

    Only goals holding a swapped parameter can move, so only those are compared.
    """
    swap = _swap(first, second, mapping)
    if swap is None:
        return False
    touched = frozenset(goal for parameter in swap for goal in containing[parameter])
    return frozenset(map_terms(goal, lambda t: swap.get(t, t)) for goal in touched) == touched


def canonical_form(goals: Iterable[Goal]) -> Tuple[Tuple[Goal, ...], Dict[Parameter, Parameter]]:
    """Order goals and rename parameters to C1..Ck by first occurrence.

    Goals are taken greedily by smallest encoding, with unmapped parameters
    told apart by their colours. Ties are explored and the lexicographically
    least result wins, so the form does not depend on the input order or on
    the parameter names. A tied goal that a parameter swap carries onto an
    already tried one leads to the same result and is skipped.

    Args:
        goals: Normalized goals of one state.

    Returns:
        The ordered renamed goals and the renaming applied to the input
        parameters.
    """
    distinct = frozenset(goals)
    colours = parameter_colours(tuple(distinct))
    containing: Dict[Parameter, List[Goal]] = {}
    for goal in distinct:
        for parameter in set(goal.parameters()):
            containing.setdefault(parameter, []).append(goal)
    start = {goal: _goal_key(goal, {}, colours) for goal in distinct}
    pool = tuple(sorted(distinct, key=start.__getitem__))
    best: List[Optional[tuple]] = [None]
    steps = [0]

    def search(
        remaining: Tuple[Goal, ...],
        mapping: Dict[Parameter, int],
        keys: tuple,
        order: tuple,
        cache: Dict[Goal, tuple],
    ):
        steps[0] += 1
        if best[0] is not None and keys > best[0][0][: len(keys)]:
            return
        if not remaining:
            if best[0] is None or keys < best[0][0]:
                best[0] = (keys, order, dict(mapping))
            return
        smallest = min(cache[goal] for goal in remaining)
        tried: List[Goal] = []
        for i, goal in enumerate(remaining):
            if cache[goal] != smallest:
                continue
            if tried and any(_interchangeable(other, goal, mapping, containing) for other in tried):
                continue
            if best[0] is not None and steps[0] >= MAX_CANONICAL_STEPS:
                return
            tried.append(goal)
            extended = dict(mapping)
            fresh = [p for p in dict.fromkeys(goal.parameters()) if p not in mapping]
            for parameter in fresh:
                extended[parameter] = len(extended) + 1
            updated = cache
            if fresh:
                # only goals sharing a newly mapped parameter change their key
                updated = dict(cache)
                for parameter in fresh:
                    for other in containing[parameter]:
                        updated[other] = _goal_key(other, extended, colours)
            search(remaining[:i] + remaining[i + 1:], extended, keys + (smallest,), order + (goal,), updated)

    search(pool, {}, (), (), start)
    if steps[0] >= MAX_CANONICAL_STEPS:
        logger.warning(f"Canonical form search cut off after {steps[0]} steps over {len(pool)} goals")
    _, order, mapping = best[0]
    renaming = {old: Parameter(new) for old, new in mapping.items()}
    renamed = tuple(map_terms(goal, lambda t: renaming.get(t, t) if isinstance(t, Parameter) else t) for goal in order)
    return renamed, renaming


def make_state(goals: Iterable[Goal]) -> Tuple[State, Dict[Parameter, Parameter]]:
    """Build the canonical state for a goal set; also return the parameter renaming used."""
    ordered, renaming = canonical_form(goals)
    return State(ordered, len(renaming)), renaming


def canonicalize(state: State) -> State:
    return make_state(state.goals)[0]
