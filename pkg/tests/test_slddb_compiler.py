import time

import pytest

from src.application.sld_interpreter import build_tree, extend_query
from src.application.slddb_compiler import (
    ExploreLimits,
    closure,
    closure_cases,
    epsilon_successors,
    explore,
    initial_state,
    split_cases,
    successor_cases,
)
from src.application.slddb_emitter import emit_rules, export_dot
from src.application.slddb_states import Granularity, make_state
from src.domain.analysis import RangeRestrictionViolation, validate
from src.domain.datalog import Constant, Goal, Literal, Parameter, Predicate, Program, Query, Variable
from src.domain.errors import LeftRecursionDiverged, StateSpaceExceeded, UnsupportedProgram
from src.domain.unify import TRUE, normalize
from src.infrastructure.parser import parse_program, parse_query
from tests.program_corpus import corpus

EDGE = Predicate("edge", 2)
C1, C2, C3 = Parameter(1), Parameter(2), Parameter(3)


def start(query):
    return [normalize(extend_query(query))]


def strings(goals):
    return {str(goal) for goal in goals}


def test_closure_of_right_recursive_path(path_program, path_query):
    assert strings(closure(path_program, start(path_query))) == {
        "path(0, V1), answer(V1)",
        "edge(0, V1), answer(V1)",
        "edge(0, V1), path(V1, V2), answer(V2)",
    }


def test_closure_of_left_recursive_path_diverges_with_expected_prefix(path_left_program, path_query):
    with pytest.raises(LeftRecursionDiverged) as error:
        closure(path_left_program, start(path_query), bound=6)
    assert len(error.value.goals) == 6
    assert strings(error.value.goals[:4]) == {
        "path(0, V1), answer(V1)",
        "edge(0, V1), answer(V1)",
        "path(0, V1), edge(V1, V2), answer(V2)",
        "edge(0, V1), edge(V1, V2), answer(V2)",
    }


def test_closure_leaves_answer_goals_alone(path_program):
    answer = Goal((Literal("answer", (Variable("V1"),)),))
    assert closure(path_program, [answer]) == {answer}


def test_closure_splits_on_rule_head_constants():
    program = parse_program("% edb e/1\np(0, X) :- e(X).\np(1, X) :- e(X).")
    goal = normalize(Goal((Literal("p", (C1, Variable("A"))), Literal("answer", (Variable("A"),)))))
    cases = closure_cases(program, [goal])
    guards = {str(guard) for guard, _ in cases}
    assert guards == {"C1 = 0", "C1 = 1", "C1 != 0, C1 != 1"}
    for guard, goals in cases:
        expected = 1 if str(guard).startswith("C1 !=") else 2
        assert len(goals) == expected


def test_split_cases_stops_past_max_cases():
    program = parse_program("% edb e/1\np(0, X) :- e(X).\np(1, X) :- e(X).")
    goal = normalize(Goal((Literal("p", (C1, Variable("A"))), Literal("answer", (Variable("A"),)))))

    def compute(conditions):
        return closure(program, [goal], conditions=conditions)

    assert len(split_cases(compute, max_cases=3)) == 3
    with pytest.raises(StateSpaceExceeded) as error:
        split_cases(compute, max_cases=2)
    assert error.value.unit == "cases for one transition"


def test_initial_state_granularities(path_program, path_query):
    assert len(initial_state(path_program, path_query, Granularity.MAXIMAL).goals) == 3
    single = initial_state(path_program, path_query, Granularity.SINGLE_GOAL)
    assert strings(single.goals) == {"path(0, V1), answer(V1)"}


def test_initial_state_of_input_query(programs_dir):
    program = parse_program((programs_dir / "path_input.dl").read_text())
    state = initial_state(program, parse_query("?- input(C), path(C, A).", program))
    assert strings(state.goals) == {"input(V1), path(V1, V2), answer(V1, V2)"}


def test_successor_of_path_initial_state(path_program, path_query):
    state = initial_state(path_program, path_query)
    [successor] = successor_cases(path_program, state, EDGE)
    assert successor.guard == TRUE.with_equality(C1, Constant(0))
    assert successor.fact == Literal("edge", (C1, C2))
    assert successor.param_passing == (C2,)
    assert successor.state.param_count == 1
    assert strings(successor.state.goals) == {
        "answer(C1)",
        "path(C1, V1), answer(V1)",
        "edge(C1, V1), answer(V1)",
        "edge(C1, V1), path(V1, V2), answer(V2)",
    }


def test_pure_answer_state_has_no_fact_successors(path_program):
    state, _ = make_state([Goal((Literal("answer", (C1,)),))])
    assert successor_cases(path_program, state, EDGE) == []


def test_constant_position_case_split():
    program = parse_program("% edb p/2\nq(X) :- p(X, X).")
    state, _ = make_state([Goal((Literal("p", (C1, Constant("b"))), Literal("answer", (C1,))))])
    [successor] = successor_cases(program, state, Predicate("p", 2))
    assert successor.guard.equalities == {(C2, C1), (C3, Constant("b"))}
    assert strings(successor.state.goals) == {"answer(C1)"}
    assert successor.param_passing == (C1,)


def test_epsilon_successors(path_program, path_query):
    state = initial_state(path_program, path_query, Granularity.SINGLE_GOAL)
    successors = epsilon_successors(path_program, state)
    assert [strings(s.state.goals) for s in successors] == [
        {"edge(0, V1), answer(V1)"},
        {"edge(0, V1), path(V1, V2), answer(V2)"},
    ]
    assert all(s.fact is None for s in successors)

    answer_state, _ = make_state([Goal((Literal("answer", (Variable("V1"),)),))])
    assert epsilon_successors(path_program, answer_state) == []
    edge_state, _ = make_state([Goal((Literal("edge", (C1, Variable("V1"))), Literal("answer", (Variable("V1"),))))])
    assert epsilon_successors(path_program, edge_state) == []


def test_explore_path_maximal(path_program, path_query):
    system = explore(path_program, path_query)
    assert len(system.states) == 2
    assert [(t.source, t.target) for t in system.transitions] == [(0, 1), (1, 1)]
    assert system.transitions[0].guard == TRUE.with_equality(C1, Constant(0))
    assert dict(system.accepting) == {1: ((C1,),)}


def test_emit_rules_for_path(path_program, path_query):
    compiled = emit_rules(explore(path_program, path_query))
    assert str(compiled) == (
        "s0.\n"
        "s1(X2) :- s0, edge(0, X2).\n"
        "s1(X3) :- s1(X1), edge(X1, X3).\n"
        "answer(X1) :- s1(X1).\n"
    )
    assert compiled.state_predicates == (Predicate("s0", 0), Predicate("s1", 1))


def test_state_predicates_avoid_program_names():
    program = parse_program("% edb e/1\ns1(X) :- e(X).")
    compiled = emit_rules(explore(program, parse_query("?- s1(A).", program)))
    assert all(p.name.startswith("s_") for p in compiled.state_predicates)


def test_disequality_guard_survives_emission():
    program = parse_program("% edb e/2\np(X, a) :- e(X, a).\np(X, Y) :- e(X, Y), q(Y).\nq(b) :- e(b, b).")
    compiled = emit_rules(explore(program, parse_query("?- p(0, A).", program)))
    assert any(rule.guards for rule in compiled.rules)
    assert "!=" in str(compiled)


def test_constant_answer_template():
    program = parse_program("% edb e/1\np(7) :- e(X).")
    compiled = emit_rules(explore(program, parse_query("?- p(A).", program)))
    assert any(str(rule).startswith("answer(7) :- ") for rule in compiled.rules)


def test_emitted_rules_are_range_restricted(path_program, path_query):
    for granularity in Granularity:
        compiled = emit_rules(explore(path_program, path_query, granularity))
        program = Program(compiled.rules, path_program.edb)
        assert not [d for d in validate(program) if isinstance(d, RangeRestrictionViolation)]


def test_export_dot(path_program, path_query):
    dot = export_dot(explore(path_program, path_query))
    assert dot.startswith("digraph slddb {")
    assert dot.count(" -> ") == 2
    assert "peripheries=2" in dot
    assert 'label="edge(C1, C2) [C1 = 0]"' in dot


def test_export_dot_single_node_and_escaping(path_program):
    query = Query((Literal("q", (Constant('say "hi"'), Variable("A"))),))
    dot = export_dot(explore(path_program, query))
    assert dot.count(" -> ") == 0
    assert '\\"hi\\"' in dot


def test_left_recursion_is_refused_unless_forced(path_left_program, path_query):
    with pytest.raises(UnsupportedProgram):
        explore(path_left_program, path_query)
    with pytest.raises(LeftRecursionDiverged) as error:
        explore(path_left_program, path_query, limits=ExploreLimits(closure_bound=6), force=True)
    assert "edge(0, V1), edge(V1, V2), answer(V2)" in strings(error.value.goals[:4])


def test_single_goal_granularity_is_not_refused_but_grows_without_bound(path_left_program, path_query):
    with pytest.raises(StateSpaceExceeded):
        explore(path_left_program, path_query, Granularity.SINGLE_GOAL, ExploreLimits(max_states=50))


def test_same_generation_exceeds_state_limit(sg_program):
    query = parse_query("?- sg(0, B).", sg_program)
    with pytest.raises(StateSpaceExceeded):
        explore(sg_program, query, Granularity.MAXIMAL, ExploreLimits(max_states=100))


def _instance_of(pattern: Goal, goal: Goal) -> bool:
    if len(pattern) != len(goal):
        return False
    grounding = {}
    for p_lit, g_lit in zip(pattern.literals, goal.literals):
        if p_lit.predicate != g_lit.predicate:
            return False
        for p_arg, g_arg in zip(p_lit.args, g_lit.args):
            if isinstance(p_arg, Parameter):
                if not isinstance(g_arg, Constant) or grounding.setdefault(p_arg, g_arg) != g_arg:
                    return False
            elif p_arg != g_arg:
                return False
    return True


def test_single_goal_states_cover_the_sld_tree(path_program, path_query, chain):
    system = explore(path_program, path_query, Granularity.SINGLE_GOAL)
    state_goals = [goal for state in system.states for goal in state.goals]
    for goal in build_tree(path_program, chain(3), path_query).goals():
        normal = normalize(goal)
        assert any(_instance_of(pattern, normal) for pattern in state_goals), normal


def test_corpus_closures_are_finite_and_goals_bounded():
    for instance in corpus(60, seed=77):
        program, query = instance.program, instance.query
        goals = start(query)
        found = closure(program, goals)
        assert closure(program, goals, bound=len(found)) == found
        assert closure(program, goals, bound=2 * len(found)) == found

        system = explore(program, query)
        longest_body = max(len(rule.body) for rule in program.rules)
        limit = longest_body * len(program.idb) + len(query.literals) + 1
        assert max(len(goal) for state in system.states for goal in state.goals) <= limit


FRESH_VALUE_PROGRAM = "% edb e/2\np0(X) :- e(Y, Z), p0(X).\np0(X) :- e(Y, X), p0(X).\n"


@pytest.mark.parametrize("text", ["?- p0(A).", "?- p0(A), p0(1)."])
def test_fresh_value_per_fact_stops_on_a_limit(text):
    program = parse_program(FRESH_VALUE_PROGRAM)
    query = parse_query(text, program)
    started = time.perf_counter()
    with pytest.raises(StateSpaceExceeded):
        explore(program, query, limits=ExploreLimits(max_states=50))
    assert time.perf_counter() - started < 5.0


def test_state_parameter_limit():
    program = parse_program(FRESH_VALUE_PROGRAM)
    query = parse_query("?- p0(A).", program)
    with pytest.raises(StateSpaceExceeded) as error:
        explore(program, query, limits=ExploreLimits(max_states=50, max_params=3))
    assert error.value.limit == 3
    assert error.value.unit == "parameters in one state"


def test_case_limit_per_transition():
    program = parse_program(FRESH_VALUE_PROGRAM)
    query = parse_query("?- p0(A).", program)
    with pytest.raises(StateSpaceExceeded) as error:
        explore(program, query, limits=ExploreLimits(max_states=50, max_cases=4))
    assert error.value.unit == "cases for one transition"


def test_fresh_value_states_grow_one_parameter_at_a_time():
    program = parse_program(FRESH_VALUE_PROGRAM)
    query = parse_query("?- p0(A).", program)
    state = initial_state(program, query)
    counts = []
    for _ in range(4):
        counts.append(state.param_count)
        state = max(successor_cases(program, state, Predicate("e", 2)), key=lambda s: s.state.param_count).state
    assert counts == [0, 1, 2, 3]
