import random
from itertools import product

from src.domain.datalog import Constant, Goal, Literal, Parameter, Rule, Variable
from src.domain.unify import (
    TRUE,
    Substitution,
    apply,
    map_terms,
    mgu,
    normalize,
    param_unify,
    rename_apart,
    variant,
)

X, Y, Z = Variable("X"), Variable("Y"), Variable("Z")
C1, C2, C3 = Parameter(1), Parameter(2), Parameter(3)


def lit(name, *args):
    return Literal(name, tuple(args))


def test_mgu_binds_left_variables_first():
    theta = mgu(lit("p", X, Constant(1)), lit("p", Y, Z))
    assert theta.bindings == {X: Y, Z: Constant(1)}


def test_mgu_clash_and_predicate_mismatch():
    assert mgu(lit("p", Constant(1)), lit("p", Constant(2))) is None
    assert mgu(lit("p", X), lit("q", X)) is None
    assert mgu(lit("p", X), lit("p", X, Y)) is None


def test_mgu_treats_parameters_as_rigid():
    assert mgu(lit("p", C1), lit("p", C2)) is None
    assert mgu(lit("p", C1), lit("p", Constant(0))) is None
    assert mgu(lit("p", X), lit("p", C1)).bindings == {X: C1}


def test_substitution_stays_idempotent():
    theta = Substitution().bind(X, Y).bind(Y, Constant(3))
    assert theta.bindings == {X: Constant(3), Y: Constant(3)}
    assert str(theta) == "{X/3, Y/3}"


def test_rename_apart_keeps_constants_and_parameters():
    rule = Rule(lit("p", X, Constant(0)), (lit("e", X, C1),))
    renamed = rename_apart(rule, 7)
    assert renamed == Rule(lit("p", Variable("_7_X"), Constant(0)), (lit("e", Variable("_7_X"), C1),))


def test_normalize_numbers_variables_by_first_occurrence():
    goal = Goal((lit("e", Y, C1, X), lit("answer", X, Y)))
    assert str(normalize(goal)) == "e(V1, C1, V2), answer(V2, V1)"


def test_variant():
    a = Goal((lit("e", X, Y), lit("answer", Y)))
    b = Goal((lit("e", Z, X), lit("answer", X)))
    c = Goal((lit("e", X, X), lit("answer", X)))
    assert variant(a, b)
    assert not variant(a, c)


def test_param_unify_binds_variables_to_parameters():
    subst, conditions = param_unify(lit("e", X, Y), lit("e", C1, C2))
    assert subst.bindings == {X: C1, Y: C2}
    assert conditions is TRUE


def test_param_unify_records_equalities():
    _, conditions = param_unify(lit("e", X, X), lit("e", C1, C2))
    assert conditions.equalities == {(C2, C1)}
    _, conditions = param_unify(lit("e", C2, Constant(5)), lit("e", Constant(4), C1))
    assert conditions.find(C1) == Constant(5)
    assert conditions.find(C2) == Constant(4)


def test_param_unify_failure_cases():
    assert param_unify(lit("e", Constant(1)), lit("e", Constant(2))) is None
    assert param_unify(lit("e", C1, C1), lit("e", Constant(1), Constant(2))) is None
    refuted = TRUE.with_disequality(C1, Constant(1))
    assert param_unify(lit("e", C1), lit("e", Constant(1)), refuted) is None


def test_condition_classes_prefer_constants_then_lowest_parameter():
    conditions = TRUE.with_equality(C3, C2)
    assert conditions.find(C3) == C2
    conditions = conditions.with_equality(C2, Constant("a"))
    assert conditions.find(C3) == Constant("a")
    assert conditions.with_equality(C3, Constant("b")) is None
    assert str(conditions) == "C2 = a, C3 = a"


def test_disequalities():
    conditions = TRUE.with_disequality(C2, C1)
    assert conditions.disequalities == {(C1, C2)}
    assert conditions.refutes_equal(C1, C2)
    assert conditions.with_equality(C1, C2) is None
    assert conditions.with_disequality(C1, C1) is None
    assert str(conditions) == "C1 != C2"
    assert str(TRUE) == "true"


def test_equality_that_merges_disequal_classes_is_inconsistent():
    conditions = TRUE.with_disequality(C1, Constant(0)).with_equality(C2, Constant(0))
    assert conditions.with_equality(C1, C2) is None


def test_first_new_equality():
    stronger = TRUE.with_equality(C2, Constant(1))
    assert TRUE.first_new_equality(stronger) == (C2, Constant(1))
    assert stronger.first_new_equality(stronger) is None


def _random_term(rng, variables, parameters=()):
    roll = rng.random()
    if parameters and roll < 0.25:
        return rng.choice(parameters)
    if roll < 0.55:
        return Constant(rng.randrange(2))
    return rng.choice(variables)


def _random_pair(rng, parameters=()):
    arity = rng.randint(1, 4)
    left_vars = [Variable(f"A{i}") for i in range(3)]
    right_vars = [Variable(f"B{i}") for i in range(3)]
    a = Literal("p", tuple(_random_term(rng, left_vars, parameters) for _ in range(arity)))
    b = Literal("p", tuple(_random_term(rng, right_vars, parameters) for _ in range(arity)))
    return a, b


def _ground(term, assignment):
    return assignment.get(term, term)


def test_mgu_soundness_and_generality():
    rng = random.Random(2024)
    for _ in range(10_000):
        a, b = _random_pair(rng)
        theta = mgu(a, b)
        variables = sorted(set(a.variables()) | set(b.variables()), key=lambda v: v.name)
        sigma = {v: Constant(rng.randrange(2)) for v in variables}
        ground_a = Literal("p", tuple(_ground(t, sigma) for t in a.args))
        ground_b = Literal("p", tuple(_ground(t, sigma) for t in b.args))
        if theta is not None:
            assert apply(theta, a) == apply(theta, b)
        if ground_a == ground_b:
            assert theta is not None
            for v in variables:
                assert _ground(theta.resolve(v), sigma) == sigma[v]


def _as_goal(literal):
    return Goal((literal, Literal("answer", ())))


def test_param_unify_agrees_with_grounding():
    rng = random.Random(99)
    parameters = (C1, C2, C3)
    for _ in range(10_000):
        a, b = _random_pair(rng, parameters)
        unified = param_unify(a, b)
        for values in product(range(2), repeat=3):
            assignment = {p: Constant(v) for p, v in zip(parameters, values)}
            ground_a = Literal("p", tuple(_ground(t, assignment) for t in a.args))
            ground_b = Literal("p", tuple(_ground(t, assignment) for t in b.args))
            plain = mgu(ground_a, ground_b)
            if unified is None:
                assert plain is None
            elif unified[1].satisfied_by(assignment):
                assert plain is not None
                composed_a = map_terms(apply(unified[0], a), lambda t: _ground(t, assignment))
                assert composed_a == map_terms(apply(unified[0], b), lambda t: _ground(t, assignment))
                assert variant(_as_goal(composed_a), _as_goal(apply(plain, ground_a)))
            else:
                assert plain is None


def _random_goal(rng):
    variables = [Variable(name) for name in ("X", "Y", "Z", "W")]
    literals = []
    for _ in range(rng.randint(0, 3)):
        name = rng.choice(["e", "p", "q"])
        literals.append(Literal(name, tuple(_random_term(rng, variables, (C1, C2)) for _ in range(2))))
    answer_vars = tuple(rng.choice(variables) for _ in range(rng.randint(0, 2)))
    return Goal(tuple(literals) + (Literal("answer", answer_vars),))


def test_normalize_is_idempotent_and_renaming_invariant():
    rng = random.Random(11)
    names = ["X", "Y", "Z", "W"]
    for _ in range(10_000):
        goal = _random_goal(rng)
        normal = normalize(goal)
        assert normalize(normal) == normal
        shuffled = names[:]
        rng.shuffle(shuffled)
        renaming = {Variable(old): Variable(f"R{new}") for old, new in zip(names, shuffled)}
        renamed = Goal(tuple(
            Literal(literal.name, tuple(renaming.get(t, t) for t in literal.args)) for literal in goal.literals
        ))
        assert normalize(renamed) == normal
