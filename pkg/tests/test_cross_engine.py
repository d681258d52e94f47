from src.application.bottomup import naive_answers, run_compiled
from src.application.magic import magic_stats
from src.application.sld_interpreter import TreeLimits, answers
from src.application.slddb_compiler import ExploreLimits, explore
from src.application.slddb_emitter import emit_rules
from src.application.slddb_states import Granularity
from src.domain.errors import StateSpaceExceeded
from tests.program_corpus import corpus

LIMITS = TreeLimits(max_depth=60, max_nodes=3_000)
WIDE_LIMITS = ExploreLimits(max_states=300, max_cases=32)


def _check_sld(program, db, query, expected, context):
    sld = answers(program, db, query, LIMITS)
    if sld.truncated:
        assert sld <= expected, context
    else:
        assert sld == expected, context


def test_all_engines_agree_on_random_programs():
    checked = 0
    for instance in corpus(200, seed=42):
        program, query, db = instance.program, instance.query, instance.db
        context = f"\n{instance.program_text}{instance.query_text}\n{instance.facts_text}"

        expected, _ = naive_answers(program, db, query)
        found = {
            "slddb": run_compiled(emit_rules(explore(program, query, Granularity.MAXIMAL)), db)[0],
            "slddb-single": run_compiled(emit_rules(explore(program, query, Granularity.SINGLE_GOAL)), db)[0],
            "magic": magic_stats(program, query, db).answers,
        }
        for engine, result in found.items():
            assert result == expected, engine + context

        _check_sld(program, db, query, expected, context)
        checked += 1
    assert checked == 200


def test_engines_agree_or_stop_on_a_limit_for_wider_programs():
    size = 150
    compiled = 0
    for instance in corpus(size, seed=7, wide=True):
        program, query, db = instance.program, instance.query, instance.db
        context = f"\n{instance.program_text}{instance.query_text}\n{instance.facts_text}"

        expected, _ = naive_answers(program, db, query)
        assert magic_stats(program, query, db).answers == expected, "magic" + context
        for granularity in Granularity:
            try:
                system = explore(program, query, granularity, WIDE_LIMITS)
            except StateSpaceExceeded:
                continue
            assert run_compiled(emit_rules(system), db)[0] == expected, granularity.value + context
            compiled += 1

        _check_sld(program, db, query, expected, context)
    assert compiled >= size
