from pathlib import Path

import pytest

from src.application.bench_service import generate_chain
from src.infrastructure.parser import parse_program, parse_query

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


def load(name: str):
    return parse_program((PROGRAMS / name).read_text(encoding="utf-8"))


@pytest.fixture
def programs_dir() -> Path:
    return PROGRAMS


@pytest.fixture
def path_program():
    return load("path.dl")


@pytest.fixture
def path_left_program():
    return load("path_left.dl")


@pytest.fixture
def sg_program():
    return load("same_generation.dl")


@pytest.fixture
def path_query(path_program):
    return parse_query("?- path(0, A).", path_program)


@pytest.fixture
def chain():
    return generate_chain
