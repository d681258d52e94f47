"""Exceptions raised by the slddb workbench."""

from typing import Any, Dict, Optional, Sequence


class SlddbError(Exception):
    """Base class for all workbench errors."""
    pass


class DatalogSyntaxError(SlddbError):
    """Raised when program, query or fact text does not match the grammar."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{location}")


class ArityConflict(SlddbError):
    """Raised when one predicate name is used with different arities."""
    pass


class ReservedNameError(SlddbError):
    """Raised when input text uses the answer predicate or a reserved variable name."""
    pass


class FactFileError(SlddbError):
    """Raised when a fact file contains non-ground or undeclared facts."""
    pass


class LeftRecursionDiverged(SlddbError):
    """Raised when closure saturation produces more goals than the bound allows."""

    def __init__(self, bound: int, goals: Sequence[Any]):
        self.bound = bound
        self.goals = tuple(goals)
        super().__init__(
            f"Closure exceeded {bound} goals (left recursion?); "
            f"first goal: {self.goals[0] if self.goals else '-'}"
        )


class StateSpaceExceeded(SlddbError):
    """Raised when exploration needs more states than max_states, or a state more parameters than max_params."""

    def __init__(self, limit: int, unit: str = "states"):
        self.limit = limit
        self.unit = unit
        super().__init__(f"State space exceeded {limit} {unit}")


class UnsupportedProgram(SlddbError):
    """Raised by explore's pre-check when a program breaks the finiteness hypotheses."""

    def __init__(self, reasons: Sequence[str]):
        self.reasons = tuple(reasons)
        super().__init__("; ".join(self.reasons))


class EngineDisagreement(SlddbError):
    """Raised when two evaluation engines compute different answer sets."""

    def __init__(self, n: int, answers: Dict[str, Any]):
        self.n = n
        self.answers = answers
        sizes = ", ".join(f"{engine}={len(found)}" for engine, found in answers.items())
        super().__init__(f"Engines disagree for n={n}: {sizes}")


class UndecidedCondition(SlddbError):
    """A parameter condition is needed that the current case does not decide.

    Raised inside closure and successor computation; case splitting
    catches it and retries with the condition assumed true and false.
    """

    def __init__(self, parameter: Any, term: Any):
        self.parameter = parameter
        self.term = term
        super().__init__(f"Undecided condition {parameter} = {term}")
