"""Text syntax for programs, queries and fact files.

Programs are rules plus `% edb name/arity` directives; any other `%`
starts a comment. Queries read `?- a1, ..., an.` and fact files hold one
ground atom per clause. Compiled rules may also carry `X != Y` guards.
"""

import logging
import re
from typing import Dict, Iterable, List, Optional, Set

import lark
from lark.exceptions import UnexpectedInput, VisitError

from src.domain.datalog import (
    ANSWER,
    Constant,
    Database,
    Disequality,
    Literal,
    Predicate,
    Program,
    Query,
    Rule,
    Variable,
)
from src.domain.errors import (
    ArityConflict,
    DatalogSyntaxError,
    FactFileError,
    ReservedNameError,
)

logger = logging.getLogger(__name__)

GRAMMAR = r"""
    program: _item*
    _item: edb_directive | clause

    edb_directive: EDB_DIRECTIVE

    clause: atom (":-" _condition ("," _condition)*)? "."
    _condition: atom | disequality
    disequality: term "!=" term

    query: "?-" atom ("," atom)* "."

    facts: fact*
    fact: atom "."

    atom: NAME ("(" term ("," term)* ")")?

    term: VARIABLE -> variable
        | NAME -> symbol
        | INT -> integer
        | QUOTED -> quoted

    EDB_DIRECTIVE.2: /%[ \t]*edb[ \t]+[a-z][A-Za-z0-9_]*[ \t]*\/[ \t]*[0-9]+/
    NAME: /[a-z][A-Za-z0-9_]*/
    VARIABLE: /[A-Z][A-Za-z0-9_]*/
    INT: /-?[0-9]+/
    QUOTED: /'(\\.|[^'\\])*'/
    COMMENT: /%[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_DIRECTIVE = re.compile(r"%\s*edb\s+([a-z][A-Za-z0-9_]*)\s*/\s*([0-9]+)")
_RESERVED_VARIABLE = re.compile(r"[CV][0-9]+\Z")
_ESCAPE = re.compile(r"\\(.)")

_parser = lark.Lark(GRAMMAR, start=["program", "query", "facts"], parser="lalr")


class _ToAst(lark.Transformer):
    """Builds domain values from the parse tree."""

    def variable(self, children):
        token = children[0]
        if _RESERVED_VARIABLE.match(token):
            raise ReservedNameError(
                f"Variable name {token} is reserved (line {token.line}, column {token.column})"
            )
        return Variable(str(token))

    def symbol(self, children):
        return Constant(str(children[0]))

    def integer(self, children):
        return Constant(int(children[0]))

    def quoted(self, children):
        return Constant(_ESCAPE.sub(r"\1", str(children[0])[1:-1]))

    def atom(self, children):
        name = children[0]
        if name == ANSWER:
            raise ReservedNameError(
                f"Predicate '{ANSWER}' is reserved (line {name.line}, column {name.column})"
            )
        return Literal(str(name), tuple(children[1:]))

    def disequality(self, children):
        return Disequality(children[0], children[1])

    def clause(self, children):
        head, conditions = children[0], children[1:]
        body = tuple(c for c in conditions if isinstance(c, Literal))
        guards = tuple(c for c in conditions if isinstance(c, Disequality))
        return Rule(head, body, guards)

    def edb_directive(self, children):
        token = children[0]
        match = _DIRECTIVE.match(str(token))
        if match.group(1) == ANSWER:
            raise ReservedNameError(
                f"Predicate '{ANSWER}' is reserved (line {token.line}, column {token.column})"
            )
        return Predicate(match.group(1), int(match.group(2)))

    def program(self, children):
        rules = tuple(child for child in children if isinstance(child, Rule))
        edb = frozenset(child for child in children if isinstance(child, Predicate))
        return Program(rules=rules, edb=edb)

    def query(self, children):
        return Query(tuple(children))

    def fact(self, children):
        return children[0]

    def facts(self, children):
        return list(children)


def _parse(text: str, start: str):
    try:
        tree = _parser.parse(text, start=start)
        return _ToAst().transform(tree)
    except UnexpectedInput as e:
        first_line = str(e).strip().splitlines()[0] if str(e).strip() else "Unexpected input"
        raise DatalogSyntaxError(first_line, e.line, e.column) from None
    except VisitError as e:
        raise e.orig_exc from None


def _check_arities(literals: Iterable[Literal], declared: Iterable[Predicate] = ()) -> None:
    arities: Dict[str, Set[int]] = {}
    for predicate in declared:
        arities.setdefault(predicate.name, set()).add(predicate.arity)
    for literal in literals:
        arities.setdefault(literal.name, set()).add(literal.arity)
    for name in sorted(arities):
        if len(arities[name]) > 1:
            raise ArityConflict(
                f"Predicate {name} used with arities {', '.join(map(str, sorted(arities[name])))}"
            )


def parse_program(text: str) -> Program:
    program = _parse(text, "program")
    literals = [lit for rule in program.rules for lit in (rule.head,) + rule.body]
    _check_arities(literals, program.edb)
    logger.debug(f"Parsed {len(program.rules)} rules, EDB {sorted(map(str, program.edb))}")
    return program


def parse_query(text: str, program: Optional[Program] = None) -> Query:
    query = _parse(text, "query")
    declared: List[Predicate] = sorted(program.predicates) if program is not None else []
    _check_arities(query.literals, declared)
    return query


def parse_facts(text: str, program: Optional[Program] = None) -> Database:
    """Read ground facts; with a program, every fact must use a declared EDB predicate."""
    facts = _parse(text, "facts")
    for fact in facts:
        if not fact.is_ground:
            raise FactFileError(f"Fact {fact} is not ground")
        if program is not None and not program.is_edb(fact.predicate):
            raise FactFileError(f"Fact {fact} does not use a declared EDB predicate")
    _check_arities(facts)
    return Database.of(facts)
