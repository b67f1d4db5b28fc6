"""A small, closed, statically typed language for check programs.

Generated programs target this language instead of a general-purpose
runtime: evaluation is deterministic, terminates structurally (no
recursion, bounded quantifiers) and failure modes are classifiable.
"""

from .nodes import (  # noqa: F401
    And,
    Binding,
    BoolLit,
    Call,
    Check,
    Compare,
    FieldAccess,
    FloatLit,
    Index,
    IntLit,
    Let,
    Not,
    Or,
    Program,
    Quantifier,
    RangeTest,
    StrLit,
    Unary,
    Var,
)
from .parser import ParseError, parse
from .printer import pretty_print
from .typecheck import ValidationReport, validate
from .interp import EvaluationError, evaluate
from .compiler import compile_reference
from .grammar import API_REFERENCE, GRAMMAR_EBNF

import hashlib


def program_hash(program: Program) -> str:
    """Stable identifier of a program's canonical text."""
    return hashlib.sha256(pretty_print(program).encode("utf-8")).hexdigest()[:16]
