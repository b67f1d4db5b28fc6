"""AST node definitions.

Nodes compare structurally: source positions and cached source text are
excluded from equality so a parse -> pretty-print -> parse trip is a
fixpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

Pos = tuple[int, int]

ANOMALY_SHORT = {
    "Quantity": "Quantity Anomaly",
    "Size": "Size Anomaly",
    "Position": "Position Anomaly",
    "Matching": "Matching Anomaly",
}
ANOMALY_LONG_TO_SHORT = {v: k for k, v in ANOMALY_SHORT.items()}


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class FloatLit(Expr):
    value: float
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class StrLit(Expr):
    value: str
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple[Expr, ...]
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class FieldAccess(Expr):
    base: Expr
    field: str
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Index(Expr):
    base: Expr
    index: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # only '-'
    operand: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # + - * /
    left: Expr
    right: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Compare(Expr):
    op: str  # < <= = != >= >
    left: Expr
    right: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class RangeTest(Expr):
    """Inclusive interval membership: value in [low, high]."""

    value: Expr
    low: Expr
    high: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Quantifier(Expr):
    kind: str  # forall | exists
    var: str
    domain: Expr
    body: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Let(Expr):
    name: str
    value: Expr
    body: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Binding:
    name: str
    expr: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Check:
    """One named check: fires when its condition is true."""

    name: str
    covers: str
    anomaly_type: str  # long form, e.g. "Size Anomaly"
    condition: Expr
    reason_template: str
    bindings: tuple[Binding, ...] = ()
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    checks: tuple[Check, ...]
    source_text: str = field(default="", compare=False, repr=False)
