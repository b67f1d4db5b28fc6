"""Canonical pretty-printer.

The printed form is the wire format for cassettes and golden files, so it
must be stable and must reparse to a structurally equal program.
"""

from __future__ import annotations

from .nodes import (
    ANOMALY_LONG_TO_SHORT,
    And,
    Binary,
    BoolLit,
    Call,
    Check,
    Compare,
    Expr,
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

# Precedence levels; children printed with a minimum level get parenthesized
# when their own level is lower.
_P_QUANT = 0
_P_OR = 1
_P_AND = 2
_P_NOT = 3
_P_CMP = 4
_P_SUM = 5
_P_TERM = 6
_P_UNARY = 7
_P_POSTFIX = 8
_P_ATOM = 9


def _quote(text: str) -> str:
    out = text.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def _num(value) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(value)


def _prec(node: Expr) -> int:
    if isinstance(node, (Quantifier, Let)):
        return _P_QUANT
    if isinstance(node, Or):
        return _P_OR
    if isinstance(node, And):
        return _P_AND
    if isinstance(node, Not):
        return _P_NOT
    if isinstance(node, (Compare, RangeTest)):
        return _P_CMP
    if isinstance(node, Binary):
        return _P_SUM if node.op in "+-" else _P_TERM
    if isinstance(node, Unary):
        return _P_UNARY
    if isinstance(node, (FieldAccess, Index)):
        return _P_POSTFIX
    return _P_ATOM


def _fmt(node: Expr, min_prec: int) -> str:
    text = _fmt_bare(node)
    if _prec(node) < min_prec:
        return f"({text})"
    return text


def _fmt_bare(node: Expr) -> str:
    if isinstance(node, IntLit):
        return _num(node.value)
    if isinstance(node, FloatLit):
        if node.value < 0:
            return f"-{repr(-node.value)}"
        return repr(node.value)
    if isinstance(node, StrLit):
        return _quote(node.value)
    if isinstance(node, BoolLit):
        return "true" if node.value else "false"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        args = ", ".join(_fmt(a, _P_QUANT) for a in node.args)
        return f"{node.func}({args})"
    if isinstance(node, FieldAccess):
        return f"{_fmt(node.base, _P_POSTFIX)}.{node.field}"
    if isinstance(node, Index):
        return f"{_fmt(node.base, _P_POSTFIX)}[{_fmt(node.index, _P_QUANT)}]"
    if isinstance(node, Unary):
        return f"-{_fmt(node.operand, _P_POSTFIX)}"
    if isinstance(node, Binary):
        if node.op in "+-":
            return f"{_fmt(node.left, _P_SUM)} {node.op} {_fmt(node.right, _P_TERM)}"
        return f"{_fmt(node.left, _P_TERM)} {node.op} {_fmt(node.right, _P_UNARY)}"
    if isinstance(node, Compare):
        return f"{_fmt(node.left, _P_SUM)} {node.op} {_fmt(node.right, _P_SUM)}"
    if isinstance(node, RangeTest):
        return (
            f"{_fmt(node.value, _P_SUM)} in "
            f"[{_fmt(node.low, _P_QUANT)}, {_fmt(node.high, _P_QUANT)}]"
        )
    if isinstance(node, Not):
        return f"not ({_fmt(node.operand, _P_QUANT)})"
    if isinstance(node, And):
        return f"{_fmt(node.left, _P_AND)} and {_fmt(node.right, _P_NOT)}"
    if isinstance(node, Or):
        return f"{_fmt(node.left, _P_OR)} or {_fmt(node.right, _P_AND)}"
    if isinstance(node, Quantifier):
        return (
            f"{node.kind} {node.var} in {_fmt(node.domain, _P_OR)}: "
            f"{_fmt(node.body, _P_QUANT)}"
        )
    if isinstance(node, Let):
        return (
            f"let {node.name} = {_fmt(node.value, _P_OR)} in {_fmt(node.body, _P_QUANT)}"
        )
    raise TypeError(f"unknown node {type(node).__name__}")


def format_expr(node: Expr) -> str:
    return _fmt(node, _P_QUANT)


def format_check(check: Check) -> str:
    lines = [
        f"check {check.name} covers {check.covers} "
        f"type {ANOMALY_LONG_TO_SHORT[check.anomaly_type]}",
        f"when {format_expr(check.condition)}",
        f"reason {_quote(check.reason_template)}",
    ]
    if check.bindings:
        parts = ", ".join(f"{b.name} = {format_expr(b.expr)}" for b in check.bindings)
        lines.append(f"with {parts}")
    return "\n".join(lines)


def pretty_print(program: Program) -> str:
    if not program.checks:
        return ""
    return "\n\n".join(format_check(c) for c in program.checks) + "\n"
