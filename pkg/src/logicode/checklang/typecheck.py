"""Static validation: types, query signatures, placeholder binding and
rule coverage. Never raises; everything lands in the ValidationReport."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..rules import RuleSet
from .nodes import (
    And,
    Binary,
    BoolLit,
    Call,
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

T_INT = "int"
T_FLOAT = "float"
T_BOOL = "bool"
T_STR = "string"
T_OBJ = "object"
T_LIST = "list"
T_SIZE = "size"
T_POS = "position"
T_COLOR = "color"
T_ERR = "<error>"

_NUMERIC = (T_INT, T_FLOAT)
_RENDERABLE = (T_INT, T_FLOAT, T_BOOL, T_STR)

_FIELDS = {
    T_SIZE: {"length": T_FLOAT, "area": T_FLOAT},
    T_POS: {"x": T_FLOAT, "y": T_FLOAT},
    T_COLOR: {"name": T_STR},
}

# func -> list of (arg type tuple, result type)
_SIGNATURES: dict[str, list[tuple[tuple[str, ...], str]]] = {
    "count": [((T_STR,), T_INT)],
    "find": [((T_STR,), T_LIST)],
    "size": [((T_OBJ,), T_SIZE), ((T_STR, T_INT), T_SIZE)],
    "position": [((T_OBJ,), T_POS), ((T_STR, T_INT), T_POS)],
    "color": [((T_OBJ,), T_COLOR), ((T_STR, T_INT), T_COLOR)],
    "order": [((T_STR, T_STR), T_LIST)],
    "nearest": [((T_OBJ, T_STR), T_OBJ), ((T_STR, T_INT, T_STR), T_OBJ)],
    "overlaps": [((T_OBJ, T_OBJ), T_BOOL)],
}

# Positions of object-name string arguments per query, for vocabulary checks.
_NAME_ARGS = {
    "count": (0,),
    "find": (0,),
    "size": (0,),
    "position": (0,),
    "color": (0,),
    "order": (0,),
    "nearest": (0, 1, 2),
    "overlaps": (),
}

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass
class ValidationReport:
    """Outcome of static validation for one program against one rule set."""

    type_errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    coverage: tuple[str, ...] = ()
    missing: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.type_errors

    @property
    def complete(self) -> bool:
        return self.ok and not self.missing


class _Checker:
    def __init__(self, report: ValidationReport, vocabulary):
        self.report = report
        self.vocabulary = vocabulary

    def error(self, node, message: str) -> str:
        pos = getattr(node, "pos", (0, 0))
        self.report.type_errors.append(f"{pos[0]}:{pos[1]}: {message}")
        return T_ERR

    def infer(self, node: Expr, env: dict[str, str]) -> str:
        if isinstance(node, IntLit):
            return T_INT
        if isinstance(node, FloatLit):
            return T_FLOAT
        if isinstance(node, StrLit):
            return T_STR
        if isinstance(node, BoolLit):
            return T_BOOL
        if isinstance(node, Var):
            if node.name not in env:
                return self.error(node, f"unknown variable {node.name!r}")
            return env[node.name]
        if isinstance(node, Call):
            return self._call(node, env)
        if isinstance(node, FieldAccess):
            base = self.infer(node.base, env)
            if base is T_ERR:
                return T_ERR
            fields = _FIELDS.get(base)
            if fields is None or node.field not in fields:
                return self.error(node, f"type {base} has no field {node.field!r}")
            return fields[node.field]
        if isinstance(node, Index):
            base = self.infer(node.base, env)
            idx = self.infer(node.index, env)
            if base is T_ERR or idx is T_ERR:
                return T_ERR
            if base != T_LIST:
                return self.error(node, f"cannot index into {base}")
            if idx != T_INT:
                return self.error(node, f"list index must be int, got {idx}")
            return T_OBJ
        if isinstance(node, Unary):
            operand = self.infer(node.operand, env)
            if operand is T_ERR:
                return T_ERR
            if operand not in _NUMERIC:
                return self.error(node, f"unary '-' needs a number, got {operand}")
            return operand
        if isinstance(node, Binary):
            left = self.infer(node.left, env)
            right = self.infer(node.right, env)
            if left is T_ERR or right is T_ERR:
                return T_ERR
            if left not in _NUMERIC or right not in _NUMERIC:
                return self.error(
                    node, f"arithmetic {node.op!r} needs numbers, got {left} and {right}"
                )
            if node.op == "/":
                return T_FLOAT
            return T_INT if left == right == T_INT else T_FLOAT
        if isinstance(node, Compare):
            left = self.infer(node.left, env)
            right = self.infer(node.right, env)
            if left is T_ERR or right is T_ERR:
                return T_ERR
            if node.op in ("=", "!="):
                comparable = (
                    (left in _NUMERIC and right in _NUMERIC)
                    or (left == right and left in (T_STR, T_BOOL))
                )
                if not comparable:
                    return self.error(
                        node, f"cannot compare {left} {node.op} {right}"
                    )
                return T_BOOL
            if left not in _NUMERIC or right not in _NUMERIC:
                return self.error(
                    node, f"ordering {node.op!r} needs numbers, got {left} and {right}"
                )
            return T_BOOL
        if isinstance(node, RangeTest):
            value = self.infer(node.value, env)
            low = self.infer(node.low, env)
            high = self.infer(node.high, env)
            if T_ERR in (value, low, high):
                return T_ERR
            for label, t in (("value", value), ("lower bound", low), ("upper bound", high)):
                if t not in _NUMERIC:
                    return self.error(node, f"range {label} must be a number, got {t}")
            return T_BOOL
        if isinstance(node, Not):
            operand = self.infer(node.operand, env)
            if operand is T_ERR:
                return T_ERR
            if operand != T_BOOL:
                return self.error(node, f"'not' needs bool, got {operand}")
            return T_BOOL
        if isinstance(node, (And, Or)):
            word = "and" if isinstance(node, And) else "or"
            left = self.infer(node.left, env)
            right = self.infer(node.right, env)
            if left is T_ERR or right is T_ERR:
                return T_ERR
            if left != T_BOOL or right != T_BOOL:
                return self.error(node, f"{word!r} needs bools, got {left} and {right}")
            return T_BOOL
        if isinstance(node, Quantifier):
            domain = self.infer(node.domain, env)
            if domain not in (T_LIST, T_ERR):
                self.error(node, f"quantifier domain must be a list, got {domain}")
            body = self.infer(node.body, {**env, node.var: T_OBJ})
            if body not in (T_BOOL, T_ERR):
                return self.error(node, f"quantifier body must be bool, got {body}")
            return T_BOOL
        if isinstance(node, Let):
            value = self.infer(node.value, env)
            if value is T_ERR:
                return T_ERR
            return self.infer(node.body, {**env, node.name: value})
        return self.error(node, f"unknown node {type(node).__name__}")

    def _call(self, node: Call, env: dict[str, str]) -> str:
        sigs = _SIGNATURES.get(node.func)
        if sigs is None:
            return self.error(node, f"unknown query {node.func!r}")
        arg_types = [self.infer(a, env) for a in node.args]
        if T_ERR in arg_types:
            return T_ERR
        for params, result in sigs:
            if list(params) == arg_types:
                self._check_name_args(node)
                if node.func == "order":
                    axis = node.args[1]
                    if isinstance(axis, StrLit) and axis.value not in ("x", "y"):
                        return self.error(node, f"axis must be \"x\" or \"y\", got {axis.value!r}")
                return result
        wanted = " or ".join("(" + ", ".join(p) + ")" for p, _ in sigs)
        return self.error(
            node,
            f"{node.func} expects {wanted}, got ({', '.join(arg_types)})",
        )

    def _check_name_args(self, node: Call) -> None:
        if self.vocabulary is None:
            return
        for idx in _NAME_ARGS.get(node.func, ()):
            if idx >= len(node.args):
                continue
            arg = node.args[idx]
            if isinstance(arg, StrLit) and arg.value not in self.vocabulary:
                self.report.warnings.append(
                    f"{arg.pos[0]}:{arg.pos[1]}: unknown object name {arg.value!r}"
                )


def _check_template(check, report: ValidationReport) -> None:
    bound = [b.name for b in check.bindings]
    dupes = {n for n in bound if bound.count(n) > 1}
    for name in sorted(dupes):
        report.type_errors.append(f"check {check.name}: duplicate binding {name!r}")
    placeholders = _PLACEHOLDER_RE.findall(check.reason_template)
    for ph in placeholders:
        if ph not in bound:
            report.type_errors.append(
                f"check {check.name}: placeholder {{{ph}}} has no binding"
            )
    stripped = _PLACEHOLDER_RE.sub("", check.reason_template)
    if "{" in stripped or "}" in stripped:
        report.type_errors.append(
            f"check {check.name}: malformed placeholder braces in reason template"
        )


def validate(program: Program, ruleset: RuleSet, vocabulary=None) -> ValidationReport:
    """Type-check a parsed program and compute rule coverage.

    ``vocabulary`` is the scene's object-name set; when given, unknown names
    become warnings (absent names are legal at runtime, find() is empty).
    """
    report = ValidationReport()
    checker = _Checker(report, set(vocabulary) if vocabulary is not None else None)
    rule_ids = [r.rule_id for r in ruleset.rules]
    covered: set[str] = set()

    for check in program.checks:
        if check.covers not in rule_ids:
            report.type_errors.append(
                f"check {check.name}: covers unknown rule {check.covers!r}"
            )
        else:
            covered.add(check.covers)
        cond_type = checker.infer(check.condition, {})
        if cond_type not in (T_BOOL, T_ERR):
            report.type_errors.append(
                f"check {check.name}: condition must be bool, got {cond_type}"
            )
        env: dict[str, str] = {}
        for binding in check.bindings:
            t = checker.infer(binding.expr, env)
            if t not in _RENDERABLE and t is not T_ERR:
                report.type_errors.append(
                    f"check {check.name}: binding {binding.name!r} has "
                    f"non-renderable type {t}"
                )
            env[binding.name] = t
        _check_template(check, report)

    report.coverage = tuple(sorted(covered))
    report.missing = tuple(r for r in rule_ids if r not in covered)
    return report
