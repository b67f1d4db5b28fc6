"""Tree-walking evaluator for check programs.

Evaluation is pure and total: runtime faults (division by zero, index out
of range, exhausted step budget) raise EvaluationError, which callers map
to an evaluation_failed verdict. Everything else terminates structurally.
"""

from __future__ import annotations

from typing import NamedTuple

from ..errors import LogicodeError
from ..facts import FactError, FactStore, ObjectFacts
from ..reports import PREDICTED_ABNORMAL, PREDICTED_NORMAL, AnalysisReport
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

STEP_BUDGET = 10**6


class EvaluationError(LogicodeError):
    """Runtime failure inside one check."""

    def __init__(self, check: str | None, cause: str):
        super().__init__(f"check {check or '<bindings>'}: {cause}")
        self.check = check
        self.cause = cause


class SizeValue(NamedTuple):
    area: float
    length: float


class PositionValue(NamedTuple):
    x: float
    y: float


class ColorValue(NamedTuple):
    name: str


class _Machine:
    def __init__(self, store: FactStore, budget: int):
        self.store = store
        self.steps = 0
        self.budget = budget

    def eval(self, node: Expr, env: dict):
        self.steps += 1
        if self.steps > self.budget:
            raise _Fault(f"step budget of {self.budget} AST-node visits exceeded")

        if isinstance(node, (IntLit, FloatLit, StrLit, BoolLit)):
            return node.value
        if isinstance(node, Var):
            try:
                return env[node.name]
            except KeyError:
                raise _Fault(f"unbound variable {node.name!r}") from None
        if isinstance(node, Call):
            return self._call(node, env)
        if isinstance(node, FieldAccess):
            base = self.eval(node.base, env)
            try:
                return getattr(base, node.field)
            except AttributeError:
                raise _Fault(
                    f"value of type {type(base).__name__} has no field {node.field!r}"
                ) from None
        if isinstance(node, Index):
            base = self.eval(node.base, env)
            idx = self.eval(node.index, env)
            if not isinstance(base, tuple):
                raise _Fault(f"cannot index into {type(base).__name__}")
            if not isinstance(idx, int) or isinstance(idx, bool):
                raise _Fault("list index must be an int")
            if not 0 <= idx < len(base):
                raise _Fault(f"index {idx} out of range for list of {len(base)}")
            return base[idx]
        if isinstance(node, Unary):
            value = self.eval(node.operand, env)
            self._need_number(value, "unary '-'")
            return -value
        if isinstance(node, Binary):
            left = self.eval(node.left, env)
            right = self.eval(node.right, env)
            self._need_number(left, node.op)
            self._need_number(right, node.op)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if right == 0:
                raise _Fault("division by zero")
            return left / right
        if isinstance(node, Compare):
            left = self.eval(node.left, env)
            right = self.eval(node.right, env)
            if node.op == "=":
                return left == right
            if node.op == "!=":
                return left != right
            self._need_number(left, node.op)
            self._need_number(right, node.op)
            if node.op == "<":
                return left < right
            if node.op == "<=":
                return left <= right
            if node.op == ">":
                return left > right
            return left >= right
        if isinstance(node, RangeTest):
            value = self.eval(node.value, env)
            low = self.eval(node.low, env)
            high = self.eval(node.high, env)
            for v in (value, low, high):
                self._need_number(v, "range test")
            return low <= value <= high
        if isinstance(node, Not):
            return not self._bool(node.operand, env)
        if isinstance(node, And):
            return self._bool(node.left, env) and self._bool(node.right, env)
        if isinstance(node, Or):
            return self._bool(node.left, env) or self._bool(node.right, env)
        if isinstance(node, Quantifier):
            domain = self.eval(node.domain, env)
            if not isinstance(domain, tuple):
                raise _Fault("quantifier domain is not a list")
            inner = dict(env)
            if node.kind == "forall":
                for obj in domain:
                    inner[node.var] = obj
                    if not self._bool(node.body, inner):
                        return False
                return True
            for obj in domain:
                inner[node.var] = obj
                if self._bool(node.body, inner):
                    return True
            return False
        if isinstance(node, Let):
            value = self.eval(node.value, env)
            return self.eval(node.body, {**env, node.name: value})
        raise _Fault(f"unknown node {type(node).__name__}")

    def _bool(self, node: Expr, env: dict) -> bool:
        value = self.eval(node, env)
        if not isinstance(value, bool):
            raise _Fault(f"expected bool, got {type(value).__name__}")
        return value

    @staticmethod
    def _need_number(value, op: str):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise _Fault(f"{op} needs a number, got {type(value).__name__}")

    def _resolve_object(self, args, env: dict, query: str) -> ObjectFacts:
        """Resolve object addressing: a 1-tuple (obj expr) or (name, index)."""
        if len(args) == 1:
            value = self.eval(args[0], env)
            if not isinstance(value, ObjectFacts):
                raise _Fault(f"{query} needs an object, got {type(value).__name__}")
            return value
        name = self.eval(args[0], env)
        idx = self.eval(args[1], env)
        if not isinstance(name, str):
            raise _Fault(f"{query} object name must be a string")
        if not isinstance(idx, int) or isinstance(idx, bool):
            raise _Fault(f"{query} object index must be an int")
        objs = self.store.find(name)
        if not 0 <= idx < len(objs):
            raise _Fault(f"no {name!r} object at index {idx} (found {len(objs)})")
        return objs[idx]

    def _call(self, node: Call, env: dict):
        func = node.func
        args = node.args
        try:
            if func == "count" and len(args) == 1:
                name = self.eval(args[0], env)
                if not isinstance(name, str):
                    raise _Fault("count needs an object name string")
                return self.store.count(name)
            if func == "find" and len(args) == 1:
                name = self.eval(args[0], env)
                if not isinstance(name, str):
                    raise _Fault("find needs an object name string")
                return self.store.find(name)
            if func == "size" and len(args) in (1, 2):
                obj = self._resolve_object(args, env, "size")
                return SizeValue(area=obj.area, length=obj.length)
            if func == "position" and len(args) in (1, 2):
                obj = self._resolve_object(args, env, "position")
                return PositionValue(x=obj.centroid[0], y=obj.centroid[1])
            if func == "color" and len(args) in (1, 2):
                obj = self._resolve_object(args, env, "color")
                return ColorValue(name=obj.color_name)
            if func == "order" and len(args) == 2:
                name = self.eval(args[0], env)
                axis = self.eval(args[1], env)
                if not isinstance(name, str) or not isinstance(axis, str):
                    raise _Fault("order needs (name, axis) strings")
                return self.store.order(name, axis)
            if func == "nearest" and len(args) in (2, 3):
                obj = self._resolve_object(args[:-1], env, "nearest")
                target = self.eval(args[-1], env)
                if not isinstance(target, str):
                    raise _Fault("nearest target name must be a string")
                return self.store.nearest(obj.object_id, target)
            if func == "overlaps" and len(args) == 2:
                a = self.eval(args[0], env)
                b = self.eval(args[1], env)
                if not isinstance(a, ObjectFacts) or not isinstance(b, ObjectFacts):
                    raise _Fault("overlaps needs two objects")
                return self.store.overlaps(a.object_id, b.object_id)
        except FactError as exc:
            raise _Fault(str(exc)) from exc
        raise _Fault(f"unknown query {func!r} with {len(args)} argument(s)")


class _Fault(Exception):
    """Internal runtime fault; wrapped into EvaluationError with the check name."""


def _render(template: str, values: dict) -> str:
    def fmt(value) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return f"{value:.2f}"
        return str(value)

    out = template
    for name, value in values.items():
        out = out.replace("{" + name + "}", fmt(value))
    return out


def evaluate(program: Program, store: FactStore, step_budget: int = STEP_BUDGET) -> AnalysisReport:
    """Run every check against a store; abnormal when any check fires.

    Reasons appear in program order. Reason bindings are evaluated only for
    fired checks.
    """
    machine = _Machine(store, step_budget)
    reasons: list[str] = []
    for check in program.checks:
        try:
            fired = machine._bool(check.condition, {})
            if not fired:
                continue
            env: dict = {}
            values: dict = {}
            for binding in check.bindings:
                value = machine.eval(binding.expr, env)
                env[binding.name] = value
                values[binding.name] = value
            reasons.append(_render(check.reason_template, values))
        except _Fault as exc:
            raise EvaluationError(check.name, str(exc)) from exc
    return AnalysisReport(
        image_id=store.image_id,
        predicted=PREDICTED_ABNORMAL if reasons else PREDICTED_NORMAL,
        reasons=tuple(reasons),
    )
