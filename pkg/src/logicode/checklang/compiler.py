"""Deterministic rule-set -> check-program compiler.

One check per rule, semantics identical to the reference rule evaluator by
construction: same guards, same inclusive bounds, same reason text. Used as
the generation oracle and as the stub backend's canonical answer.
"""

from __future__ import annotations

from functools import reduce

from ..rules import Rule, RuleSet
from .nodes import (
    And,
    Binding,
    Call,
    Check,
    Compare,
    Expr,
    FieldAccess,
    FloatLit,
    Index,
    IntLit,
    Not,
    Or,
    Program,
    RangeTest,
    StrLit,
)
from .printer import pretty_print


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _count(name: str) -> Expr:
    return Call(func="count", args=(StrLit(value=name),))


def _num_lit(value) -> Expr:
    if isinstance(value, int) and not isinstance(value, bool):
        return IntLit(value=value)
    return FloatLit(value=float(value))


def _and_chain(parts: list[Expr]) -> Expr:
    return reduce(lambda l, r: And(left=l, right=r), parts)


def _or_chain(parts: list[Expr]) -> Expr:
    return reduce(lambda l, r: Or(left=l, right=r), parts)


def _compile_rule(rule: Rule) -> Check:
    kind = rule.kind
    params = rule.params

    if kind == "count_equals":
        subject = rule.subject
        expected = params["expected"]
        condition = Not(
            operand=Compare(op="=", left=_count(subject), right=IntLit(value=expected))
        )
        template = f"expected {expected} {subject}, found {{N}}"
        bindings = (Binding(name="N", expr=_count(subject)),)

    elif kind == "count_in_range":
        subject = rule.subject
        lo, hi = params["bounds"]
        condition = Not(
            operand=RangeTest(value=_count(subject), low=_num_lit(lo), high=_num_lit(hi))
        )
        template = f"{subject} count {{N}} outside [{lo}, {hi}]"
        bindings = (Binding(name="N", expr=_count(subject)),)

    elif kind == "presence_required":
        subject = rule.subject
        condition = Compare(op="=", left=_count(subject), right=IntLit(value=0))
        template = f"expected >=1 {subject}, found 0"
        bindings = ()

    elif kind in ("length_in_range", "area_in_range"):
        subject = rule.subject
        lo, hi = params["bounds"]
        measure = "length" if kind == "length_in_range" else "area"
        value_expr = FieldAccess(
            base=Call(func="size", args=(StrLit(value=subject), IntLit(value=0))),
            field=measure,
        )
        condition = And(
            left=Compare(op=">=", left=_count(subject), right=IntLit(value=1)),
            right=Not(
                operand=RangeTest(
                    value=value_expr,
                    low=FloatLit(value=float(lo)),
                    high=FloatLit(value=float(hi)),
                )
            ),
        )
        template = f"{subject} {measure} {{V}} outside [{_fmt(lo)}, {_fmt(hi)}]"
        bindings = (Binding(name="V", expr=value_expr),)

    elif kind == "order_matches":
        subject = rule.subject
        axis = params["axis"]
        expected = list(params["expected"])

        def color_at(i: int) -> Expr:
            return FieldAccess(
                base=Call(
                    func="color",
                    args=(
                        Index(
                            base=Call(
                                func="order",
                                args=(StrLit(value=subject), StrLit(value=axis)),
                            ),
                            index=IntLit(value=i),
                        ),
                    ),
                ),
                field="name",
            )

        matches = _and_chain(
            [
                Compare(op="=", left=color_at(i), right=StrLit(value=want))
                for i, want in enumerate(expected)
            ]
        )
        condition = And(
            left=Compare(
                op="=", left=_count(subject), right=IntLit(value=len(expected))
            ),
            right=Not(operand=matches),
        )
        slots = ", ".join(f"{{O{i}}}" for i in range(len(expected)))
        template = f"{subject} order [{slots}] expected [{', '.join(expected)}]"
        bindings = tuple(
            Binding(name=f"O{i}", expr=color_at(i)) for i in range(len(expected))
        )

    elif kind == "attribute_match":
        source, target = rule.subject
        mapping = dict(params["mapping"])
        value_expr = FieldAccess(
            base=Call(func="color", args=(StrLit(value=source), IntLit(value=0))),
            field="name",
        )
        items = sorted(mapping.items())
        known = _or_chain(
            [Compare(op="=", left=value_expr, right=StrLit(value=k)) for k, _ in items]
        )
        per_key = [
            And(
                left=Compare(op="=", left=value_expr, right=StrLit(value=k)),
                right=Not(
                    operand=Compare(op="=", left=_count(target), right=IntLit(value=v))
                ),
            )
            for k, v in items
        ]
        mismatch = _or_chain(per_key + [Not(operand=known)])
        condition = And(
            left=Compare(op=">=", left=_count(source), right=IntLit(value=1)),
            right=mismatch,
        )
        template = f"{source} color {{V}} does not match {target} count {{M}}"
        bindings = (
            Binding(name="V", expr=value_expr),
            Binding(name="M", expr=_count(target)),
        )

    else:
        raise ValueError(f"cannot compile rule kind {kind!r}")

    return Check(
        name=f"c_{rule.rule_id}",
        covers=rule.rule_id,
        anomaly_type=rule.anomaly_type,
        condition=condition,
        reason_template=f"{rule.anomaly_type}: {template}",
        bindings=bindings,
    )


def compile_reference(ruleset: RuleSet) -> Program:
    """Compile every rule to one check; coverage is complete by construction."""
    checks = tuple(_compile_rule(rule) for rule in ruleset.rules)
    program = Program(checks=checks)
    return Program(checks=checks, source_text=pretty_print(program))
