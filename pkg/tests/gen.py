"""Seeded random generators shared by unit and acceptance tests: simple
polygons, fact stores, rule sets, and check-language ASTs for fuzzing."""

from __future__ import annotations

import math
import random
import string

from logicode.checklang import nodes
from logicode.dataset import ANOMALY_TYPES
from logicode.facts import PALETTE, FactStore, ObjectFacts
from logicode.rules import Rule, RuleSet, ruleset_with_sentences
from logicode import geometry

# ------------------------------------------------------------- polygons


def star_polygon(rng: random.Random, cx=None, cy=None, r_lo=10.0, r_hi=20.0, n=None):
    """Random star-shaped (hence simple) polygon around a center.

    Angles sit on a jittered grid so vertices cover the full circle and the
    polygon never degenerates into a sliver.
    """
    if cx is None:
        cx = rng.uniform(60.0, 500.0)
    if cy is None:
        cy = rng.uniform(60.0, 400.0)
    if n is None:
        n = rng.randint(5, 12)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    pts = []
    for i in range(n):
        a = phase + 2.0 * math.pi * (i + rng.uniform(0.0, 0.8)) / n
        r = rng.uniform(r_lo, r_hi)
        pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
    return tuple(pts)


# ----------------------------------------------------------- fact stores

STORE_NAMES = ("cable", "connector", "clip")


def random_store(rng: random.Random, image_id="img") -> FactStore:
    """Random store with 0..4 objects per name and palette-exact colors."""
    objects = []
    serial = 0
    for name in STORE_NAMES:
        for _ in range(rng.randint(0, 4)):
            polygon = star_polygon(rng)
            color = rng.choice(sorted(PALETTE))
            objects.append(
                ObjectFacts(
                    object_id=f"{name}_{serial}",
                    name=name,
                    area=geometry.area(polygon),
                    length=geometry.diameter(polygon),
                    centroid=geometry.centroid(polygon),
                    bbox=geometry.bounding_box(polygon),
                    color=PALETTE[color],
                    color_name=color,
                    attributes={},
                )
            )
            serial += 1
    return FactStore(image_id=image_id, objects=tuple(objects))


# -------------------------------------------------------------- rule sets


def random_ruleset(rng: random.Random) -> RuleSet:
    """1..6 random rules over the shared store vocabulary, lint-clean."""
    rules = []
    n = rng.randint(1, 6)
    palette = sorted(PALETTE)
    for i in range(n):
        kind = rng.choice(
            (
                "count_equals",
                "count_in_range",
                "length_in_range",
                "area_in_range",
                "order_matches",
                "attribute_match",
                "presence_required",
            )
        )
        subject = rng.choice(STORE_NAMES)
        anomaly = rng.choice(ANOMALY_TYPES)
        rid = f"r{i}_{kind}"
        if kind == "count_equals":
            rule = Rule(rid, anomaly, kind, subject, {"expected": rng.randint(0, 4)})
        elif kind == "count_in_range":
            lo = rng.randint(0, 3)
            rule = Rule(rid, anomaly, kind, subject, {"bounds": (lo, lo + rng.randint(0, 2))})
        elif kind in ("length_in_range", "area_in_range"):
            lo = rng.uniform(1.0, 400.0)
            rule = Rule(
                rid, anomaly, kind, subject, {"bounds": (lo, lo + rng.uniform(0.0, 600.0))}
            )
        elif kind == "order_matches":
            expected = tuple(rng.choice(palette) for _ in range(rng.randint(1, 4)))
            rule = Rule(
                rid, anomaly, kind, subject, {"axis": rng.choice(("x", "y")), "expected": expected}
            )
        elif kind == "attribute_match":
            other = rng.choice([m for m in STORE_NAMES if m != subject])
            mapping = {
                color: rng.randint(0, 4)
                for color in rng.sample(palette, rng.randint(1, 4))
            }
            rule = Rule(
                rid,
                anomaly,
                kind,
                (subject, other),
                {"attribute": "color_name", "mapping": mapping},
            )
        else:
            rule = Rule(rid, anomaly, kind, subject, {})
        rules.append(rule)
    return ruleset_with_sentences("synthetic_connector_scene", rules)


# ------------------------------------------------------------ AST fuzzing

_IDENT_POOL = ("alpha", "beta", "gamma", "v", "w", "item", "measure", "x1", "y2")
_NAME_POOL = ("cable", "connector", "clip", "widget")
_SAFE_CHARS = string.ascii_letters + string.digits + " .,;:!?_-+*/[]{}()<>'\"\\\n\t"


def _gen_string(rng: random.Random) -> str:
    return "".join(rng.choice(_SAFE_CHARS) for _ in range(rng.randint(0, 12)))


def _gen_float(rng: random.Random) -> float:
    value = rng.uniform(-1.0, 1.0) * (10.0 ** rng.randint(-6, 8))
    return value


def _gen_object(rng: random.Random, env: list[str], depth: int) -> nodes.Expr:
    if env and rng.random() < 0.4:
        return nodes.Var(name=rng.choice(env))
    if rng.random() < 0.6:
        base = nodes.Call(func="find", args=(nodes.StrLit(value=rng.choice(_NAME_POOL)),))
    else:
        base = nodes.Call(
            func="order",
            args=(
                nodes.StrLit(value=rng.choice(_NAME_POOL)),
                nodes.StrLit(value=rng.choice(("x", "y"))),
            ),
        )
    return nodes.Index(base=base, index=nodes.IntLit(value=rng.randint(0, 3)))


def _gen_numeric(rng: random.Random, env: list[str], depth: int) -> nodes.Expr:
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return nodes.IntLit(value=rng.randint(-1000, 1000))
        return nodes.FloatLit(value=_gen_float(rng))
    roll = rng.random()
    if roll < 0.25:
        return nodes.Call(func="count", args=(nodes.StrLit(value=rng.choice(_NAME_POOL)),))
    if roll < 0.5:
        record = rng.choice(("size", "position"))
        fld = rng.choice(("area", "length")) if record == "size" else rng.choice(("x", "y"))
        return nodes.FieldAccess(
            base=nodes.Call(
                func=record,
                args=(
                    nodes.StrLit(value=rng.choice(_NAME_POOL)),
                    nodes.IntLit(value=rng.randint(0, 3)),
                ),
            ),
            field=fld,
        )
    if roll < 0.8:
        return nodes.Binary(
            op=rng.choice("+-*/"),
            left=_gen_numeric(rng, env, depth - 1),
            right=_gen_numeric(rng, env, depth - 1),
        )
    if roll < 0.9:
        operand = _gen_numeric(rng, env, depth - 1)
        if isinstance(operand, (nodes.IntLit, nodes.FloatLit)):
            return operand
        return nodes.Unary(op="-", operand=operand)
    return nodes.Let(
        name=rng.choice(_IDENT_POOL),
        value=_gen_numeric(rng, env, depth - 1),
        body=_gen_numeric(rng, env, depth - 1),
    )


def _gen_bool(rng: random.Random, env: list[str], depth: int) -> nodes.Expr:
    if depth <= 0:
        return nodes.BoolLit(value=rng.random() < 0.5)
    roll = rng.random()
    if roll < 0.25:
        return nodes.Compare(
            op=rng.choice(("<", "<=", "=", "!=", ">=", ">")),
            left=_gen_numeric(rng, env, depth - 1),
            right=_gen_numeric(rng, env, depth - 1),
        )
    if roll < 0.35:
        return nodes.Compare(
            op=rng.choice(("=", "!=")),
            left=nodes.FieldAccess(
                base=nodes.Call(func="color", args=(_gen_object(rng, env, depth - 1),)),
                field="name",
            ),
            right=nodes.StrLit(value=rng.choice(sorted(PALETTE))),
        )
    if roll < 0.5:
        return nodes.RangeTest(
            value=_gen_numeric(rng, env, depth - 1),
            low=_gen_numeric(rng, env, depth - 1),
            high=_gen_numeric(rng, env, depth - 1),
        )
    if roll < 0.6:
        return nodes.Not(operand=_gen_bool(rng, env, depth - 1))
    if roll < 0.8:
        cls = nodes.And if rng.random() < 0.5 else nodes.Or
        return cls(
            left=_gen_bool(rng, env, depth - 1), right=_gen_bool(rng, env, depth - 1)
        )
    if roll < 0.9:
        var = rng.choice(_IDENT_POOL)
        return nodes.Quantifier(
            kind=rng.choice(("forall", "exists")),
            var=var,
            domain=nodes.Call(func="find", args=(nodes.StrLit(value=rng.choice(_NAME_POOL)),)),
            body=_gen_bool(rng, env + [var], depth - 1),
        )
    return nodes.Call(
        func="overlaps",
        args=(_gen_object(rng, env, depth - 1), _gen_object(rng, env, depth - 1)),
    )


def random_program(rng: random.Random, max_checks: int = 4) -> nodes.Program:
    """Random syntactically well-formed program in parser-canonical shape."""
    checks = []
    for i in range(rng.randint(0, max_checks)):
        n_bindings = rng.randint(0, 3)
        bindings = tuple(
            nodes.Binding(name=f"B{j}", expr=_gen_numeric(rng, [], 2))
            for j in range(n_bindings)
        )
        template_bits = [_gen_string(rng).replace("{", "").replace("}", "")]
        for binding in bindings:
            if rng.random() < 0.7:
                template_bits.append("{" + binding.name + "}")
                template_bits.append(_gen_string(rng).replace("{", "").replace("}", ""))
        checks.append(
            nodes.Check(
                name=f"c{i}",
                covers=rng.choice(("r_a", "r_b", "r_c")),
                anomaly_type=rng.choice(tuple(nodes.ANOMALY_SHORT.values())),
                condition=_gen_bool(rng, [], rng.randint(1, 4)),
                reason_template="".join(template_bits),
                bindings=bindings,
            )
        )
    return nodes.Program(checks=tuple(checks))
