"""Parity acceptance: for every rule kind, a reference foreign-runtime
function must agree with the embedded check evaluator on verdicts AND
reason strings over 50 fixture stores per kind.

The primary package is a test-time dependency here: it provides the
embedded evaluator and the canonical fact-table dump the shim consumes.
"""

import textwrap

import pytest

from logicode.checklang import compile_reference, evaluate
from logicode.facts import PALETTE, FactStore, ObjectFacts, fact_table
from logicode.rules import Rule, ruleset_with_sentences
from logicode_pyshim import shim_evaluate

STORES_PER_KIND = 50


def _store(specs, image_id="img") -> FactStore:
    objects = []
    for i, (name, length, area, centroid, color) in enumerate(specs):
        cx, cy = centroid
        objects.append(
            ObjectFacts(
                object_id=f"{name}_{i}",
                name=name,
                area=area,
                length=length,
                centroid=(cx, cy),
                bbox=(cx - 5.0, cy - 5.0, cx + 5.0, cy + 5.0),
                color=PALETTE[color],
                color_name=color,
                attributes={},
            )
        )
    return FactStore(image_id=image_id, objects=tuple(objects))


def _cables(n, length=100.0, color="yellow"):
    return [("cable", length, 800.0, (40.0 + 7.0 * i, 90.0), color) for i in range(n)]


def _connectors(colors):
    return [
        ("connector", 10.0, 100.0, (20.0 + 30.0 * i, 10.0), color)
        for i, color in enumerate(colors)
    ]


def _clips(n):
    return [("clip", 5.0, 25.0, (15.0 * i, 50.0), "white") for i in range(n)]


def body(text: str) -> str:
    return "def analyze_image(image_path):\n" + textwrap.indent(textwrap.dedent(text), "    ")


# One (rule, reference source, store builder) triple per rule kind. The
# reference functions replicate the reason templates character for
# character; that equality is the point of the parity gate.
KIND_CASES = {
    "count_equals": (
        Rule("r", "Quantity Anomaly", "count_equals", "cable", {"expected": 1}),
        body(
            """
            img = Image(image_path)
            reasons = []
            n = img.count("cable")
            if n != 1:
                reasons.append(f"Quantity Anomaly: expected 1 cable, found {n}")
            return (len(reasons) > 0, "; ".join(reasons))
            """
        ),
        lambda i: _store(_cables(i % 5)),
    ),
    "count_in_range": (
        Rule("r", "Quantity Anomaly", "count_in_range", "connector", {"bounds": (1, 3)}),
        body(
            """
            img = Image(image_path)
            reasons = []
            n = img.count("connector")
            if not (1 <= n <= 3):
                reasons.append(f"Quantity Anomaly: connector count {n} outside [1, 3]")
            return (len(reasons) > 0, "; ".join(reasons))
            """
        ),
        lambda i: _store(_connectors(["red"] * (i % 6))),
    ),
    "presence_required": (
        Rule("r", "Quantity Anomaly", "presence_required", "clip", {}),
        body(
            """
            img = Image(image_path)
            reasons = []
            if img.count("clip") == 0:
                reasons.append("Quantity Anomaly: expected >=1 clip, found 0")
            return (len(reasons) > 0, "; ".join(reasons))
            """
        ),
        lambda i: _store(_clips(i % 3)),
    ),
    "length_in_range": (
        Rule("r", "Size Anomaly", "length_in_range", "cable", {"bounds": (90.0, 110.0)}),
        body(
            """
            img = Image(image_path)
            reasons = []
            if img.count("cable") >= 1:
                first = img.find("cable")[0]
                length = img.size(first)["length"]
                if not (90.0 <= length <= 110.0):
                    reasons.append(
                        f"Size Anomaly: cable length {length:.2f} outside [90.00, 110.00]"
                    )
            return (len(reasons) > 0, "; ".join(reasons))
            """
        ),
        # absent subject every 10th store; lengths sweep below/inside/above
        # including both boundaries (90 at i=16, 110 at i=24)
        lambda i: _store(_cables(0) if i % 10 == 9 else _cables(1, length=50.0 + 2.5 * i)),
    ),
    "area_in_range": (
        Rule("r", "Size Anomaly", "area_in_range", "connector", {"bounds": (50.0, 200.0)}),
        body(
            """
            img = Image(image_path)
            reasons = []
            if img.count("connector") >= 1:
                first = img.find("connector")[0]
                area = img.size(first)["area"]
                if not (50.0 <= area <= 200.0):
                    reasons.append(
                        f"Size Anomaly: connector area {area:.2f} outside [50.00, 200.00]"
                    )
            return (len(reasons) > 0, "; ".join(reasons))
            """
        ),
        lambda i: _store(
            []
            if i % 10 == 9
            else [("connector", 10.0, 10.0 + 10.0 * i, (10.0, 10.0), "red")]
        ),
    ),
    "order_matches": (
        Rule(
            "r",
            "Position Anomaly",
            "order_matches",
            "connector",
            {"axis": "x", "expected": ("red", "green", "blue")},
        ),
        body(
            """
            img = Image(image_path)
            reasons = []
            expected = ["red", "green", "blue"]
            ids = img.order("connector", "x")
            if len(ids) == len(expected):
                observed = [img.color(i)["name"] for i in ids]
                if observed != expected:
                    reasons.append(
                        "Position Anomaly: connector order ["
                        + ", ".join(observed)
                        + "] expected [red, green, blue]"
                    )
            return (len(reasons) > 0, "; ".join(reasons))
            """
        ),
        lambda i: _store(
            _connectors(
                [
                    ["red", "green", "blue"],
                    ["green", "red", "blue"],
                    ["blue", "green", "red"],
                    ["red", "blue", "green"],
                    ["red", "green"],
                    ["red", "green", "blue", "blue"],
                ][i % 6]
            )
        ),
    ),
    "attribute_match": (
        Rule(
            "r",
            "Matching Anomaly",
            "attribute_match",
            ("cable", "connector"),
            {"attribute": "color_name", "mapping": {"purple": 3, "yellow": 2}},
        ),
        body(
            """
            img = Image(image_path)
            reasons = []
            mapping = {"purple": 3, "yellow": 2}
            if img.count("cable") >= 1:
                value = img.color(img.find("cable")[0])["name"]
                n = img.count("connector")
                if mapping.get(value) != n:
                    reasons.append(
                        f"Matching Anomaly: cable color {value} "
                        f"does not match connector count {n}"
                    )
            return (len(reasons) > 0, "; ".join(reasons))
            """
        ),
        lambda i: _store(
            (_cables(1, color=["yellow", "purple", "white"][i % 3]) if i % 10 != 9 else [])
            + _connectors(["red"] * (i % 4))
        ),
    ),
}


@pytest.mark.parametrize("kind", sorted(KIND_CASES))
def test_parity_per_kind(kind):
    rule, source, store_for = KIND_CASES[kind]
    ruleset = ruleset_with_sentences("synthetic_connector_scene", (rule,))
    program = compile_reference(ruleset)

    fired = skipped = 0
    for i in range(STORES_PER_KIND):
        store = store_for(i)
        embedded = evaluate(program, store)
        shimmed = shim_evaluate(source, fact_table(store), timeout_s=15.0)
        assert shimmed["error"] is None, f"{kind}[{i}]: {shimmed['error']}"
        assert shimmed["predicted"] == embedded.predicted, f"{kind}[{i}]"
        assert tuple(shimmed["reasons"]) == embedded.reasons, f"{kind}[{i}]"
        if embedded.predicted == "abnormal":
            fired += 1
        else:
            skipped += 1
    # the sweep must exercise both outcomes, otherwise parity is vacuous
    assert fired > 0 and skipped > 0, f"{kind}: fired={fired} skipped={skipped}"
    print(f"[PASS] shim parity for {kind}: {STORES_PER_KIND} stores, {fired} abnormal")


def test_parity_boundary_values_do_not_fire():
    rule, source, _ = KIND_CASES["length_in_range"]
    ruleset = ruleset_with_sentences("synthetic_connector_scene", (rule,))
    program = compile_reference(ruleset)
    for boundary in (90.0, 110.0):
        store = _store(_cables(1, length=boundary))
        embedded = evaluate(program, store)
        shimmed = shim_evaluate(source, fact_table(store))
        assert embedded.predicted == shimmed["predicted"] == "normal"
