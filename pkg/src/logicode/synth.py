"""Synthetic annotation-only datasets with injected logical anomalies.

The connector scene places three colored connectors above one cable. Each
abnormal test record carries reasons derived by evaluating the scene's own
oracle rule set, so generated ground truth and rule semantics can never
drift apart; a construction-time assertion enforces it.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Mapping

from .dataset import DatasetManifest, ImageRecord, ObjectAnnotation
from .dataset import ConfigError
from .errors import LogicodeError
from .facts import PALETTE, build_facts
from .reports import PREDICTED_ABNORMAL, PREDICTED_NORMAL
from .rules import Rule, RuleSet, evaluate_ruleset, ruleset_with_sentences

INJECTION_KINDS = ("quantity", "size", "position", "matching")

_KIND_TO_ANOMALY = {
    "quantity": "Quantity Anomaly",
    "size": "Size Anomaly",
    "position": "Position Anomaly",
    "matching": "Matching Anomaly",
}


class GeneratorInvariantError(LogicodeError):
    """A generated record disagrees with its own oracle rule set."""


@dataclass(frozen=True)
class SynthConfig:
    template: str = "connector-scene"
    n: int = 100
    rates: Mapping[str, float] = field(default_factory=dict)
    train_n: int = 0


@dataclass(frozen=True)
class SceneTemplate:
    name: str
    category: str
    object_names: tuple[str, ...]
    attribute_names: tuple[str, ...]
    ruleset: RuleSet


_IMAGE_W, _IMAGE_H = 800, 600
_SLOT_X = (150.0, 400.0, 650.0)
_CONNECTOR_Y = 150.0
_CONNECTOR_HALF = 30.0
_CONNECTOR_COLORS = ("red", "green", "blue")
_CABLE_WIDTH = 8.0
_CABLE_COLOR = "yellow"
# cable color -> required connector count; "white" stays unmapped on purpose
_MATCH_MAPPING = {"orange": 2, "purple": 4, "yellow": 3}
_LENGTH_BOUNDS = (90.0, 110.0)


def _connector_rules() -> RuleSet:
    rules = (
        Rule("r_cable_count", "Quantity Anomaly", "count_equals", "cable", {"expected": 1}),
        Rule(
            "r_connector_count",
            "Quantity Anomaly",
            "count_equals",
            "connector",
            {"expected": 3},
        ),
        Rule(
            "r_cable_length",
            "Size Anomaly",
            "length_in_range",
            "cable",
            {"bounds": _LENGTH_BOUNDS},
        ),
        Rule(
            "r_connector_order",
            "Position Anomaly",
            "order_matches",
            "connector",
            {"axis": "x", "expected": _CONNECTOR_COLORS},
        ),
        Rule(
            "r_color_match",
            "Matching Anomaly",
            "attribute_match",
            ("cable", "connector"),
            {"attribute": "color_name", "mapping": dict(_MATCH_MAPPING)},
        ),
    )
    return ruleset_with_sentences("synthetic_connector_scene", rules)


TEMPLATES: dict[str, SceneTemplate] = {
    "connector-scene": SceneTemplate(
        name="connector-scene",
        category="synthetic_connector_scene",
        object_names=("cable", "connector"),
        attribute_names=("color_rgb", "slot_index", "color_name"),
        ruleset=_connector_rules(),
    )
}


def template_for_category(category: str) -> SceneTemplate | None:
    for template in TEMPLATES.values():
        if template.category == category:
            return template
    return None


def _rect(cx: float, cy: float, half: float) -> tuple[tuple[float, float], ...]:
    return (
        (cx - half, cy - half),
        (cx + half, cy - half),
        (cx + half, cy + half),
        (cx - half, cy + half),
    )


def _cable_polygon(x0: float, y0: float, diag: float) -> tuple[tuple[float, float], ...]:
    # Thin horizontal bar whose polygon diameter equals diag exactly.
    length = math.sqrt(diag * diag - _CABLE_WIDTH * _CABLE_WIDTH)
    return (
        (x0, y0),
        (x0 + length, y0),
        (x0 + length, y0 + _CABLE_WIDTH),
        (x0, y0 + _CABLE_WIDTH),
    )


def _build_connector_record(
    image_id: str, split: str, rng: random.Random, injected: set[str]
) -> tuple[ImageRecord, set[str]]:
    """Build one record; returns it with the injections actually applied."""
    applied = set(injected)

    connector_colors = list(_CONNECTOR_COLORS)
    if "position" in applied:
        i, j = rng.sample(range(len(connector_colors)), 2)
        connector_colors[i], connector_colors[j] = connector_colors[j], connector_colors[i]

    objects: list[ObjectAnnotation] = []
    for slot, color in enumerate(connector_colors):
        cx = _SLOT_X[slot] + rng.uniform(-15.0, 15.0)
        cy = _CONNECTOR_Y + rng.uniform(-10.0, 10.0)
        objects.append(
            ObjectAnnotation(
                object_id=f"connector_{slot}",
                name="connector",
                polygon=_rect(cx, cy, _CONNECTOR_HALF),
                attributes={"color_rgb": list(PALETTE[color]), "slot_index": slot},
            )
        )

    cable_count = 1
    if "quantity" in applied:
        cable_count = rng.choice((0, 2))
    if cable_count == 0:
        # Without a cable there is nothing to resize or mismatch.
        applied.discard("size")
        applied.discard("matching")

    if "size" in applied:
        if rng.random() < 0.5:
            diag = rng.uniform(116.0, 130.0)
        else:
            diag = rng.uniform(68.0, 82.0)
    else:
        diag = rng.uniform(94.0, 106.0)

    cable_color = _CABLE_COLOR
    if cable_count > 0 and "matching" in applied:
        cable_color = rng.choice(("purple", "orange", "white"))

    x0 = 100.0 + rng.uniform(-20.0, 20.0)
    y0 = 450.0 + rng.uniform(-30.0, 30.0)
    for k in range(cable_count):
        objects.append(
            ObjectAnnotation(
                object_id=f"cable_{k}",
                name="cable",
                polygon=_cable_polygon(x0, y0 + 60.0 * k, diag),
                attributes={"color_rgb": list(PALETTE[cable_color])},
            )
        )

    record = ImageRecord(
        image_id=image_id,
        category="synthetic_connector_scene",
        split=split,
        label=PREDICTED_ABNORMAL if applied else PREDICTED_NORMAL,
        reasons=(),  # filled in below from the oracle evaluation
        image_size=(_IMAGE_W, _IMAGE_H),
        objects=tuple(objects),
    )
    return record, applied


def _with_oracle_reasons(
    record: ImageRecord, applied: set[str], ruleset: RuleSet
) -> ImageRecord:
    report = evaluate_ruleset(ruleset, build_facts(record))
    fired_types = {reason.split(":", 1)[0] for reason in report.reasons}
    wanted_types = {_KIND_TO_ANOMALY[k] for k in applied}
    if fired_types != wanted_types:
        raise GeneratorInvariantError(
            f"{record.image_id}: injected {sorted(wanted_types)} but oracle "
            f"fired {sorted(fired_types)}"
        )
    if report.predicted != record.label:
        raise GeneratorInvariantError(
            f"{record.image_id}: label {record.label} but oracle says {report.predicted}"
        )
    return ImageRecord(
        image_id=record.image_id,
        category=record.category,
        split=record.split,
        label=record.label,
        reasons=tuple(sorted(report.reasons)),
        image_size=record.image_size,
        objects=record.objects,
    )


def generate_synthetic(config: SynthConfig, seed: int) -> DatasetManifest:
    """Deterministic under (config, seed); see module docstring."""
    if config.template not in TEMPLATES:
        raise ConfigError(f"unknown scene template {config.template!r}")
    template = TEMPLATES[config.template]
    if config.n < 0 or config.train_n < 0:
        raise ConfigError("record counts must be >= 0")
    rates = dict(config.rates)
    for kind, rate in rates.items():
        if kind not in INJECTION_KINDS:
            raise ConfigError(f"unknown injection kind {kind!r}")
        if not isinstance(rate, (int, float)) or not 0.0 <= float(rate) <= 1.0:
            raise ConfigError(f"injection rate for {kind} must be within [0, 1]")

    records: list[ImageRecord] = []
    for i in range(config.train_n):
        rng = random.Random(f"{seed}:train:{i}")
        record, applied = _build_connector_record(
            f"conn_train_{i:05d}", "train", rng, set()
        )
        records.append(_with_oracle_reasons(record, applied, template.ruleset))
    for i in range(config.n):
        rng = random.Random(f"{seed}:test:{i}")
        injected = {
            kind for kind in INJECTION_KINDS if rng.random() < rates.get(kind, 0.0)
        }
        record, applied = _build_connector_record(f"conn_test_{i:05d}", "test", rng, injected)
        records.append(_with_oracle_reasons(record, applied, template.ruleset))
    return DatasetManifest(records=tuple(records))
