"""Annotation data model: image records, manifests, loading and validation.

One JSON document per image; a manifest index file lists the relative paths
of all record files under a dataset root. Records are immutable once built.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from . import geometry
from .errors import LogicodeError

CATEGORIES = (
    "juice_bottle",
    "breakfast_box",
    "pushpins",
    "screw_bag",
    "splicing_connectors",
)
SPLITS = ("train", "test")
LABELS = ("normal", "abnormal")
ANOMALY_TYPES = (
    "Quantity Anomaly",
    "Size Anomaly",
    "Position Anomaly",
    "Matching Anomaly",
)

MANIFEST_INDEX = "manifest.json"

_REASON_RE = re.compile(
    r"^(Quantity Anomaly|Size Anomaly|Position Anomaly|Matching Anomaly): (.+)$"
)


class SchemaError(LogicodeError):
    """A record file is structurally wrong (missing field, bad type)."""

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or [message]


class InvariantError(LogicodeError):
    """A record parses but breaks a documented invariant."""

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or [message]


class ConfigError(LogicodeError):
    """Bad synthesis or pipeline configuration."""


def parse_reason(reason: str) -> tuple[str, str]:
    """Split a reason string into (anomaly type, free text).

    Raises InvariantError when the string does not match the
    ``<AnomalyType>: <text>`` grammar.
    """
    m = _REASON_RE.match(reason)
    if not m:
        raise InvariantError(f"malformed reason string: {reason!r}")
    return m.group(1), m.group(2)


def format_reason(anomaly_type: str, text: str) -> str:
    if anomaly_type not in ANOMALY_TYPES:
        raise InvariantError(f"unknown anomaly type: {anomaly_type!r}")
    return f"{anomaly_type}: {text}"


def valid_category(category: str) -> bool:
    return category in CATEGORIES or category.startswith("synthetic_")


@dataclass(frozen=True)
class ObjectAnnotation:
    """One segmented object: a simple polygon plus free-form attributes."""

    object_id: str
    name: str
    polygon: tuple[tuple[float, float], ...]
    attributes: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ImageRecord:
    """One annotated image with its ground-truth label and reasons."""

    image_id: str
    category: str
    split: str
    label: str
    reasons: tuple[str, ...]
    image_size: tuple[int, int]
    objects: tuple[ObjectAnnotation, ...]
    image_path: str | None = None


@dataclass(frozen=True)
class DatasetManifest:
    """All records of one dataset root, with per split/category counts."""

    records: tuple[ImageRecord, ...]

    def counts(self) -> dict[tuple[str, str], int]:
        out: dict[tuple[str, str], int] = {}
        for rec in self.records:
            key = (rec.split, rec.category)
            out[key] = out.get(key, 0) + 1
        return out

    def split(self, name: str) -> tuple[ImageRecord, ...]:
        return tuple(r for r in self.records if r.split == name)

    def by_id(self, image_id: str) -> ImageRecord:
        for rec in self.records:
            if rec.image_id == image_id:
                return rec
        raise KeyError(image_id)


def validate_record(record: ImageRecord) -> list[str]:
    """Return every invariant violation for one record (empty = clean)."""
    v: list[str] = []
    rid = record.image_id
    if not valid_category(record.category):
        v.append(f"{rid}: unknown category {record.category!r}")
    if record.split not in SPLITS:
        v.append(f"{rid}: unknown split {record.split!r}")
    if record.label not in LABELS:
        v.append(f"{rid}: unknown label {record.label!r}")
    if (record.label == "normal") != (len(record.reasons) == 0):
        v.append(
            f"{rid}: label {record.label!r} inconsistent with "
            f"{len(record.reasons)} reason(s)"
        )
    for reason in record.reasons:
        try:
            parse_reason(reason)
        except InvariantError as exc:
            v.append(f"{rid}: {exc}")
    w, h = record.image_size
    if w <= 0 or h <= 0:
        v.append(f"{rid}: non-positive image size {record.image_size}")
    seen_ids: set[str] = set()
    for obj in record.objects:
        oid = f"{rid}/{obj.object_id}"
        if obj.object_id in seen_ids:
            v.append(f"{oid}: duplicate object_id")
        seen_ids.add(obj.object_id)
        if len(obj.polygon) < 3:
            v.append(f"{oid}: polygon has {len(obj.polygon)} points")
            continue
        if geometry.area(obj.polygon) <= 0.0:
            v.append(f"{oid}: polygon has zero area")
        if not geometry.is_simple(obj.polygon):
            v.append(f"{oid}: polygon self-intersects")
        for x, y in obj.polygon:
            if not (0 <= x <= w and 0 <= y <= h):
                v.append(f"{oid}: vertex ({x}, {y}) outside [0,{w}]x[0,{h}]")
                break
    return v


def _require(doc: Mapping[str, Any], key: str, kind: type, where: str) -> Any:
    if key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"{where}: field {key!r} is not a number")
        return float(value)
    if not isinstance(value, kind) or (kind is not bool and isinstance(value, bool)):
        raise SchemaError(f"{where}: field {key!r} has type {type(value).__name__}")
    return value


def record_from_dict(doc: Mapping[str, Any], where: str = "<memory>") -> ImageRecord:
    """Build an ImageRecord from parsed JSON, checking structure only."""
    if not isinstance(doc, Mapping):
        raise SchemaError(f"{where}: record is not an object")
    image_id = _require(doc, "image_id", str, where)
    category = _require(doc, "category", str, where)
    split = _require(doc, "split", str, where)
    label = _require(doc, "label", str, where)
    reasons_raw = _require(doc, "reasons", list, where)
    size_raw = _require(doc, "image_size", list, where)
    objects_raw = _require(doc, "objects", list, where)
    if len(size_raw) != 2:
        raise SchemaError(f"{where}: image_size must be [width, height]")
    for part in size_raw:
        if not isinstance(part, int) or isinstance(part, bool):
            raise SchemaError(f"{where}: image_size entries must be integers")
    reasons = []
    for i, reason in enumerate(reasons_raw):
        if not isinstance(reason, str):
            raise SchemaError(f"{where}: reasons[{i}] is not a string")
        reasons.append(reason)
    objects = []
    for i, obj in enumerate(objects_raw):
        owhere = f"{where}: objects[{i}]"
        if not isinstance(obj, Mapping):
            raise SchemaError(f"{owhere}: not an object")
        object_id = _require(obj, "object_id", str, owhere)
        name = _require(obj, "name", str, owhere)
        poly_raw = _require(obj, "polygon", list, owhere)
        polygon = []
        for j, pt in enumerate(poly_raw):
            if (
                not isinstance(pt, list)
                or len(pt) != 2
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in pt)
            ):
                raise SchemaError(f"{owhere}: polygon[{j}] must be [x, y]")
            polygon.append((float(pt[0]), float(pt[1])))
        attributes = obj.get("attributes", {})
        if not isinstance(attributes, Mapping):
            raise SchemaError(f"{owhere}: attributes must be an object")
        objects.append(
            ObjectAnnotation(
                object_id=object_id,
                name=name,
                polygon=tuple(polygon),
                attributes=dict(attributes),
            )
        )
    image_path = doc.get("image_path")
    if image_path is not None and not isinstance(image_path, str):
        raise SchemaError(f"{where}: image_path must be a string")
    return ImageRecord(
        image_id=image_id,
        category=category,
        split=split,
        label=label,
        reasons=tuple(reasons),
        image_size=(size_raw[0], size_raw[1]),
        objects=tuple(objects),
        image_path=image_path,
    )


def record_to_dict(record: ImageRecord) -> dict[str, Any]:
    """Canonical JSON form: reasons sorted, polygons as [x, y] lists."""
    doc: dict[str, Any] = {
        "image_id": record.image_id,
        "category": record.category,
        "split": record.split,
        "label": record.label,
        "reasons": sorted(record.reasons),
        "image_size": [record.image_size[0], record.image_size[1]],
        "objects": [
            {
                "object_id": obj.object_id,
                "name": obj.name,
                "polygon": [[x, y] for x, y in obj.polygon],
                "attributes": dict(sorted(obj.attributes.items())),
            }
            for obj in record.objects
        ],
    }
    if record.image_path is not None:
        doc["image_path"] = record.image_path
    return doc


def load_record(path: Path) -> ImageRecord:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return record_from_dict(doc, where=str(path))


def load_manifest(root_path: str | Path) -> DatasetManifest:
    """Load and validate every record listed in the root's manifest index.

    All violations are collected before raising: schema problems win and
    raise SchemaError, otherwise invariant problems raise InvariantError.
    """
    root = Path(root_path)
    index = root / MANIFEST_INDEX
    if not index.is_file():
        raise SchemaError(f"{index}: manifest index not found")
    try:
        index_doc = json.loads(index.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{index}: invalid JSON ({exc})") from exc
    files = index_doc.get("files")
    if not isinstance(files, list) or not all(isinstance(f, str) for f in files):
        raise SchemaError(f"{index}: 'files' must be a list of relative paths")

    schema_violations: list[str] = []
    invariant_violations: list[str] = []
    records: list[ImageRecord] = []
    seen: set[str] = set()
    for rel in files:
        try:
            record = load_record(root / rel)
        except SchemaError as exc:
            schema_violations.extend(exc.violations)
            continue
        if record.image_id in seen:
            invariant_violations.append(f"{rel}: duplicate image_id {record.image_id!r}")
        seen.add(record.image_id)
        invariant_violations.extend(validate_record(record))
        records.append(record)

    if schema_violations:
        raise SchemaError(
            f"{len(schema_violations)} schema violation(s); first: {schema_violations[0]}",
            schema_violations,
        )
    if invariant_violations:
        raise InvariantError(
            f"{len(invariant_violations)} invariant violation(s); first: "
            f"{invariant_violations[0]}",
            invariant_violations,
        )
    records.sort(key=lambda r: r.image_id)
    return DatasetManifest(records=tuple(records))


def write_manifest(manifest: DatasetManifest, root_path: str | Path) -> None:
    """Write one JSON file per record plus the manifest index (canonical)."""
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    files = []
    for record in sorted(manifest.records, key=lambda r: r.image_id):
        rel = f"{record.image_id}.json"
        payload = json.dumps(record_to_dict(record), sort_keys=True, indent=2)
        (root / rel).write_text(payload + "\n", encoding="utf-8")
        files.append(rel)
    index = json.dumps({"files": files}, sort_keys=True, indent=2)
    (root / MANIFEST_INDEX).write_text(index + "\n", encoding="utf-8")


def dataset_id(manifest: DatasetManifest) -> str:
    """Stable short identifier derived from record ids and labels."""
    import hashlib

    h = hashlib.sha256()
    for rec in sorted(manifest.records, key=lambda r: r.image_id):
        h.update(f"{rec.image_id}:{rec.label}:{','.join(sorted(rec.reasons))}\n".encode())
    return h.hexdigest()[:16]


def iter_split(manifest: DatasetManifest, split: str) -> Iterable[ImageRecord]:
    return (r for r in manifest.records if r.split == split)
