"""Visual parsing backend: derive immutable per-image facts from annotations.

The fact store answers the query surface generated check programs run
against: find / count / size / position / color / order / nearest /
overlaps. Geometry comes from the annotation polygons; color comes from the
``color_rgb`` attribute, or from image pixels when a file is available.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from . import geometry
from .dataset import ImageRecord
from .errors import LogicodeError

# Fixed 10-name palette; nearest RGB by Euclidean distance, ties broken
# lexicographically. Anchors follow the common CSS values.
PALETTE: dict[str, tuple[int, int, int]] = {
    "red": (255, 0, 0),
    "green": (0, 128, 0),
    "blue": (0, 0, 255),
    "yellow": (255, 255, 0),
    "orange": (255, 165, 0),
    "purple": (128, 0, 128),
    "brown": (139, 69, 19),
    "black": (0, 0, 0),
    "white": (255, 255, 255),
    "gray": (128, 128, 128),
}

AXES = ("x", "y")


class FactError(LogicodeError):
    """Base for fact construction and query errors."""


class GeometryError(FactError):
    """Degenerate polygon: fewer than 3 points or zero area."""


class UnknownObject(FactError):
    """An object_id that does not exist in the store."""


class UnknownName(FactError):
    """A query that needs at least one object of a name found none."""


def named_color(rgb: tuple[int, int, int]) -> str:
    r, g, b = rgb
    best = min(
        PALETTE.items(),
        key=lambda kv: ((kv[1][0] - r) ** 2 + (kv[1][1] - g) ** 2 + (kv[1][2] - b) ** 2, kv[0]),
    )
    return best[0]


@dataclass(frozen=True)
class ObjectFacts:
    """Derived facts for one annotated object."""

    object_id: str
    name: str
    area: float
    length: float
    centroid: tuple[float, float]
    bbox: tuple[float, float, float, float]
    color: tuple[int, int, int]
    color_name: str
    missing_color: bool = False
    attributes: Mapping[str, Any] = field(default_factory=dict)


def _mean_rgb_from_image(path: str, polygon, image_size) -> tuple[int, int, int] | None:
    """Mean RGB inside the polygon, or None when the file is unusable."""
    try:
        from PIL import Image, ImageDraw, ImageStat
    except ImportError:  # pragma: no cover - Pillow is a declared dependency
        return None
    p = Path(path)
    if not p.is_file():
        return None
    try:
        with Image.open(p) as img:
            img = img.convert("RGB")
            mask = Image.new("L", img.size, 0)
            ImageDraw.Draw(mask).polygon([(x, y) for x, y in polygon], fill=255)
            stat = ImageStat.Stat(img, mask=mask)
            if not stat.count or stat.count[0] == 0:
                return None
            return tuple(int(round(c)) for c in stat.mean[:3])  # type: ignore[return-value]
    except OSError:
        return None


def _object_facts(record: ImageRecord, ann) -> ObjectFacts:
    if len(ann.polygon) < 3:
        raise GeometryError(
            f"{record.image_id}/{ann.object_id}: polygon has {len(ann.polygon)} points"
        )
    area = geometry.area(ann.polygon)
    if area <= 0.0:
        raise GeometryError(f"{record.image_id}/{ann.object_id}: polygon has zero area")

    missing = False
    rgb_attr = ann.attributes.get("color_rgb")
    if (
        isinstance(rgb_attr, (list, tuple))
        and len(rgb_attr) == 3
        and all(isinstance(c, int) and 0 <= c <= 255 for c in rgb_attr)
    ):
        rgb = (rgb_attr[0], rgb_attr[1], rgb_attr[2])
    else:
        rgb = None
        if record.image_path:
            rgb = _mean_rgb_from_image(record.image_path, ann.polygon, record.image_size)
        if rgb is None:
            rgb = PALETTE["gray"]
            missing = True

    return ObjectFacts(
        object_id=ann.object_id,
        name=ann.name,
        area=area,
        length=geometry.diameter(ann.polygon),
        centroid=geometry.centroid(ann.polygon),
        bbox=geometry.bounding_box(ann.polygon),
        color=rgb,
        color_name=named_color(rgb),
        missing_color=missing,
        attributes=dict(ann.attributes),
    )


@dataclass(frozen=True)
class FactStore:
    """Immutable per-image facts, indexed by object name and id."""

    image_id: str
    objects: tuple[ObjectFacts, ...]

    def _by_id(self, object_id: str) -> ObjectFacts:
        for obj in self.objects:
            if obj.object_id == object_id:
                return obj
        raise UnknownObject(f"{self.image_id}: no object {object_id!r}")

    def find(self, name: str) -> tuple[ObjectFacts, ...]:
        """Objects of a name, in annotation order. Absent name -> empty."""
        return tuple(o for o in self.objects if o.name == name)

    def count(self, name: str) -> int:
        return len(self.find(name))

    def size(self, object_id: str) -> tuple[float, float]:
        """(area, length) of one object."""
        obj = self._by_id(object_id)
        return (obj.area, obj.length)

    def position(self, object_id: str) -> tuple[float, float]:
        return self._by_id(object_id).centroid

    def color(self, object_id: str) -> tuple[tuple[int, int, int], str]:
        obj = self._by_id(object_id)
        return (obj.color, obj.color_name)

    def order(self, name: str, axis: str) -> tuple[ObjectFacts, ...]:
        """Objects of a name sorted by centroid on an axis, ties by id."""
        if axis not in AXES:
            raise FactError(f"axis must be one of {AXES}, got {axis!r}")
        idx = AXES.index(axis)
        return tuple(sorted(self.find(name), key=lambda o: (o.centroid[idx], o.object_id)))

    def nearest(self, object_id: str, name: str) -> ObjectFacts:
        """Closest other object of a name by centroid distance, ties by id."""
        src = self._by_id(object_id)
        candidates = [o for o in self.find(name) if o.object_id != object_id]
        if not candidates:
            raise UnknownName(f"{self.image_id}: no {name!r} candidates near {object_id!r}")
        sx, sy = src.centroid
        return min(
            candidates,
            key=lambda o: ((o.centroid[0] - sx) ** 2 + (o.centroid[1] - sy) ** 2, o.object_id),
        )

    def overlaps(self, id_a: str, id_b: str) -> bool:
        """Bounding-box intersection with positive area (touching is not)."""
        a = self._by_id(id_a).bbox
        b = self._by_id(id_b).bbox
        w = min(a[2], b[2]) - max(a[0], b[0])
        h = min(a[3], b[3]) - max(a[1], b[1])
        return w > 0 and h > 0


def build_facts(record: ImageRecord) -> FactStore:
    """Compute complete ObjectFacts for every annotated object."""
    return FactStore(
        image_id=record.image_id,
        objects=tuple(_object_facts(record, ann) for ann in record.objects),
    )


def fact_table(store: FactStore) -> dict[str, Any]:
    """Canonical JSON-safe dump of a store (stable key order, annotation order)."""
    return {
        "image_id": store.image_id,
        "objects": [
            {
                "object_id": o.object_id,
                "name": o.name,
                "area": o.area,
                "length": o.length,
                "centroid": [o.centroid[0], o.centroid[1]],
                "bbox": list(o.bbox),
                "color": list(o.color),
                "color_name": o.color_name,
                "missing_color": o.missing_color,
                "attributes": dict(sorted(o.attributes.items())),
            }
            for o in store.objects
        ],
    }


def dump_fact_table(store: FactStore) -> str:
    return json.dumps(fact_table(store), sort_keys=True, indent=2)
