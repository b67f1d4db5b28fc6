"""Plain polygon geometry over vertex lists.

All polygons are sequences of (x, y) vertices in order, implicitly closed.
Pure functions, no external dependencies; exactness matters more than speed
because annotation polygons are small (tens of vertices).
"""

from __future__ import annotations

import math
from typing import Sequence

Point = tuple[float, float]


def signed_area(polygon: Sequence[Point]) -> float:
    """Shoelace signed area; positive for counter-clockwise winding."""
    total = 0.0
    n = len(polygon)
    for i in range(n):
        x0, y0 = polygon[i]
        x1, y1 = polygon[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return total / 2.0


def area(polygon: Sequence[Point]) -> float:
    return abs(signed_area(polygon))


def centroid(polygon: Sequence[Point]) -> Point:
    """Area-weighted polygon centroid (shoelace form).

    Falls back to the vertex mean for near-degenerate polygons where the
    signed area vanishes.
    """
    a = signed_area(polygon)
    if abs(a) < 1e-12:
        xs = sum(p[0] for p in polygon) / len(polygon)
        ys = sum(p[1] for p in polygon) / len(polygon)
        return (xs, ys)
    cx = 0.0
    cy = 0.0
    n = len(polygon)
    for i in range(n):
        x0, y0 = polygon[i]
        x1, y1 = polygon[(i + 1) % n]
        cross = x0 * y1 - x1 * y0
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    return (cx / (6.0 * a), cy / (6.0 * a))


def diameter(polygon: Sequence[Point]) -> float:
    """Max pairwise vertex distance. O(n^2), fine for annotation polygons."""
    best = 0.0
    n = len(polygon)
    for i in range(n):
        xi, yi = polygon[i]
        for j in range(i + 1, n):
            xj, yj = polygon[j]
            d = math.hypot(xi - xj, yi - yj)
            if d > best:
                best = d
    return best


def bounding_box(polygon: Sequence[Point]) -> tuple[float, float, float, float]:
    xs = [p[0] for p in polygon]
    ys = [p[1] for p in polygon]
    return (min(xs), min(ys), max(xs), max(ys))


def _orient(p: Point, q: Point, r: Point) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p: Point, q: Point, r: Point) -> bool:
    # r collinear with p-q: is it within the segment's box?
    return (
        min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
        and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])
    )


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    """True when segment ab intersects segment cd (endpoints included)."""
    o1 = _orient(a, b, c)
    o2 = _orient(a, b, d)
    o3 = _orient(c, d, a)
    o4 = _orient(c, d, b)
    if ((o1 > 0) != (o2 > 0) and o1 != 0 and o2 != 0) and (
        (o3 > 0) != (o4 > 0) and o3 != 0 and o4 != 0
    ):
        return True
    if o1 == 0 and _on_segment(a, b, c):
        return True
    if o2 == 0 and _on_segment(a, b, d):
        return True
    if o3 == 0 and _on_segment(c, d, a):
        return True
    if o4 == 0 and _on_segment(c, d, b):
        return True
    return False


def is_simple(polygon: Sequence[Point]) -> bool:
    """True when no two non-adjacent edges intersect.

    Adjacent edges share exactly one endpoint by construction, so they are
    excluded from the pairwise test.
    """
    n = len(polygon)
    if n < 3:
        return False
    edges = [(polygon[i], polygon[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(*edges[i], *edges[j]):
                return False
    return True
