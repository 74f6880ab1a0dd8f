"""Rectangle algebra used by layout post-processing and evaluation."""

from __future__ import annotations

import math

from .errors import (
    DegenerateRectError,
    NotPartiallyOverlappingError,
    UndefinedIoUError,
    UnresolvableOverlapError,
)
from .model import Rect


def area(r: Rect) -> float:
    return (r.x1 - r.x0) * (r.y1 - r.y0)


def intersect(a: Rect, b: Rect) -> Rect | None:
    """Overlap rectangle of ``a`` and ``b``; None when interiors are disjoint.

    Rectangles that only share an edge are disjoint.
    """
    x0, y0 = max(a.x0, b.x0), max(a.y0, b.y0)
    x1, y1 = min(a.x1, b.x1), min(a.y1, b.y1)
    if x1 <= x0 or y1 <= y0:
        return None
    return Rect(x0, y0, x1, y1)


def overlap_area(a: Rect, b: Rect) -> float:
    w = min(a.x1, b.x1) - max(a.x0, b.x0)
    h = min(a.y1, b.y1) - max(a.y0, b.y0)
    if w <= 0 or h <= 0:
        return 0.0
    return w * h


def iou(a: Rect, b: Rect) -> float:
    area_a, area_b = area(a), area(b)
    if area_a == 0 and area_b == 0:
        raise UndefinedIoUError(f"both rects have zero area: {a}, {b}")
    inter = overlap_area(a, b)
    return inter / (area_a + area_b - inter)


def containment_ratio(inner: Rect, outer: Rect) -> float:
    """Fraction of ``inner``'s area lying inside ``outer``."""
    a = area(inner)
    if a == 0:
        raise DegenerateRectError(f"inner rect has zero area: {inner}")
    return overlap_area(inner, outer) / a


def contains(outer: Rect, inner: Rect) -> bool:
    return outer.x0 <= inner.x0 and outer.y0 <= inner.y0 and inner.x1 <= outer.x1 and inner.y1 <= outer.y1


def rect_distance(a: Rect, b: Rect) -> float:
    """Euclidean gap between the closest points of two rects (0 if they meet)."""
    dx = max(b.x0 - a.x1, a.x0 - b.x1, 0.0)
    dy = max(b.y0 - a.y1, a.y0 - b.y1, 0.0)
    return math.hypot(dx, dy)


def union_area(rects) -> float:
    """Exact area of the union of rects via coordinate compression."""
    rects = [r for r in rects if area(r) > 0]
    if not rects:
        return 0.0
    xs = sorted({r.x0 for r in rects} | {r.x1 for r in rects})
    total = 0.0
    for left, right in zip(xs, xs[1:]):
        spans = sorted((r.y0, r.y1) for r in rects if r.x0 <= left and r.x1 >= right)
        covered, cur_start, cur_end = 0.0, None, None
        for y0, y1 in spans:
            if cur_end is None or y0 > cur_end:
                if cur_end is not None:
                    covered += cur_end - cur_start
                cur_start, cur_end = y0, y1
            else:
                cur_end = max(cur_end, y1)
        if cur_end is not None:
            covered += cur_end - cur_start
        total += covered * (right - left)
    return total


def shrink_to_avoid(
    a: Rect,
    b: Rect,
    *,
    containment_threshold: float = 0.8,
    min_keep_ratio: float = 0.5,
) -> tuple[Rect, Rect]:
    """Cut two partially overlapping rects apart along one axis.

    The cut runs through the middle of the overlap band on the axis with
    the shallower intrusion; the rect whose center lies lower on that axis
    keeps the low side (``a`` on ties). Raises
    ``NotPartiallyOverlappingError`` for disjoint inputs and
    ``UnresolvableOverlapError`` when one rect is (nearly) nested in the
    other or when either would keep ``min_keep_ratio`` of its area or less.
    """
    inter = intersect(a, b)
    if inter is None:
        raise NotPartiallyOverlappingError(f"rects do not overlap: {a}, {b}")
    for inner, outer in ((a, b), (b, a)):
        if area(inner) == 0 or containment_ratio(inner, outer) >= containment_threshold:
            raise UnresolvableOverlapError(f"{inner} is nested in {outer}")

    if inter.height <= inter.width:
        mid = (inter.y0 + inter.y1) / 2
        if a.center[1] <= b.center[1]:
            new_a, new_b = Rect(a.x0, a.y0, a.x1, mid), Rect(b.x0, mid, b.x1, b.y1)
        else:
            new_a, new_b = Rect(a.x0, mid, a.x1, a.y1), Rect(b.x0, b.y0, b.x1, mid)
    else:
        mid = (inter.x0 + inter.x1) / 2
        if a.center[0] <= b.center[0]:
            new_a, new_b = Rect(a.x0, a.y0, mid, a.y1), Rect(mid, b.y0, b.x1, b.y1)
        else:
            new_a, new_b = Rect(mid, a.y0, a.x1, a.y1), Rect(b.x0, b.y0, mid, b.y1)

    for old, new in ((a, new_a), (b, new_b)):
        if area(new) <= min_keep_ratio * area(old):
            raise UnresolvableOverlapError(f"cutting {old} to {new} loses too much area")
    return new_a, new_b


def largest_free_part(r: Rect, obstacle: Rect) -> Rect | None:
    """Largest axis-aligned slab of ``r`` whose interior avoids ``obstacle``.

    Candidates are the parts of ``r`` above, below, left of and right of the
    obstacle; ties resolve in that order. None when every slab is empty.
    """
    candidates = []
    if obstacle.y0 > r.y0:
        candidates.append(Rect(r.x0, r.y0, r.x1, min(r.y1, obstacle.y0)))
    if obstacle.y1 < r.y1:
        candidates.append(Rect(r.x0, max(r.y0, obstacle.y1), r.x1, r.y1))
    if obstacle.x0 > r.x0:
        candidates.append(Rect(r.x0, r.y0, min(r.x1, obstacle.x0), r.y1))
    if obstacle.x1 < r.x1:
        candidates.append(Rect(max(r.x0, obstacle.x1), r.y0, r.x1, r.y1))
    best = None
    for c in candidates:
        if area(c) > 0 and (best is None or area(c) > area(best)):
            best = c
    return best
