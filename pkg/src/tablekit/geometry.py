"""Exact axis-aligned rectangle arithmetic in page pixel coordinates.

Coordinates follow the raster convention: origin at the top-left corner of
the page, y grows downward.  Areas are the closed-interval product
``(x2 - x1) * (y2 - y1)``, so integer-coordinate boxes behave exactly like
pixel regions.  Everything here is pure and deterministic; union coverage is
computed by a coordinate-compression sweep rather than by rasterizing, which
keeps results resolution-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle; degenerate (zero-area) boxes are allowed."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        for v in (self.x1, self.y1, self.x2, self.y2):
            if not math.isfinite(v):
                raise ValueError(f"non-finite box coordinate: {v!r}")
        if self.x2 < self.x1 or self.y2 < self.y1:
            raise ValueError(f"inverted box: ({self.x1}, {self.y1}, {self.x2}, {self.y2})")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def midx(self) -> float:
        return (self.x1 + self.x2) / 2.0

    @property
    def midy(self) -> float:
        return (self.y1 + self.y2) / 2.0

    def translate(self, dx: float, dy: float) -> "Box":
        return Box(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)

    def intersection(self, other: "Box") -> "Box | None":
        """Overlapping region, possibly zero-area; None when fully disjoint."""
        x1 = max(self.x1, other.x1)
        y1 = max(self.y1, other.y1)
        x2 = min(self.x2, other.x2)
        y2 = min(self.y2, other.y2)
        if x2 < x1 or y2 < y1:
            return None
        return Box(x1, y1, x2, y2)

    def intersects(self, other: "Box") -> bool:
        """True only for positive-area overlap; touching edges do not count."""
        return (
            min(self.x2, other.x2) > max(self.x1, other.x1)
            and min(self.y2, other.y2) > max(self.y1, other.y1)
        )

    def contains_point(self, x: float, y: float) -> bool:
        return self.x1 <= x <= self.x2 and self.y1 <= y <= self.y2

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)


#: An ordered collection of boxes; duplicates and overlaps are allowed.
BoxSet = Sequence[Box]


def area(b: Box) -> float:
    return b.width * b.height


def bounding_box(boxes: Sequence[Box]) -> Box:
    """Smallest box containing every input box."""
    if not boxes:
        raise ValueError("bounding_box() of no boxes")
    return Box(
        min(b.x1 for b in boxes),
        min(b.y1 for b in boxes),
        max(b.x2 for b in boxes),
        max(b.y2 for b in boxes),
    )


def covered_area(boxes: BoxSet, query: Box) -> float:
    """Exact area of ``(union of boxes) ∩ query``.

    Overlapping boxes are counted once.  Implemented as a vertical-strip
    sweep over the compressed x-coordinates of the clipped boxes; exact for
    integer-valued inputs.
    """
    clipped = []
    for b in boxes:
        c = b.intersection(query)
        if c is not None and c.width > 0 and c.height > 0:
            clipped.append(c)
    if not clipped:
        return 0.0
    xs = sorted({c.x1 for c in clipped} | {c.x2 for c in clipped})
    total = 0.0
    for x_lo, x_hi in zip(xs, xs[1:]):
        strip_w = x_hi - x_lo
        if strip_w <= 0:
            continue
        spans = sorted((c.y1, c.y2) for c in clipped if c.x1 <= x_lo and c.x2 >= x_hi)
        covered = 0.0
        cur_lo: float | None = None
        cur_hi = 0.0
        for lo, hi in spans:
            if cur_lo is None or lo > cur_hi:
                if cur_lo is not None:
                    covered += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            elif hi > cur_hi:
                cur_hi = hi
        if cur_lo is not None:
            covered += cur_hi - cur_lo
        total += strip_w * covered
    return total


def inflate(b: Box, dx: float, dy: float) -> Box:
    """Move all four edges outward by (dx, dy); negative amounts shrink.

    An over-shrunk axis collapses to a zero-length interval at its midline
    instead of inverting.
    """
    x1, x2 = b.x1 - dx, b.x2 + dx
    y1, y2 = b.y1 - dy, b.y2 + dy
    if x1 > x2:
        x1 = x2 = (x1 + x2) / 2.0
    if y1 > y2:
        y1 = y2 = (y1 + y2) / 2.0
    return Box(x1, y1, x2, y2)


def shift_bottom(b: Box, dy: float) -> Box:
    """Move only the bottom edge by dy (negative raises it), clamped at the top."""
    return Box(b.x1, b.y1, b.x2, max(b.y1, b.y2 + dy))


def iou(a: Box, b: Box) -> float:
    """Intersection over union; 0 when the union has zero area."""
    inter = a.intersection(b)
    inter_area = area(inter) if inter is not None else 0.0
    union = area(a) + area(b) - inter_area
    return inter_area / union if union > 0 else 0.0


def overlap_fraction(a: Box, b: Box) -> float:
    """Intersection area over the smaller box's area; 0 when that is zero."""
    inter = a.intersection(b)
    inter_area = area(inter) if inter is not None else 0.0
    smaller = min(area(a), area(b))
    return inter_area / smaller if smaller > 0 else 0.0
