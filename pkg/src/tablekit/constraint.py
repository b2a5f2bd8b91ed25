"""Cell-containment scoring and suppression for table candidates.

A plausible table keeps detected cells inside its frame: the whole box, a
thin band just inside the border and the strip along the bottom edge should
all carry cell mass, while the ring just outside should carry none.  These
checks (a) flag unrealistic candidates, (b) combine into a scalar loss over
a scored candidate list, and (c) rank heavily-overlapping candidates so the
one that spills cells can be discarded instead of plain score-based
non-maximum suppression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .geometry import (
    Box,
    BoxSet,
    area,
    covered_area,
    inflate,
    overlap_fraction,
    shift_bottom,
)


@dataclass(frozen=True)
class ScoredBox:
    """A candidate box with its detection probability."""

    box: Box
    score: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ValueError(f"score must be in [0, 1], got {self.score!r}")


@dataclass(frozen=True)
class ContainmentConfig:
    """Band geometry (pixels) and weights for the containment checks.

    ``inner_band`` is how deep the just-inside band reaches, ``outer_band_near``
    and ``outer_band_far`` bound the just-outside ring, and ``bottom_band`` is
    the height of the bottom strip.  ``outside_reach`` and ``inside_depth``
    shape the bands used when ranking overlapping candidates: cell mass within
    ``outside_reach`` px outside a candidate counts against it, mass within the
    inner ``inside_depth`` fraction of its width/height counts (discounted by
    ``inside_discount``) in its favor.
    """

    inner_band: float = 5.0
    outer_band_near: float = 5.0
    outer_band_far: float = 10.0
    bottom_band: float = 10.0
    outside_reach: float = 20.0
    inside_depth: float = 0.25
    min_fill: float = 1.0 / 8.0
    miss_weight: float = 0.1
    inside_discount: float = 0.1
    score_gap: float = 0.1
    overlap_threshold: float = 0.25

    def __post_init__(self) -> None:
        if not 0.0 < self.min_fill < 1.0:
            raise ValueError("min_fill must be in (0, 1)")
        if not 0.0 < self.inside_depth <= 0.5:
            raise ValueError("inside_depth must be in (0, 0.5]")
        if self.miss_weight < 0 or self.inside_discount < 0:
            raise ValueError("weights must be non-negative")
        if not 0.0 <= self.score_gap <= 1.0:
            raise ValueError("score_gap must be in [0, 1]")
        if not 0.0 <= self.overlap_threshold <= 1.0:
            raise ValueError("overlap_threshold must be in [0, 1]")
        for name in ("inner_band", "outer_band_near", "outer_band_far",
                     "bottom_band", "outside_reach"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


DEFAULT_CONTAINMENT = ContainmentConfig()


def band_sparse(cells: BoxSet, inner: Box | None, outer: Box, max_fill: float) -> bool:
    """True when cell coverage of the region between inner and outer is below
    ``max_fill`` times the region's area (strict comparison).

    ``inner`` may be None for an empty inner region; an inner box reaching
    outside ``outer`` is clipped to it.
    """
    outer_cov = covered_area(cells, outer)
    inner_cov = 0.0
    inner_area = 0.0
    if inner is not None:
        clipped = inner.intersection(outer)
        if clipped is not None:
            inner_cov = covered_area(cells, clipped)
            inner_area = area(clipped)
    return outer_cov - inner_cov < max_fill * (area(outer) - inner_area)


def band_occupied(cells: BoxSet, inner: Box | None, outer: Box) -> bool:
    """True when any cell mass lies between inner and outer."""
    inner_cov = 0.0
    if inner is not None:
        clipped = inner.intersection(outer)
        if clipped is not None:
            inner_cov = covered_area(cells, clipped)
    return covered_area(cells, outer) - inner_cov > 0.0


def violates_containment(
    table: Box,
    cells: BoxSet,
    cfg: ContainmentConfig = DEFAULT_CONTAINMENT,
    *,
    whole_fill: float | None = None,
    inner_fill: float | None = None,
    bottom_fill: float | None = None,
) -> bool:
    """True when a table candidate is unrealistic given the cell mask.

    Any of four conditions flags the candidate: the whole box is sparsely
    covered; the band just inside the border is sparsely covered; the ring
    just outside contains any cells; the bottom strip is sparsely covered.
    The per-condition fill thresholds default to ``cfg.min_fill`` and exist
    as separate knobs only so they can diverge later.
    """
    if area(table) == 0.0:
        return True  # degenerate candidates are never realistic
    if band_sparse(cells, None, table, whole_fill if whole_fill is not None else cfg.min_fill):
        return True
    inner = inflate(table, -cfg.inner_band, -cfg.inner_band)
    if band_sparse(cells, inner, table, inner_fill if inner_fill is not None else cfg.min_fill):
        return True
    near = inflate(table, cfg.outer_band_near, cfg.outer_band_near)
    far = inflate(table, cfg.outer_band_far, cfg.outer_band_far)
    if band_occupied(cells, near, far):
        return True
    bottom_inner = shift_bottom(table, -cfg.bottom_band)
    return band_sparse(cells, bottom_inner, table,
                       bottom_fill if bottom_fill is not None else cfg.min_fill)


def containment_loss(
    tables: Sequence[ScoredBox],
    cells: BoxSet,
    cfg: ContainmentConfig = DEFAULT_CONTAINMENT,
) -> float:
    """Scalar penalty over scored candidates.

    A flagged candidate contributes its full probability; a clean one
    contributes ``miss_weight * (1 - probability)``, so the loss is zero only
    when flagged candidates have probability 0 and clean ones probability 1.
    """
    total = 0.0
    for cand in tables:
        if violates_containment(cand.box, cells, cfg):
            total += cand.score
        else:
            total += cfg.miss_weight * (1.0 - cand.score)
    return total


def spillover_score(
    table: Box,
    cells: BoxSet,
    cfg: ContainmentConfig = DEFAULT_CONTAINMENT,
) -> float:
    """Cell mass just outside the box minus discounted mass just inside.

    Lower is better: a good candidate has nothing within ``outside_reach``
    px outside and plenty inside its border region.
    """
    reach = inflate(table, cfg.outside_reach, cfg.outside_reach)
    core = inflate(table, -cfg.inside_depth * table.width, -cfg.inside_depth * table.height)
    in_table = covered_area(cells, table)
    outside = covered_area(cells, reach) - in_table
    inside = in_table - covered_area(cells, core)
    return outside - cfg.inside_discount * inside


def _conflicts(a: ScoredBox, b: ScoredBox, cfg: ContainmentConfig) -> bool:
    return (
        overlap_fraction(a.box, b.box) > cfg.overlap_threshold
        and abs(a.score - b.score) < cfg.score_gap
    )


def suppress_overlapping(
    candidates: Sequence[ScoredBox],
    cells: BoxSet,
    cfg: ContainmentConfig = DEFAULT_CONTAINMENT,
) -> list[ScoredBox]:
    """Resolve near-duplicate candidates by spillover rather than raw score.

    For any pair overlapping more than ``overlap_threshold`` (of the smaller
    box) whose probabilities differ by less than ``score_gap``, the member
    with the higher spillover score is discarded.  Candidates are considered
    in ascending spillover order (ties: higher probability, then input
    order) and kept greedily unless they conflict with an already-kept one,
    which makes the outcome independent of input order and idempotent.
    The survivors are returned in their original input order.
    """
    scores = [spillover_score(c.box, cells, cfg) for c in candidates]
    order = sorted(range(len(candidates)), key=lambda i: (scores[i], -candidates[i].score, i))
    kept: list[int] = []
    for i in order:
        if any(_conflicts(candidates[i], candidates[j], cfg) for j in kept):
            continue
        kept.append(i)
    return [candidates[i] for i in sorted(kept)]
