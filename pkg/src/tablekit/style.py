"""Style routing and ruling-line augmentation schemes.

Tables with visible vertical ruling lines and tables without them are best
handled by detectors specialised for each look; ``route`` maps a style label
to the detector id whose cell candidates should be consumed.  The two
augmentation schemes rewrite a table's ruling-line set: ``no-lines`` erases
every line, ``full-boundaries`` draws a separator between every adjacent
row and column pair plus the four borders.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Sequence

from .geometry import Box
from .structure import LogicalCell, RulingLine, TableStructure

BORDERED = "bordered"
BORDERLESS = "borderless"


@dataclass(frozen=True)
class StyleLabel:
    """Whether the table shows vertical graphical ruling lines."""

    has_vertical_lines: bool


def route(label: StyleLabel) -> str:
    """Pick which specialised cell-candidate set to consume."""
    return BORDERED if label.has_vertical_lines else BORDERLESS


def augment_no_lines(ruling: Sequence[RulingLine]) -> list[RulingLine]:
    """Erase every graphical line."""
    return []


def _column_center(cells: Sequence[LogicalCell], j: int) -> float | None:
    exact = [c.box.midx for c in cells if c.box is not None and c.col == j and c.col_span == 1]
    if exact:
        return statistics.fmean(exact)
    covering = [c.box.midx for c in cells if c.box is not None and c.col <= j < c.col_end]
    if covering:
        return statistics.fmean(covering)
    return None


def _row_center(cells: Sequence[LogicalCell], r: int) -> float | None:
    exact = [c.box.midy for c in cells if c.box is not None and c.row == r and c.row_span == 1]
    if exact:
        return statistics.fmean(exact)
    covering = [c.box.midy for c in cells if c.box is not None and c.row <= r < c.row_end]
    if covering:
        return statistics.fmean(covering)
    return None


def augment_full_boundaries(gt: TableStructure, table: Box) -> list[RulingLine]:
    """Draw a separator line in every inter-row/inter-column gap plus borders.

    Each inner vertical line sits at the median of the per-row gap midpoints
    between the two adjacent columns (rows where a spanning cell straddles
    the boundary contribute no sample); inner horizontal lines are built the
    same way from per-column gaps.  A boundary with no gap samples falls back
    to the midpoint of the adjacent column/row centers, then to even spacing.
    """
    boxed = [c for c in gt.cells if c.box is not None]
    if not boxed:
        raise ValueError("structure has no cell boxes to place boundaries between")
    occ: dict[tuple[int, int], LogicalCell] = {}
    for cell in gt.cells:
        for r in range(cell.row, cell.row_end):
            for c in range(cell.col, cell.col_end):
                occ[(r, c)] = cell

    lines: list[RulingLine] = []
    for j in range(gt.n_cols - 1):
        samples = []
        for r in range(gt.n_rows):
            left = occ.get((r, j))
            right = occ.get((r, j + 1))
            if (left is not None and right is not None and left is not right
                    and left.col_end == j + 1 and right.col == j + 1
                    and left.box is not None and right.box is not None):
                samples.append((left.box.x2 + right.box.x1) / 2.0)
        if samples:
            pos = statistics.median(samples)
        else:
            ca = _column_center(boxed, j)
            cb = _column_center(boxed, j + 1)
            if ca is not None and cb is not None:
                pos = (ca + cb) / 2.0
            else:
                pos = table.x1 + (j + 1) * table.width / gt.n_cols
        lines.append(RulingLine("vertical", pos, (table.y1, table.y2)))

    for i in range(gt.n_rows - 1):
        samples = []
        for c in range(gt.n_cols):
            top = occ.get((i, c))
            bottom = occ.get((i + 1, c))
            if (top is not None and bottom is not None and top is not bottom
                    and top.row_end == i + 1 and bottom.row == i + 1
                    and top.box is not None and bottom.box is not None):
                samples.append((top.box.y2 + bottom.box.y1) / 2.0)
        if samples:
            pos = statistics.median(samples)
        else:
            ra = _row_center(boxed, i)
            rb = _row_center(boxed, i + 1)
            if ra is not None and rb is not None:
                pos = (ra + rb) / 2.0
            else:
                pos = table.y1 + (i + 1) * table.height / gt.n_rows
        lines.append(RulingLine("horizontal", pos, (table.x1, table.x2)))

    lines.append(RulingLine("vertical", table.x1, (table.y1, table.y2)))
    lines.append(RulingLine("vertical", table.x2, (table.y1, table.y2)))
    lines.append(RulingLine("horizontal", table.y1, (table.x1, table.x2)))
    lines.append(RulingLine("horizontal", table.y2, (table.x1, table.x2)))
    lines.sort(key=lambda l: (l.orientation, l.position, l.span))
    return lines
