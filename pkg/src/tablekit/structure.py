"""Cluster-based reconstruction of a logical grid from detected cell boxes.

Given the cell boxes, text lines and optional ruling lines found inside one
table region, the pipeline (``build_structure``) snaps cells to text,
estimates the row/column counts by sampling, infers the table's alignment,
clusters cell coordinates into row/column positions, and then repairs the
grid: merging over-split fragments, placing stray text, splitting
over-merged cells next to gaps, and growing spans over empty neighbours.
Every step is deterministic; nothing here depends on randomness or
iteration order of unordered containers.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Sequence

from .errors import InternalInvariantError
from .geometry import Box, bounding_box

Orientation = Literal["horizontal", "vertical"]


@dataclass(frozen=True)
class TextLine:
    """One extracted text line; ``text`` is stripped during ingestion."""

    box: Box
    text: str


@dataclass(frozen=True)
class RulingLine:
    """A graphical line: constant ``position`` on one axis, ``span`` on the other."""

    orientation: Orientation
    position: float
    span: tuple[float, float]

    def __post_init__(self) -> None:
        if self.orientation not in ("horizontal", "vertical"):
            raise ValueError(f"bad orientation: {self.orientation!r}")
        if self.span[0] > self.span[1]:
            raise ValueError(f"inverted span: {self.span!r}")


@dataclass
class LogicalCell:
    """A grid cell: anchor position, spans, text content and physical box.

    ``lines`` keeps the member text lines so later repair steps can move
    individual lines between cells; it is bookkeeping, not part of the
    logical identity of the cell.
    """

    row: int
    col: int
    row_span: int = 1
    col_span: int = 1
    content: str = ""
    box: Box | None = None
    lines: list[TextLine] = field(default_factory=list)

    @property
    def row_end(self) -> int:
        return self.row + self.row_span

    @property
    def col_end(self) -> int:
        return self.col + self.col_span

    def covers(self, r: int, c: int) -> bool:
        return self.row <= r < self.row_end and self.col <= c < self.col_end


@dataclass
class TableStructure:
    """The logical grid of one table."""

    n_rows: int = 0
    n_cols: int = 0
    cells: list[LogicalCell] = field(default_factory=list)
    alignment_x: str = "left"
    alignment_y: str = "top"
    sampling_dispersion: float = 0.0


@dataclass(frozen=True)
class StructureConfig:
    expand_step: float = 5.0
    lowercase_merge: bool = True
    line_dedupe_tol: float = 3.0
    dispersion_threshold: float = 1.0
    kmeans_max_iter: int = 100
    kmeans_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.expand_step <= 0 or self.line_dedupe_tol <= 0:
            raise ValueError("expand_step and line_dedupe_tol must be positive")
        if self.dispersion_threshold <= 0 or self.kmeans_max_iter <= 0 or self.kmeans_tol <= 0:
            raise ValueError("thresholds and iteration caps must be positive")


DEFAULT_STRUCTURE = StructureConfig()

_X_PICK: dict[str, Callable[[Box], float]] = {
    "left": lambda b: b.x1,
    "center": lambda b: b.midx,
    "right": lambda b: b.x2,
}
_Y_PICK: dict[str, Callable[[Box], float]] = {
    "top": lambda b: b.y1,
    "middle": lambda b: b.midy,
    "bottom": lambda b: b.y2,
}


def _reading_order(lines: Sequence[TextLine]) -> list[TextLine]:
    return sorted(lines, key=lambda t: (t.box.y1, t.box.x1, t.box.x2, t.text))


def _join_texts(lines: Sequence[TextLine]) -> str:
    return " ".join(t.text for t in _reading_order(lines) if t.text)


def _starts_lowercase(text: str) -> bool:
    # Judged on the first letter; leading digits/punctuation are neutral.
    for ch in text:
        if ch.isalpha():
            return ch.islower()
    return False


# ---------------------------------------------------------------------------
# cell preparation


def preprocess_cells(cells: Sequence[Box], text_lines: Sequence[TextLine]) -> list[Box]:
    """Snap detected cell boxes to the text they contain.

    Boxes touching no text line are dropped as noise; survivors grow to the
    bounding union with every text line they overlap; boxes that overlap each
    other after growing are merged until none do.  Result ordered by (y1, x1).
    """
    grown: list[Box] = []
    for b in cells:
        touching = [t.box for t in text_lines if b.intersects(t.box)]
        if not touching:
            continue
        grown.append(bounding_box([b, *touching]))
    merged = grown
    changed = True
    while changed:
        changed = False
        out: list[Box] = []
        for b in merged:
            hit = next((k for k, o in enumerate(out) if o.intersects(b)), None)
            if hit is None:
                out.append(b)
            else:
                out[hit] = bounding_box([out[hit], b])
                changed = True
        merged = out
    return sorted(merged, key=lambda b: (b.y1, b.x1))


def _clamp_into(b: Box, frame: Box) -> Box:
    def clamp(v: float, lo: float, hi: float) -> float:
        return min(max(v, lo), hi)

    return Box(
        clamp(b.x1, frame.x1, frame.x2),
        clamp(b.y1, frame.y1, frame.y2),
        clamp(b.x2, frame.x1, frame.x2),
        clamp(b.y2, frame.y1, frame.y2),
    )


def horizontal_expand(cells: Sequence[Box], table: Box, step: float) -> list[Box]:
    """Widen cells toward their neighbours to bridge gaps left by missed cells.

    Runs simultaneous passes: in each pass every cell (in (y1, x1) order)
    tries to move its left edge then its right edge one ``step`` outward,
    clamped to the table frame, keeping the move only if the widened box
    would not overlap any other cell's current box.  Passes repeat until a
    full pass makes no move, so facing cells meet in the middle instead of
    the first-processed one swallowing the whole gap.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    boxes = [_clamp_into(b, table) for b in cells]
    order = sorted(range(len(boxes)), key=lambda i: (boxes[i].y1, boxes[i].x1, i))

    def blocked(i: int, candidate: Box) -> bool:
        return any(j != i and candidate.intersects(boxes[j]) for j in range(len(boxes)))

    changed = True
    while changed:
        changed = False
        for i in order:
            b = boxes[i]
            nx1 = max(table.x1, b.x1 - step)
            if nx1 < b.x1 and not blocked(i, Box(nx1, b.y1, b.x2, b.y2)):
                boxes[i] = b = Box(nx1, b.y1, b.x2, b.y2)
                changed = True
            nx2 = min(table.x2, b.x2 + step)
            if nx2 > b.x2 and not blocked(i, Box(b.x1, b.y1, nx2, b.y2)):
                boxes[i] = b = Box(b.x1, b.y1, nx2, b.y2)
                changed = True
    return boxes


# ---------------------------------------------------------------------------
# row/column counting


def _coefficient_of_variation(samples: Sequence[int]) -> float:
    mean = statistics.mean(samples)
    if mean == 0:
        return 0.0
    return statistics.pstdev(samples) / mean


def _unique_inner_positions(positions: Sequence[float], lo: float, hi: float, tol: float) -> int:
    inner = sorted(p for p in positions if lo + tol < p < hi - tol)
    count = 0
    prev: float | None = None
    for p in inner:
        if prev is None or p - prev > tol:
            count += 1
        prev = p
    return count


def count_rows_cols(
    cells: Sequence[Box],
    ruling: Sequence[RulingLine],
    table: Box,
    cfg: StructureConfig = DEFAULT_STRUCTURE,
) -> tuple[int, int, float]:
    """Estimate (n_rows, n_cols, sampling dispersion) for one table.

    Each cell casts a horizontal sample (how many cells a horizontal line
    through its mid-height crosses -> column count) and a vertical sample
    (cells crossed at its mid-width -> row count); the maxima win.  The
    dispersion is the larger coefficient of variation of the two sample
    sets — high values signal that the cell detections disagree about the
    grid.  When ruling lines are supplied the counts are floored at the
    number of unique inner lines plus one.
    """
    n_rows = n_cols = 0
    dispersion = 0.0
    if cells:
        col_samples = [
            sum(1 for c in cells if c.y1 <= b.midy <= c.y2) for b in cells
        ]
        row_samples = [
            sum(1 for c in cells if c.x1 <= b.midx <= c.x2) for b in cells
        ]
        n_cols = max(col_samples)
        n_rows = max(row_samples)
        dispersion = max(
            _coefficient_of_variation(col_samples),
            _coefficient_of_variation(row_samples),
        )
    if ruling:
        tol = cfg.line_dedupe_tol
        inner_h = _unique_inner_positions(
            [l.position for l in ruling if l.orientation == "horizontal"],
            table.y1, table.y2, tol,
        )
        inner_v = _unique_inner_positions(
            [l.position for l in ruling if l.orientation == "vertical"],
            table.x1, table.x2, tol,
        )
        n_rows = max(n_rows, inner_h + 1)
        n_cols = max(n_cols, inner_v + 1)
    return n_rows, n_cols, dispersion


# ---------------------------------------------------------------------------
# 1-D clustering


def _quantile(sorted_vals: Sequence[float], q: float) -> float:
    pos = q * (len(sorted_vals) - 1)
    lo = int(pos)
    hi = min(lo + 1, len(sorted_vals) - 1)
    frac = pos - lo
    return sorted_vals[lo] + (sorted_vals[hi] - sorted_vals[lo]) * frac


def _nearest(centers: Sequence[float], v: float) -> int:
    best = 0
    best_d = abs(v - centers[0])
    for i in range(1, len(centers)):
        d = abs(v - centers[i])
        if d < best_d:  # ties stay with the lower index
            best, best_d = i, d
    return best


def kmeans_1d(
    values: Sequence[float],
    k: int,
    cfg: StructureConfig = DEFAULT_STRUCTURE,
) -> tuple[list[float], list[int]]:
    """Deterministic Lloyd iteration on one-dimensional data.

    Centers start at the (i + 0.5) / k quantiles of the sorted values; a
    cluster that empties is re-seeded at the value farthest from its current
    center (never stealing a singleton's only member).  ``k`` is capped at
    the number of distinct values.  Returns ascending centers and, for each
    input value in original order, the index of its nearest center.
    """
    if not values:
        raise ValueError("kmeans_1d needs at least one value")
    if k < 1:
        raise ValueError("k must be >= 1")
    svals = sorted(values)
    distinct = len(set(svals))
    k = min(k, distinct)
    centers = [_quantile(svals, (i + 0.5) / k) for i in range(k)]
    for _ in range(cfg.kmeans_max_iter):
        assign = [_nearest(centers, v) for v in svals]
        counts = [0] * k
        for a in assign:
            counts[a] += 1
        for c in range(k):
            if counts[c]:
                continue
            far_i = -1
            far_d = -1.0
            for i, v in enumerate(svals):
                if counts[assign[i]] <= 1:
                    continue
                d = abs(v - centers[assign[i]])
                if d > far_d:
                    far_i, far_d = i, d
            if far_i < 0:
                continue
            counts[assign[far_i]] -= 1
            assign[far_i] = c
            counts[c] = 1
            centers[c] = svals[far_i]
        new_centers = list(centers)
        for c in range(k):
            members = [v for v, a in zip(svals, assign) if a == c]
            if members:
                new_centers[c] = statistics.fmean(members)
        shift = max(abs(n - o) for n, o in zip(new_centers, centers))
        centers = new_centers
        if shift < cfg.kmeans_tol:
            break
    centers.sort()
    assignment = [_nearest(centers, v) for v in values]
    return centers, assignment


def infer_alignment(
    cells: Sequence[Box],
    n_rows: int,
    n_cols: int,
    cfg: StructureConfig = DEFAULT_STRUCTURE,
) -> tuple[str, str]:
    """Pick the edge family (per axis) whose values cluster most tightly.

    Candidates are left/center/right x-coordinates clustered into ``n_cols``
    groups and top/middle/bottom y-coordinates into ``n_rows`` groups; the
    family with the smallest total within-cluster absolute deviation wins,
    with ties resolved in the declared order.
    """
    if not cells:
        raise ValueError("infer_alignment needs at least one cell")

    def best(families: list[tuple[str, list[float]]], k: int) -> str:
        winner = families[0][0]
        best_dev = float("inf")
        for name, vals in families:
            centers, assign = kmeans_1d(vals, max(1, k), cfg)
            dev = sum(abs(v - centers[a]) for v, a in zip(vals, assign))
            if dev < best_dev:
                winner, best_dev = name, dev
        return winner

    fx = [(name, [pick(b) for b in cells]) for name, pick in _X_PICK.items()]
    fy = [(name, [pick(b) for b in cells]) for name, pick in _Y_PICK.items()]
    return best(fx, n_cols), best(fy, n_rows)


def assign_positions(
    cells: Sequence[Box],
    centers_x: Sequence[float],
    centers_y: Sequence[float],
    alignment_x: str,
    alignment_y: str,
) -> list[tuple[int, int, int]]:
    """Map each box to (cell_index, row, col) via its nearest centers."""
    pick_x = _X_PICK[alignment_x]
    pick_y = _Y_PICK[alignment_y]
    out = []
    for i, b in enumerate(cells):
        col = _nearest(centers_x, pick_x(b))
        row = _nearest(centers_y, pick_y(b))
        out.append((i, row, col))
    return out


# ---------------------------------------------------------------------------
# grid assembly and repair


def merge_collisions(
    assignments: Sequence[tuple[int, int, int]],
    boxes: Sequence[Box],
    cell_lines: Sequence[Sequence[TextLine]],
) -> list[LogicalCell]:
    """Turn position assignments into cells, merging boxes that share a slot.

    Colliding members merge into one cell: box = bounding union, content =
    the members' texts joined by single spaces in reading order of their
    boxes.
    """
    groups: dict[tuple[int, int], list[int]] = {}
    for idx, row, col in assignments:
        groups.setdefault((row, col), []).append(idx)
    cells: list[LogicalCell] = []
    for (row, col), idxs in groups.items():
        idxs = sorted(idxs, key=lambda i: (boxes[i].y1, boxes[i].x1, i))
        contents = [c for c in (_join_texts(cell_lines[i]) for i in idxs) if c]
        lines = [l for i in idxs for l in _reading_order(cell_lines[i])]
        cells.append(
            LogicalCell(
                row=row,
                col=col,
                content=" ".join(contents),
                box=bounding_box([boxes[i] for i in idxs]),
                lines=lines,
            )
        )
    cells.sort(key=lambda c: (c.row, c.col))
    return cells


def _copy_cells(cells: Sequence[LogicalCell]) -> list[LogicalCell]:
    return [replace(c, lines=list(c.lines)) for c in cells]


def _occupancy(cells: Sequence[LogicalCell]) -> dict[tuple[int, int], LogicalCell]:
    occ: dict[tuple[int, int], LogicalCell] = {}
    for cell in cells:
        for r in range(cell.row, cell.row_end):
            for c in range(cell.col, cell.col_end):
                occ[(r, c)] = cell
    return occ


def _union_boxes(a: Box | None, b: Box | None) -> Box | None:
    if a is None:
        return b
    if b is None:
        return a
    return bounding_box([a, b])


def _merge_contents(first: str, second: str) -> str:
    return " ".join(p for p in (first, second) if p)


def merge_lowercase_continuations(table: TableStructure) -> TableStructure:
    """Fold cells that start with a lowercase letter into the cell above.

    Such cells are almost always the bottom half of an over-split cell.  The
    target is the nearest occupied row above in the same column; the merge
    only happens when that cell has content.  Cells are visited top-to-bottom
    so chains collapse in a single pass.
    """
    cells = _copy_cells(table.cells)
    cells.sort(key=lambda c: (c.row, c.col))
    occ = _occupancy(cells)
    removed: set[int] = set()
    for cell in list(cells):
        if id(cell) in removed or not _starts_lowercase(cell.content):
            continue
        target: LogicalCell | None = None
        for r in range(cell.row - 1, -1, -1):
            cand = occ.get((r, cell.col))
            if cand is not None and cand is not cell:
                target = cand
                break
        if target is None or not target.content:
            continue
        target.content = _merge_contents(target.content, cell.content)
        target.lines.extend(cell.lines)
        target.box = _union_boxes(target.box, cell.box)
        removed.add(id(cell))
        for r in range(cell.row, cell.row_end):
            for c in range(cell.col, cell.col_end):
                occ.pop((r, c), None)
    kept = [c for c in cells if id(c) not in removed]
    return replace(table, cells=kept)


def assign_leftover_text(
    table: TableStructure,
    leftovers: Sequence[TextLine],
    centers_x: Sequence[float],
    centers_y: Sequence[float],
) -> TableStructure:
    """Place text lines that no detected cell claimed.

    Each leftover line is positioned like a cell box; it merges into the cell
    occupying that slot or becomes a new cell there.
    """
    if not leftovers or not centers_x or not centers_y:
        return replace(table, cells=_copy_cells(table.cells))
    pick_x = _X_PICK[table.alignment_x]
    pick_y = _Y_PICK[table.alignment_y]
    cells = _copy_cells(table.cells)
    occ = _occupancy(cells)
    for line in _reading_order(leftovers):
        if not line.text:
            continue
        col = _nearest(centers_x, pick_x(line.box))
        row = _nearest(centers_y, pick_y(line.box))
        target = occ.get((row, col))
        if target is None:
            cell = LogicalCell(row=row, col=col, content=line.text,
                               box=line.box, lines=[line])
            cells.append(cell)
            occ[(row, col)] = cell
        else:
            if target.box is not None and (line.box.y1, line.box.x1) < (target.box.y1, target.box.x1):
                target.content = _merge_contents(line.text, target.content)
            else:
                target.content = _merge_contents(target.content, line.text)
            target.lines.append(line)
            target.box = _union_boxes(target.box, line.box)
    cells.sort(key=lambda c: (c.row, c.col))
    return replace(table, cells=cells)


def split_into_empty_neighbors(
    table: TableStructure,
    centers_x: Sequence[float],
    centers_y: Sequence[float],
) -> TableStructure:
    """Re-home text lines of cells adjacent to an empty slot.

    For every empty grid slot, the member lines of the cells directly above
    and below are re-positioned individually; lines whose position lands on
    the empty slot move there, undoing vertical over-merges.
    """
    if not centers_x or not centers_y:
        return replace(table, cells=_copy_cells(table.cells))
    pick_x = _X_PICK[table.alignment_x]
    pick_y = _Y_PICK[table.alignment_y]
    cells = _copy_cells(table.cells)
    occ = _occupancy(cells)
    for r in range(table.n_rows):
        for c in range(table.n_cols):
            if (r, c) in occ:
                continue
            moved: list[TextLine] = []
            for nr in (r - 1, r + 1):
                donor = occ.get((nr, c))
                if donor is None or not donor.lines:
                    continue
                kept: list[TextLine] = []
                for line in donor.lines:
                    row = _nearest(centers_y, pick_y(line.box))
                    col = _nearest(centers_x, pick_x(line.box))
                    if (row, col) == (r, c):
                        moved.append(line)
                    else:
                        kept.append(line)
                if len(kept) == len(donor.lines):
                    continue
                donor.lines = kept
                if kept:
                    donor.content = _join_texts(kept)
                    donor.box = bounding_box([l.box for l in kept])
                else:
                    cells.remove(donor)
                    for rr in range(donor.row, donor.row_end):
                        for cc in range(donor.col, donor.col_end):
                            occ.pop((rr, cc), None)
            if moved:
                cell = LogicalCell(row=r, col=c, content=_join_texts(moved),
                                   box=bounding_box([l.box for l in moved]),
                                   lines=moved)
                cells.append(cell)
                occ[(r, c)] = cell
    cells.sort(key=lambda c: (c.row, c.col))
    return replace(table, cells=cells)


def expand_spans(
    table: TableStructure,
    centers_x: Sequence[float],
    centers_y: Sequence[float],
) -> TableStructure:
    """Grow cells over adjacent empty rows/columns their box physically crosses.

    A cell gains a row (above or below its current span) when every slot of
    that row within the cell's columns is empty and the cell's box crosses
    the row's center coordinate; columns grow symmetrically.  Occupancy is
    re-checked after every single-step growth so spans never overlap.
    """
    cells = _copy_cells(table.cells)
    cells.sort(key=lambda c: (c.row, c.col))
    occ = _occupancy(cells)
    max_rows = min(table.n_rows, len(centers_y))
    max_cols = min(table.n_cols, len(centers_x))

    def row_free(r: int, cell: LogicalCell) -> bool:
        return all((r, c) not in occ for c in range(cell.col, cell.col_end))

    def col_free(c: int, cell: LogicalCell) -> bool:
        return all((r, c) not in occ for r in range(cell.row, cell.row_end))

    def claim(cell: LogicalCell) -> None:
        for r in range(cell.row, cell.row_end):
            for c in range(cell.col, cell.col_end):
                occ[(r, c)] = cell

    for cell in cells:
        box = cell.box
        if box is None:
            continue
        while (cell.row - 1 >= 0 and row_free(cell.row - 1, cell)
               and box.y1 <= centers_y[cell.row - 1] <= box.y2):
            cell.row -= 1
            cell.row_span += 1
            claim(cell)
        while (cell.row_end < max_rows and row_free(cell.row_end, cell)
               and box.y1 <= centers_y[cell.row_end] <= box.y2):
            cell.row_span += 1
            claim(cell)
        while (cell.col - 1 >= 0 and col_free(cell.col - 1, cell)
               and box.x1 <= centers_x[cell.col - 1] <= box.x2):
            cell.col -= 1
            cell.col_span += 1
            claim(cell)
        while (cell.col_end < max_cols and col_free(cell.col_end, cell)
               and box.x1 <= centers_x[cell.col_end] <= box.x2):
            cell.col_span += 1
            claim(cell)
    cells.sort(key=lambda c: (c.row, c.col))
    return replace(table, cells=cells)


def validate_grid(table: TableStructure) -> None:
    """Raise InternalInvariantError if cells overlap or leave the grid."""
    seen: dict[tuple[int, int], LogicalCell] = {}
    for cell in table.cells:
        if cell.row < 0 or cell.col < 0 or cell.row_span < 1 or cell.col_span < 1:
            raise InternalInvariantError(f"bad cell geometry: {cell.row},{cell.col}")
        if cell.row_end > table.n_rows or cell.col_end > table.n_cols:
            raise InternalInvariantError(
                f"cell at ({cell.row},{cell.col}) leaves the {table.n_rows}x{table.n_cols} grid"
            )
        for r in range(cell.row, cell.row_end):
            for c in range(cell.col, cell.col_end):
                if (r, c) in seen:
                    raise InternalInvariantError(f"overlapping cells at ({r},{c})")
                seen[(r, c)] = cell


# ---------------------------------------------------------------------------
# full pipeline


def _pad_values(vals: list[float], k: int, extra: Sequence[float]) -> list[float]:
    # Detected boxes can expose fewer distinct coordinates than the required
    # cluster count (a fully missed row or column); stray text lines supply
    # the missing positions.
    distinct = set(vals)
    if len(distinct) >= k:
        return vals
    out = list(vals)
    for v in extra:
        if v not in distinct:
            distinct.add(v)
            out.append(v)
            if len(distinct) >= k:
                break
    return out


def build_structure(
    cells: Sequence[Box],
    text: Sequence[TextLine],
    ruling: Sequence[RulingLine],
    table: Box,
    cfg: StructureConfig = DEFAULT_STRUCTURE,
) -> TableStructure:
    """Run the whole box-to-grid pipeline for one table region.

    Inputs must share one coordinate frame with text already clipped to the
    table.  With no usable cells and no text the result is an empty 0x0
    structure; with text but no usable cell boxes the text lines themselves
    stand in as cells.
    """
    boxes = preprocess_cells(cells, text)
    if not boxes and text:
        boxes = preprocess_cells([t.box for t in text], text)
    if not boxes:
        return TableStructure()

    cell_lines: list[list[TextLine]] = [[] for _ in boxes]
    leftovers: list[TextLine] = []
    for line in text:
        best = -1
        best_area = 0.0
        for i, b in enumerate(boxes):
            inter = b.intersection(line.box)
            if inter is None:
                continue
            a = inter.width * inter.height
            if a > best_area:
                best, best_area = i, a
        if best >= 0:
            cell_lines[best].append(line)
        else:
            leftovers.append(line)

    expanded = horizontal_expand(boxes, table, cfg.expand_step)
    n_rows, n_cols, dispersion = count_rows_cols(expanded, ruling, table, cfg)
    n_rows = max(n_rows, 1)
    n_cols = max(n_cols, 1)

    alignment_x, alignment_y = infer_alignment(boxes, n_rows, n_cols, cfg)
    pick_x = _X_PICK[alignment_x]
    pick_y = _Y_PICK[alignment_y]
    xs = _pad_values([pick_x(b) for b in boxes], n_cols,
                     [pick_x(l.box) for l in _reading_order(leftovers)])
    ys = _pad_values([pick_y(b) for b in boxes], n_rows,
                     [pick_y(l.box) for l in _reading_order(leftovers)])
    centers_x, _ = kmeans_1d(xs, n_cols, cfg)
    centers_y, _ = kmeans_1d(ys, n_rows, cfg)

    assignments = assign_positions(boxes, centers_x, centers_y, alignment_x, alignment_y)
    logical = merge_collisions(assignments, boxes, cell_lines)
    result = TableStructure(
        n_rows=len(centers_y),
        n_cols=len(centers_x),
        cells=logical,
        alignment_x=alignment_x,
        alignment_y=alignment_y,
        sampling_dispersion=dispersion,
    )
    if cfg.lowercase_merge:
        result = merge_lowercase_continuations(result)
    result = assign_leftover_text(result, leftovers, centers_x, centers_y)
    result = split_into_empty_neighbors(result, centers_x, centers_y)
    result = expand_spans(result, centers_x, centers_y)
    validate_grid(result)
    return result


def select_by_dispersion(
    candidates: Sequence[tuple[TableStructure, str]],
    threshold: float = DEFAULT_STRUCTURE.dispersion_threshold,
) -> tuple[TableStructure, str]:
    """Pick the structure whose sampling dispersion is lowest.

    If the first candidate's dispersion is already at or below ``threshold``
    it wins outright (alternates exist only as a fallback); otherwise the
    minimum wins, ties going to the earlier candidate.
    """
    if not candidates:
        raise ValueError("select_by_dispersion needs at least one candidate")
    first = candidates[0]
    if first[0].sampling_dispersion <= threshold:
        return first
    return min(candidates, key=lambda c: c[0].sampling_dispersion)
