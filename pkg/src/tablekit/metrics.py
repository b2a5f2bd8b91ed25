"""Evaluation metrics: character-level detection scores, adjacency-relation
structure scores, IOU-threshold detection scores and tree-edit similarity.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .constraint import ScoredBox
from .geometry import Box, iou
from .structure import LogicalCell, TableStructure
from .treedist import TreeNode, normalized_edit_distance, tree_edit_distance, tree_size


def _f1(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall else 0.0


def _norm(text: str) -> str:
    # Collapse whitespace runs, strip the ends; case is preserved.
    return " ".join(text.split())


# ---------------------------------------------------------------------------
# character-level detection metrics


@dataclass(frozen=True)
class CharBox:
    """One character and its box; membership is decided by the box center."""

    box: Box
    char: str

    def __post_init__(self) -> None:
        if not self.char:
            raise ValueError("char must be non-empty")


@dataclass(frozen=True)
class DocumentScore:
    doc_id: str
    recall: float
    precision: float
    f1: float


@dataclass
class MetricsReport:
    """Per-document and aggregate character-level detection scores.

    ``purity`` is the number of documents whose recall floors to 1 and
    ``completeness`` the same for precision — note these follow the floor
    formulas as used by the table-competition script; the conventional
    naming swaps them, so both labels are emitted in serialized reports.
    """

    per_document: list[DocumentScore]
    aggregate: tuple[float, float, float]
    purity: int
    completeness: int


def _chars_inside(tables: Sequence[Box], chars: Sequence[CharBox]) -> set[int]:
    hit: set[int] = set()
    for i, ch in enumerate(chars):
        cx, cy = ch.box.midx, ch.box.midy
        if any(t.contains_point(cx, cy) for t in tables):
            hit.add(i)
    return hit


def char_detection_metrics(
    gt_tables: Sequence[Sequence[Box]],
    pred_tables: Sequence[Sequence[Box]],
    chars: Sequence[Sequence[CharBox]],
    doc_ids: Sequence[str] | None = None,
) -> MetricsReport:
    """Score predicted table regions by the characters they capture.

    A character belongs to a region when its box center lies inside it.
    Per document: recall is the fraction of ground-truth table characters
    captured by any predicted table, precision the fraction of predicted
    characters that are ground-truth table characters; ratios over an empty
    denominator count as 1.  Aggregates are per-document means, with F1
    recomputed from them.
    """
    if not (len(gt_tables) == len(pred_tables) == len(chars)):
        raise ValueError("gt_tables, pred_tables and chars must align per document")
    if doc_ids is None:
        doc_ids = [f"doc{i}" for i in range(len(chars))]
    per_document: list[DocumentScore] = []
    for doc_id, gt, pred, chs in zip(doc_ids, gt_tables, pred_tables, chars):
        gt_chars = _chars_inside(gt, chs)
        pred_chars = _chars_inside(pred, chs)
        inter = len(gt_chars & pred_chars)
        recall = inter / len(gt_chars) if gt_chars else 1.0
        precision = inter / len(pred_chars) if pred_chars else 1.0
        per_document.append(DocumentScore(doc_id, recall, precision, _f1(precision, recall)))
    if per_document:
        agg_r = sum(d.recall for d in per_document) / len(per_document)
        agg_p = sum(d.precision for d in per_document) / len(per_document)
    else:
        agg_r = agg_p = 1.0
    purity = sum(math.floor(d.recall) for d in per_document)
    completeness = sum(math.floor(d.precision) for d in per_document)
    return MetricsReport(per_document, (agg_r, agg_p, _f1(agg_p, agg_r)), purity, completeness)


# ---------------------------------------------------------------------------
# adjacency-relation structure metrics


@dataclass(frozen=True)
class AdjacencyRelation:
    """Directed link from a cell to its nearest non-blank neighbour."""

    from_content: str
    to_content: str
    direction: str  # "horizontal" | "vertical"
    blanks_skipped: int


def _grid(t: TableStructure) -> dict[tuple[int, int], LogicalCell]:
    occ: dict[tuple[int, int], LogicalCell] = {}
    for cell in t.cells:
        for r in range(cell.row, cell.row_end):
            for c in range(cell.col, cell.col_end):
                occ[(r, c)] = cell
    return occ


def adjacency_relations(t: TableStructure, *, dedupe: bool = False) -> list[AdjacencyRelation]:
    """Enumerate nearest-non-blank neighbour relations of a structure.

    For each non-blank cell and each row it occupies, the scan walks right
    over blank slots (empty or blank-content, each counted in
    ``blanks_skipped``) to the first non-blank cell; columns are scanned
    downward the same way.  A spanning neighbour reachable in several rows
    yields a single relation.  By default the result is a multiset — the
    same content pair at different grid positions appears once per
    occurrence; ``dedupe`` collapses identical tuples instead.
    """
    occ = _grid(t)
    rels: list[AdjacencyRelation] = []
    cells = sorted(t.cells, key=lambda c: (c.row, c.col))
    for cell in cells:
        content = _norm(cell.content)
        if not content:
            continue
        seen: set[int] = set()
        for r in range(cell.row, cell.row_end):
            blanks = 0
            for cc in range(cell.col_end, t.n_cols):
                other = occ.get((r, cc))
                if other is None or not _norm(other.content):
                    blanks += 1
                    continue
                if id(other) not in seen:
                    seen.add(id(other))
                    rels.append(AdjacencyRelation(content, _norm(other.content),
                                                  "horizontal", blanks))
                break
        seen = set()
        for c in range(cell.col, cell.col_end):
            blanks = 0
            for rr in range(cell.row_end, t.n_rows):
                other = occ.get((rr, c))
                if other is None or not _norm(other.content):
                    blanks += 1
                    continue
                if id(other) not in seen:
                    seen.add(id(other))
                    rels.append(AdjacencyRelation(content, _norm(other.content),
                                                  "vertical", blanks))
                break
    if dedupe:
        unique: list[AdjacencyRelation] = []
        seen_rel: set[AdjacencyRelation] = set()
        for rel in rels:
            if rel not in seen_rel:
                seen_rel.add(rel)
                unique.append(rel)
        return unique
    return rels


def adjacency_metrics(gt: TableStructure, pred: TableStructure) -> tuple[float, float, float]:
    """(recall, precision, f1) of predicted adjacency relations.

    Relations match on contents, direction and blanks skipped, as multisets.
    An empty ground truth scores recall 1; an empty prediction precision 1.
    """
    gt_rel = Counter(adjacency_relations(gt))
    pred_rel = Counter(adjacency_relations(pred))
    inter = sum((gt_rel & pred_rel).values())
    n_gt = sum(gt_rel.values())
    n_pred = sum(pred_rel.values())
    recall = inter / n_gt if n_gt else 1.0
    precision = inter / n_pred if n_pred else 1.0
    return recall, precision, _f1(precision, recall)


# ---------------------------------------------------------------------------
# IOU-threshold detection metrics


@dataclass(frozen=True)
class IouThresholdScore:
    threshold: float
    precision: float
    recall: float
    f1: float


@dataclass
class IouReport:
    per_threshold: list[IouThresholdScore]
    weighted_f1: float


def match_count_at(gt: Sequence[Box], pred: Sequence[ScoredBox], threshold: float) -> int:
    """Greedy one-to-one matches at an IOU threshold.

    Predictions are visited by descending score (ties: input order); each
    takes the unmatched ground-truth box of highest IOU and the pair counts
    when that IOU reaches the threshold.
    """
    matched: set[int] = set()
    count = 0
    for _, p in sorted(enumerate(pred), key=lambda ip: (-ip[1].score, ip[0])):
        best = -1
        best_iou = 0.0
        for gi, g in enumerate(gt):
            if gi in matched:
                continue
            v = iou(p.box, g)
            if v > best_iou:
                best, best_iou = gi, v
        if best >= 0 and best_iou >= threshold:
            matched.add(best)
            count += 1
    return count


def iou_detection_metrics(
    gt: Sequence[Box],
    pred: Sequence[ScoredBox],
    thresholds: Sequence[float],
) -> IouReport:
    """Precision/recall/F1 per IOU threshold plus the threshold-weighted F1."""
    if not thresholds:
        raise ValueError("need at least one threshold")
    if list(thresholds) != sorted(thresholds) or not all(0 < t <= 1 for t in thresholds):
        raise ValueError("thresholds must be ascending and in (0, 1]")
    per: list[IouThresholdScore] = []
    for t in thresholds:
        tp = match_count_at(gt, pred, t)
        precision = tp / len(pred) if pred else (1.0 if not gt else 0.0)
        recall = tp / len(gt) if gt else (1.0 if not pred else 0.0)
        per.append(IouThresholdScore(t, precision, recall, _f1(precision, recall)))
    weighted = sum(s.threshold * s.f1 for s in per) / sum(s.threshold for s in per)
    return IouReport(per, weighted)


# ---------------------------------------------------------------------------
# tree-edit similarity


def structure_to_tree(t: TableStructure) -> TreeNode:
    """Tag tree of a structure: table -> one tr per row -> td per anchored cell."""
    root = TreeNode("table")
    by_row: dict[int, list[LogicalCell]] = {}
    for cell in t.cells:
        by_row.setdefault(cell.row, []).append(cell)
    for r in range(t.n_rows):
        tr = TreeNode("tr")
        for cell in sorted(by_row.get(r, []), key=lambda c: c.col):
            tr.children.append(
                TreeNode("td", colspan=cell.col_span, rowspan=cell.row_span,
                         content=cell.content)
            )
        root.children.append(tr)
    return root


def _teds_update(a: TreeNode, b: TreeNode) -> float:
    if a.tag != b.tag:
        return 1.0
    if a.tag == "td":
        if a.colspan != b.colspan or a.rowspan != b.rowspan:
            return 1.0
        return normalized_edit_distance(a.content, b.content)
    return 0.0


def teds(gt: TableStructure, pred: TableStructure) -> float:
    """Tree-edit-distance similarity between two structures, in [0, 1].

    1 minus the ordered tree edit distance of the tag trees over the larger
    tree size; inserts and deletes cost 1, a td-to-td substitution costs the
    normalized content edit distance (or 1 when the spans differ).  Two
    empty tables compare as identical single-node trees and score 1.
    """
    ta = structure_to_tree(gt)
    tb = structure_to_tree(pred)
    dist = tree_edit_distance(
        ta, tb,
        delete_cost=lambda n: 1.0,
        insert_cost=lambda n: 1.0,
        update_cost=_teds_update,
    )
    denom = max(tree_size(ta), tree_size(tb))
    return min(1.0, max(0.0, 1.0 - dist / denom))
