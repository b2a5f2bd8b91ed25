"""JSON schemas and canonical serialization for pages, ground truth and results.

The page object is the toolkit's single ingestion format; everything a page
contributes — detections, text lines, ruling lines, characters, style — is
carried in one JSON document (see the README for the field-by-field schema).
Serialization is canonical: sorted keys, fixed float formatting, so equal
values produce byte-identical files and pipelines can be diffed.
"""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any, IO, Sequence

from .constraint import ScoredBox
from .errors import PageSchemaError
from .geometry import Box
from .metrics import CharBox
from .structure import LogicalCell, RulingLine, TableStructure, TextLine
from .style import StyleLabel

logger = logging.getLogger("tablekit")


@dataclass
class PageInput:
    """One document page's detections and extracted content."""

    doc_id: str
    page_index: int
    width: float
    height: float
    table_candidates: list[ScoredBox] = field(default_factory=list)
    cell_candidates_bordered: list[ScoredBox] = field(default_factory=list)
    cell_candidates_borderless: list[ScoredBox] = field(default_factory=list)
    text_lines: list[TextLine] = field(default_factory=list)
    ruling_lines: list[RulingLine] = field(default_factory=list)
    char_boxes: list[CharBox] | None = None
    style: StyleLabel | None = None


@dataclass
class GroundTruthTable:
    box: Box
    structure: TableStructure


@dataclass
class GroundTruthPage:
    page_index: int
    width: float
    height: float
    tables: list[GroundTruthTable] = field(default_factory=list)
    char_boxes: list[CharBox] | None = None


@dataclass
class GroundTruthDoc:
    doc_id: str
    pages: list[GroundTruthPage] = field(default_factory=list)


@dataclass
class PageResult:
    """Pipeline output for one page: surviving tables and their structures."""

    doc_id: str
    page_index: int
    tables: list[ScoredBox] = field(default_factory=list)
    structures: list[TableStructure] = field(default_factory=list)


# ---------------------------------------------------------------------------
# canonical JSON


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number: {x!r}")
    if abs(x) < 1e15 and float(int(x)) == x:
        return f"{int(x)}.0"
    s = f"{x:.6f}".rstrip("0")
    if s.endswith("."):
        s += "0"
    return s


def canonical_json(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, floats to at most 6 decimals."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError(f"non-string JSON key: {key!r}")
            items.append(json.dumps(key, ensure_ascii=False) + ":" + canonical_json(obj[key]))
        return "{" + ",".join(items) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_canonical(obj: Any, path: str) -> None:
    """Write canonical JSON atomically (tempfile + rename)."""
    text = canonical_json(obj) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tablekit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# schema readers


def _require(obj: Any, key: str, path: str) -> Any:
    if not isinstance(obj, dict):
        raise PageSchemaError(path, f"expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise PageSchemaError(f"{path}/{key}", "missing required field")
    return obj[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise PageSchemaError(path, f"expected a number, got {type(value).__name__}")
    v = float(value)
    if not math.isfinite(v):
        raise PageSchemaError(path, f"non-finite number: {value!r}")
    return v


def _string(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise PageSchemaError(path, f"expected a string, got {type(value).__name__}")
    return value


def _integer(value: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise PageSchemaError(path, f"expected an integer, got {type(value).__name__}")
    if minimum is not None and value < minimum:
        raise PageSchemaError(path, f"must be >= {minimum}, got {value}")
    return value


def _array(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise PageSchemaError(path, f"expected an array, got {type(value).__name__}")
    return value


def box_from_json(value: Any, path: str) -> Box:
    arr = _array(value, path)
    if len(arr) != 4:
        raise PageSchemaError(path, f"box must have 4 coordinates, got {len(arr)}")
    x1, y1, x2, y2 = (_number(v, f"{path}/{i}") for i, v in enumerate(arr))
    if x2 < x1 or y2 < y1:
        raise PageSchemaError(path, f"inverted box [{x1}, {y1}, {x2}, {y2}]")
    return Box(x1, y1, x2, y2)


def box_to_json(b: Box) -> list[float]:
    return [float(b.x1), float(b.y1), float(b.x2), float(b.y2)]


def _scored_box_from_json(value: Any, path: str) -> ScoredBox:
    box = box_from_json(_require(value, "box", path), f"{path}/box")
    score = _number(_require(value, "score", path), f"{path}/score")
    if not 0.0 <= score <= 1.0:
        raise PageSchemaError(f"{path}/score", f"score must be in [0, 1], got {score}")
    return ScoredBox(box, score)


def _scored_box_to_json(sb: ScoredBox) -> dict:
    return {"box": box_to_json(sb.box), "score": float(sb.score)}


def _text_line_from_json(value: Any, path: str) -> TextLine:
    box = box_from_json(_require(value, "box", path), f"{path}/box")
    text = _string(_require(value, "text", path), f"{path}/text")
    return TextLine(box, text.strip())


def _text_line_to_json(t: TextLine) -> dict:
    return {"box": box_to_json(t.box), "text": t.text}


def _ruling_from_json(value: Any, path: str) -> RulingLine:
    orientation = _string(_require(value, "orientation", path), f"{path}/orientation")
    if orientation not in ("horizontal", "vertical"):
        raise PageSchemaError(f"{path}/orientation", f"unknown orientation {orientation!r}")
    position = _number(_require(value, "position", path), f"{path}/position")
    span = _array(_require(value, "span", path), f"{path}/span")
    if len(span) != 2:
        raise PageSchemaError(f"{path}/span", "span must have 2 values")
    lo = _number(span[0], f"{path}/span/0")
    hi = _number(span[1], f"{path}/span/1")
    if lo > hi:
        raise PageSchemaError(f"{path}/span", f"inverted span [{lo}, {hi}]")
    return RulingLine(orientation, position, (lo, hi))


def _ruling_to_json(r: RulingLine) -> dict:
    return {
        "orientation": r.orientation,
        "position": float(r.position),
        "span": [float(r.span[0]), float(r.span[1])],
    }


def _char_from_json(value: Any, path: str) -> CharBox:
    box = box_from_json(_require(value, "box", path), f"{path}/box")
    char = _string(_require(value, "char", path), f"{path}/char")
    if not char:
        raise PageSchemaError(f"{path}/char", "char must be non-empty")
    return CharBox(box, char)


def _char_to_json(c: CharBox) -> dict:
    return {"box": box_to_json(c.box), "char": c.char}


def _clip_box(box: Box, width: float, height: float, path: str) -> Box:
    def clamp(v: float, hi: float) -> float:
        return min(max(v, 0.0), hi)

    clipped = Box(clamp(box.x1, width), clamp(box.y1, height),
                  clamp(box.x2, width), clamp(box.y2, height))
    if clipped != box:
        logger.warning("clipped out-of-bounds box at %s: %s -> %s",
                       path, box.as_tuple(), clipped.as_tuple())
    return clipped


def page_from_json(obj: Any, path: str = "") -> PageInput:
    doc_id = _string(_require(obj, "doc_id", path), f"{path}/doc_id")
    page_index = _integer(_require(obj, "page_index", path), f"{path}/page_index", minimum=0)
    width = _number(_require(obj, "width", path), f"{path}/width")
    height = _number(_require(obj, "height", path), f"{path}/height")
    if width < 0 or height < 0:
        raise PageSchemaError(path, "page dimensions must be non-negative")

    def scored_list(key: str) -> list[ScoredBox]:
        out = []
        for i, item in enumerate(_array(obj.get(key, []), f"{path}/{key}")):
            sb = _scored_box_from_json(item, f"{path}/{key}/{i}")
            out.append(ScoredBox(_clip_box(sb.box, width, height, f"{path}/{key}/{i}/box"),
                                 sb.score))
        return out

    text_lines = []
    for i, item in enumerate(_array(obj.get("text_lines", []), f"{path}/text_lines")):
        tl = _text_line_from_json(item, f"{path}/text_lines/{i}")
        text_lines.append(TextLine(_clip_box(tl.box, width, height,
                                             f"{path}/text_lines/{i}/box"), tl.text))
    ruling_lines = [
        _ruling_from_json(item, f"{path}/ruling_lines/{i}")
        for i, item in enumerate(_array(obj.get("ruling_lines", []), f"{path}/ruling_lines"))
    ]
    char_boxes = None
    if obj.get("char_boxes") is not None:
        char_boxes = []
        for i, item in enumerate(_array(obj["char_boxes"], f"{path}/char_boxes")):
            cb = _char_from_json(item, f"{path}/char_boxes/{i}")
            char_boxes.append(CharBox(_clip_box(cb.box, width, height,
                                                f"{path}/char_boxes/{i}/box"), cb.char))
    style = None
    if obj.get("style") is not None:
        flag = _require(obj["style"], "has_vertical_lines", f"{path}/style")
        if not isinstance(flag, bool):
            raise PageSchemaError(f"{path}/style/has_vertical_lines", "expected a boolean")
        style = StyleLabel(flag)
    return PageInput(
        doc_id=doc_id,
        page_index=page_index,
        width=width,
        height=height,
        table_candidates=scored_list("table_candidates"),
        cell_candidates_bordered=scored_list("cell_candidates_bordered"),
        cell_candidates_borderless=scored_list("cell_candidates_borderless"),
        text_lines=text_lines,
        ruling_lines=ruling_lines,
        char_boxes=char_boxes,
        style=style,
    )


def page_to_json(page: PageInput) -> dict:
    obj: dict[str, Any] = {
        "doc_id": page.doc_id,
        "page_index": page.page_index,
        "width": float(page.width),
        "height": float(page.height),
        "table_candidates": [_scored_box_to_json(s) for s in page.table_candidates],
        "cell_candidates_bordered": [_scored_box_to_json(s) for s in page.cell_candidates_bordered],
        "cell_candidates_borderless": [_scored_box_to_json(s) for s in page.cell_candidates_borderless],
        "text_lines": [_text_line_to_json(t) for t in page.text_lines],
        "ruling_lines": [_ruling_to_json(r) for r in page.ruling_lines],
        "char_boxes": None if page.char_boxes is None else [_char_to_json(c) for c in page.char_boxes],
        "style": None if page.style is None else {"has_vertical_lines": page.style.has_vertical_lines},
    }
    return obj


def _load_json(source: str | IO[str]) -> Any:
    if hasattr(source, "read"):
        return json.load(source)  # type: ignore[arg-type]
    with open(source, "r", encoding="utf-8") as handle:
        return json.load(handle)


def load_pages(source: str | IO[str]) -> list[PageInput]:
    """Read a pages file: a single page object or an array of them."""
    data = _load_json(source)
    if isinstance(data, dict):
        return [page_from_json(data)]
    if isinstance(data, list):
        return [page_from_json(item, f"/{i}") for i, item in enumerate(data)]
    raise PageSchemaError("", f"expected a page object or array, got {type(data).__name__}")


def save_pages(pages: Sequence[PageInput], path: str) -> None:
    write_canonical([page_to_json(p) for p in pages], path)


# ---------------------------------------------------------------------------
# structures


def structure_to_json(t: TableStructure) -> dict:
    return {
        "n_rows": t.n_rows,
        "n_cols": t.n_cols,
        "alignment_x": t.alignment_x,
        "alignment_y": t.alignment_y,
        "sampling_dispersion": float(t.sampling_dispersion),
        "cells": [
            {
                "row": c.row,
                "col": c.col,
                "row_span": c.row_span,
                "col_span": c.col_span,
                "content": c.content,
                "box": None if c.box is None else box_to_json(c.box),
            }
            for c in t.cells
        ],
    }


def structure_from_json(obj: Any, path: str = "") -> TableStructure:
    n_rows = _integer(_require(obj, "n_rows", path), f"{path}/n_rows", minimum=0)
    n_cols = _integer(_require(obj, "n_cols", path), f"{path}/n_cols", minimum=0)
    cells = []
    for i, item in enumerate(_array(obj.get("cells", []), f"{path}/cells")):
        cpath = f"{path}/cells/{i}"
        box = None
        if item.get("box") is not None:
            box = box_from_json(item["box"], f"{cpath}/box")
        cells.append(
            LogicalCell(
                row=_integer(_require(item, "row", cpath), f"{cpath}/row", minimum=0),
                col=_integer(_require(item, "col", cpath), f"{cpath}/col", minimum=0),
                row_span=_integer(item.get("row_span", 1), f"{cpath}/row_span", minimum=1),
                col_span=_integer(item.get("col_span", 1), f"{cpath}/col_span", minimum=1),
                content=_string(item.get("content", ""), f"{cpath}/content"),
                box=box,
            )
        )
    return TableStructure(
        n_rows=n_rows,
        n_cols=n_cols,
        cells=cells,
        alignment_x=_string(obj.get("alignment_x", "left"), f"{path}/alignment_x"),
        alignment_y=_string(obj.get("alignment_y", "top"), f"{path}/alignment_y"),
        sampling_dispersion=_number(obj.get("sampling_dispersion", 0.0),
                                    f"{path}/sampling_dispersion"),
    )


# ---------------------------------------------------------------------------
# ground truth


def ground_truth_to_json(docs: Sequence[GroundTruthDoc]) -> dict:
    return {
        "docs": [
            {
                "doc_id": d.doc_id,
                "pages": [
                    {
                        "page_index": p.page_index,
                        "width": float(p.width),
                        "height": float(p.height),
                        "tables": [
                            {"box": box_to_json(t.box), "structure": structure_to_json(t.structure)}
                            for t in p.tables
                        ],
                        "char_boxes": None if p.char_boxes is None
                        else [_char_to_json(c) for c in p.char_boxes],
                    }
                    for p in d.pages
                ],
            }
            for d in docs
        ]
    }


def ground_truth_from_json(data: Any) -> list[GroundTruthDoc]:
    if isinstance(data, dict):
        data = _require(data, "docs", "")
    docs = []
    for i, dobj in enumerate(_array(data, "/docs")):
        dpath = f"/docs/{i}"
        doc_id = _string(_require(dobj, "doc_id", dpath), f"{dpath}/doc_id")
        pages = []
        for j, pobj in enumerate(_array(dobj.get("pages", []), f"{dpath}/pages")):
            ppath = f"{dpath}/pages/{j}"
            tables = []
            for k, tobj in enumerate(_array(pobj.get("tables", []), f"{ppath}/tables")):
                tpath = f"{ppath}/tables/{k}"
                tables.append(
                    GroundTruthTable(
                        box=box_from_json(_require(tobj, "box", tpath), f"{tpath}/box"),
                        structure=structure_from_json(
                            _require(tobj, "structure", tpath), f"{tpath}/structure"),
                    )
                )
            char_boxes = None
            if pobj.get("char_boxes") is not None:
                char_boxes = [
                    _char_from_json(item, f"{ppath}/char_boxes/{k}")
                    for k, item in enumerate(_array(pobj["char_boxes"], f"{ppath}/char_boxes"))
                ]
            pages.append(
                GroundTruthPage(
                    page_index=_integer(_require(pobj, "page_index", ppath),
                                        f"{ppath}/page_index", minimum=0),
                    width=_number(pobj.get("width", 0.0), f"{ppath}/width"),
                    height=_number(pobj.get("height", 0.0), f"{ppath}/height"),
                    tables=tables,
                    char_boxes=char_boxes,
                )
            )
        docs.append(GroundTruthDoc(doc_id, pages))
    return docs


def load_ground_truth(source: str | IO[str]) -> list[GroundTruthDoc]:
    return ground_truth_from_json(_load_json(source))


def save_ground_truth(docs: Sequence[GroundTruthDoc], path: str) -> None:
    write_canonical(ground_truth_to_json(docs), path)


# ---------------------------------------------------------------------------
# pipeline results


def result_to_json(result: PageResult) -> dict:
    return {
        "doc_id": result.doc_id,
        "page_index": result.page_index,
        "tables": [_scored_box_to_json(s) for s in result.tables],
        "structures": [structure_to_json(s) for s in result.structures],
    }


def results_from_json(data: Any) -> list[PageResult]:
    out = []
    for i, obj in enumerate(_array(data, "")):
        path = f"/{i}"
        tables = [
            _scored_box_from_json(item, f"{path}/tables/{j}")
            for j, item in enumerate(_array(obj.get("tables", []), f"{path}/tables"))
        ]
        structures = [
            structure_from_json(item, f"{path}/structures/{j}")
            for j, item in enumerate(_array(obj.get("structures", []), f"{path}/structures"))
        ]
        out.append(
            PageResult(
                doc_id=_string(_require(obj, "doc_id", path), f"{path}/doc_id"),
                page_index=_integer(_require(obj, "page_index", path),
                                    f"{path}/page_index", minimum=0),
                tables=tables,
                structures=structures,
            )
        )
    return out


def load_results(source: str | IO[str]) -> list[PageResult]:
    return results_from_json(_load_json(source))


def save_results(results: Sequence[PageResult], path: str) -> None:
    write_canonical([result_to_json(r) for r in results], path)
