"""HTML emitter/parser for single-table fragments and token alignment.

The emitter writes minimal deterministic markup (no styling tags, attributes
only when a span exceeds 1).  The parser tolerates whitespace, attribute
quoting styles and ``th`` cells, and reconstructs the grid with the standard
left-to-right skip-occupied placement rule.  ``align_html_to_tokens``
recovers cell boxes by matching each cell's token sequence against a page
token stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from html.parser import HTMLParser

from .errors import HtmlParseError
from .geometry import Box, bounding_box
from .structure import LogicalCell, TableStructure, TextLine
from .treedist import levenshtein


@dataclass
class HtmlCell:
    text: str = ""
    colspan: int = 1
    rowspan: int = 1


@dataclass
class HtmlTable:
    rows: list[list[HtmlCell]] = field(default_factory=list)


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_html(t: TableStructure) -> str:
    """Serialize a structure as a minimal single-table HTML fragment."""
    by_row: dict[int, list[LogicalCell]] = {}
    for cell in t.cells:
        by_row.setdefault(cell.row, []).append(cell)
    parts = ["<table>"]
    for r in range(t.n_rows):
        parts.append("<tr>")
        for cell in sorted(by_row.get(r, []), key=lambda c: c.col):
            attrs = ""
            if cell.col_span > 1:
                attrs += f' colspan="{cell.col_span}"'
            if cell.row_span > 1:
                attrs += f' rowspan="{cell.row_span}"'
            parts.append(f"<td{attrs}>{_escape(cell.content)}</td>")
        parts.append("</tr>")
    parts.append("</table>")
    return "".join(parts)


def _span_attr(value: str | None) -> int:
    if value is None:
        return 1
    try:
        return max(1, int(value))
    except ValueError:
        return 1


class _TableParser(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.tables: list[HtmlTable] = []
        self._table: HtmlTable | None = None
        self._row: list[HtmlCell] | None = None
        self._cell: HtmlCell | None = None

    def handle_starttag(self, tag, attrs):
        if tag == "table":
            if self._table is not None:
                raise HtmlParseError("nested tables are not supported",
                                     row=len(self._table.rows))
            self._table = HtmlTable()
        elif tag == "tr":
            if self._table is None:
                raise HtmlParseError("<tr> outside a table")
            self._cell = None
            self._row = []
            self._table.rows.append(self._row)
        elif tag in ("td", "th"):
            if self._table is None or self._row is None:
                raise HtmlParseError("table cell outside a row",
                                     row=len(self._table.rows) if self._table else 0)
            amap = dict(attrs)
            self._cell = HtmlCell(colspan=_span_attr(amap.get("colspan")),
                                  rowspan=_span_attr(amap.get("rowspan")))
            self._row.append(self._cell)

    def handle_endtag(self, tag):
        if tag in ("td", "th"):
            self._cell = None
        elif tag == "tr":
            self._cell = None
            self._row = None
        elif tag == "table":
            if self._table is not None:
                self.tables.append(self._table)
            self._table = None
            self._row = None
            self._cell = None

    def handle_data(self, data):
        if self._cell is not None:
            self._cell.text += data
        # stray text outside cells (indentation, newlines) is tolerated


def parse_html_table(html: str) -> HtmlTable:
    """Parse one table fragment into rows of cells with span attributes."""
    parser = _TableParser()
    try:
        parser.feed(html)
        parser.close()
    except HtmlParseError:
        raise
    if len(parser.tables) != 1:
        raise HtmlParseError(
            f"expected exactly one <table> element, found {len(parser.tables)}"
        )
    table = parser.tables[0]
    for row in table.rows:
        for cell in row:
            cell.text = cell.text.strip()
    return table


def place_grid(table: HtmlTable) -> TableStructure:
    """Apply the left-to-right, skip-occupied placement rule to build a grid."""
    occupied: set[tuple[int, int]] = set()
    cells: list[LogicalCell] = []
    for r, row in enumerate(table.rows):
        c = 0
        for hc in row:
            while (r, c) in occupied:
                c += 1
            for rr in range(r, r + hc.rowspan):
                for cc in range(c, c + hc.colspan):
                    if (rr, cc) in occupied:
                        raise HtmlParseError("overlapping spans", row=r)
                    occupied.add((rr, cc))
            cells.append(LogicalCell(row=r, col=c, row_span=hc.rowspan,
                                     col_span=hc.colspan, content=hc.text))
            c += hc.colspan
    n_rows = max([len(table.rows)] + [cell.row_end for cell in cells]) if cells else len(table.rows)
    n_cols = max((cell.col_end for cell in cells), default=0)
    return TableStructure(n_rows=n_rows, n_cols=n_cols, cells=cells)


def parse_html(html: str) -> TableStructure:
    """Parse a single-table HTML fragment into a structure (boxes unset)."""
    return place_grid(parse_html_table(html))


# ---------------------------------------------------------------------------
# token alignment


@dataclass
class AlignmentResult:
    """A structure with recovered boxes plus the match bookkeeping."""

    structure: TableStructure
    table_box: Box | None
    matched_cells: int
    candidate_cells: int
    unmatched: list[tuple[int, int]]
    failed: bool


def _tokens_match(a: str, b: str, max_edits: int) -> bool:
    if a == b:
        return True
    return max_edits > 0 and levenshtein(a, b) <= max_edits


def _find_run(stream: list[str], start: int, words: list[str], max_edits: int) -> int | None:
    k = len(words)
    for q in range(start, len(stream) - k + 1):
        if all(_tokens_match(stream[q + i], words[i], max_edits) for i in range(k)):
            return q
    return None


def align_html_to_tokens(
    table: HtmlTable | str,
    tokens: list[TextLine],
    *,
    min_match_fraction: float = 0.9,
    max_token_edits: int = 0,
) -> AlignmentResult:
    """Recover cell boxes by matching cell text against a page token stream.

    Cells are visited in grid order; each cell's whitespace-normalized token
    sequence is searched as a contiguous run in the stream at or after the
    previous match (case-sensitive; ``max_token_edits`` allows per-token
    fuzziness).  A matched cell's box is the bounding union of its tokens'
    boxes; empty cells never consume tokens and unmatched cells are reported.
    The alignment is marked failed when fewer than ``min_match_fraction`` of
    the non-empty cells matched.
    """
    ht = parse_html_table(table) if isinstance(table, str) else table
    structure = place_grid(ht)
    stream = [" ".join(t.text.split()) for t in tokens]
    pos = 0
    matched = 0
    candidates = 0
    unmatched: list[tuple[int, int]] = []
    cell_boxes: list[Box] = []
    for cell in sorted(structure.cells, key=lambda c: (c.row, c.col)):
        words = " ".join(cell.content.split()).split()
        if not words:
            continue
        candidates += 1
        q = _find_run(stream, pos, words, max_token_edits)
        if q is None:
            unmatched.append((cell.row, cell.col))
            continue
        cell.box = bounding_box([tokens[i].box for i in range(q, q + len(words))])
        cell_boxes.append(cell.box)
        matched += 1
        pos = q + len(words)
    failed = candidates > 0 and matched / candidates < min_match_fraction
    table_box = bounding_box(cell_boxes) if cell_boxes else None
    return AlignmentResult(structure, table_box, matched, candidates, unmatched, failed)
