"""Normalized page-feature records produced by extraction.

All lengths are centimeters, quantized to four decimals; font sizes are
points; colors are uppercase six-digit RGB hex without ``#``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

KINDS = (
    "textbox",
    "image",
    "table",
    "shape",
    "footnote",
    "header",
    "footer",
    "body_text",
    "cell_styles",
    "sheet_image",
    "chart",
)

_R1C1 = re.compile(r"^R(\d+)C(\d+)$", re.IGNORECASE)
_A1 = re.compile(r"^\$?([A-Z]{1,3})\$?(\d+)$", re.IGNORECASE)


def format_r1c1(row: int, col: int) -> str:
    return f"R{row}C{col}"


def column_index(letters: str) -> int:
    n = 0
    for ch in letters.upper():
        n = n * 26 + (ord(ch) - ord("A") + 1)
    return n


def parse_cell_ref(text: str) -> tuple[int, int]:
    """Parse ``R5C10`` (or A1-style ``J5``) into 1-based (row, col)."""
    text = text.strip()
    m = _R1C1.match(text)
    if m:
        row, col = int(m.group(1)), int(m.group(2))
    else:
        m = _A1.match(text)
        if not m:
            raise ValueError(f"not a cell reference: {text!r}")
        row, col = int(m.group(2)), column_index(m.group(1))
    if row < 1 or col < 1:
        raise ValueError(f"cell reference out of range: {text!r}")
    return row, col


@dataclass
class Geometry:
    x: float | None = None
    y: float | None = None
    width: float | None = None
    height: float | None = None


@dataclass
class TextProps:
    font_sizes: list[float] = field(default_factory=list)
    font_colors: list[str] = field(default_factory=list)
    font_names: list[str] = field(default_factory=list)

    def extend(self, other: TextProps) -> None:
        self.font_sizes.extend(other.font_sizes)
        self.font_colors.extend(other.font_colors)
        self.font_names.extend(other.font_names)


@dataclass
class TableProps:
    rows: int
    cols: int


@dataclass
class ChartProps:
    chart_type: str
    dimensionality: int


@dataclass
class CellAnchor:
    from_cell: tuple[int, int]
    to_cell: tuple[int, int]


@dataclass
class CellStyleProps:
    fill_patterns: list[str] = field(default_factory=list)
    fill_colors: list[str] = field(default_factory=list)
    borders: list[str] = field(default_factory=list)


@dataclass
class LayoutObject:
    kind: str
    geometry: Geometry | None = None
    text_props: TextProps | None = None
    table_props: TableProps | None = None
    shape_type: str | None = None
    chart_props: ChartProps | None = None
    cell_anchor: CellAnchor | None = None
    cell_style_props: CellStyleProps | None = None


@dataclass
class PageGeometry:
    width: float | None = None
    height: float | None = None
    columns: int | None = None
    margins: dict[str, float] | None = None
    zoom_scale: int | None = None
    # spreadsheet used range (rows, cols); the "page" for cell-anchor distances
    used_rows: int | None = None
    used_cols: int | None = None


MARGIN_NAMES = ("upper", "right", "lower", "left", "header", "footer", "gutter", "column")


@dataclass
class PageFeature:
    doc_id: str
    doc_type: str
    page_index: int
    page_geometry: PageGeometry
    objects: list[LayoutObject] = field(default_factory=list)

    def objects_of(self, kind: str) -> list[tuple[int, LayoutObject]]:
        return [(i, o) for i, o in enumerate(self.objects) if o.kind == kind]
