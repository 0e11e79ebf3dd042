"""SpreadsheetML (XLSX) extraction: zoom, cell-style summary, images and charts."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from xml.etree import ElementTree as ET

from ..container import OpcPackage, main_part, rel_by_id, rels_by_type
from ..errors import ParseFailure
from ..model import (
    CellAnchor, CellStyleProps, ChartProps, LayoutObject, PageFeature, PageGeometry, TextProps,
    column_index,
)
from .theme import INDEXED_COLORS, NS, R_ID, SHEET_THEME_SLOTS, Theme, local_name, normalize_hex, parse_theme, q, tint_color

log = logging.getLogger(__name__)

DEFAULT_ZOOM = 100
_CELL_REF = re.compile(r"^\$?([A-Za-z]{1,3})\$?(\d+)$")
_BORDER_SIDES = ("left", "right", "top", "bottom")


@dataclass
class _Xf:
    font_size: float | None
    font_name: str | None
    font_color: str | None
    fill_pattern: str
    fill_color: str | None
    borders: list[str] = field(default_factory=list)


def sheet_color(el: ET.Element | None, theme: Theme) -> str | None:
    if el is None or el.get("auto") in ("1", "true"):
        return None
    hexval: str | None = None
    if el.get("rgb"):
        hexval = normalize_hex(el.get("rgb"))
    elif el.get("theme") is not None:
        idx = int(el.get("theme", -1))
        if 0 <= idx < len(SHEET_THEME_SLOTS):
            hexval = theme.colors.get(SHEET_THEME_SLOTS[idx])
    elif el.get("indexed") is not None:
        idx = int(el.get("indexed", -1))
        if 0 <= idx < len(INDEXED_COLORS):
            hexval = INDEXED_COLORS[idx]
    if hexval is not None and el.get("tint"):
        hexval = tint_color(hexval, float(el.get("tint", 0)))
    return hexval


def _load_xfs(pkg: OpcPackage, wb_name: str, theme: Theme) -> list[_Xf]:
    rel = next(iter(rels_by_type(pkg, wb_name, "styles")), None)
    if rel is None:
        return []
    root = pkg.xml(rel.target)
    fonts = root.findall("s:fonts/s:font", NS)
    fills = root.findall("s:fills/s:fill", NS)
    borders = root.findall("s:borders/s:border", NS)
    out = []
    for xf in root.findall("s:cellXfs/s:xf", NS):
        font = fonts[int(xf.get("fontId", 0))] if int(xf.get("fontId", 0)) < len(fonts) else None
        fill = fills[int(xf.get("fillId", 0))] if int(xf.get("fillId", 0)) < len(fills) else None
        border = borders[int(xf.get("borderId", 0))] if int(xf.get("borderId", 0)) < len(borders) else None
        size = name = color = None
        if font is not None:
            sz = font.find("s:sz", NS)
            size = float(sz.get("val")) if sz is not None and sz.get("val") else None
            nm = font.find("s:name", NS)
            name = nm.get("val").casefold() if nm is not None and nm.get("val") else None
            color = sheet_color(font.find("s:color", NS), theme)
        pattern, fill_color = "none", None
        pf = fill.find("s:patternFill", NS) if fill is not None else None
        if pf is not None:
            pattern = pf.get("patternType", "none")
            if pattern != "none":
                fill_color = sheet_color(pf.find("s:fgColor", NS), theme)
        sides = []
        for side in _BORDER_SIDES:
            el = border.find(f"s:{side}", NS) if border is not None else None
            sides.append((el.get("style") if el is not None else None) or "none")
        out.append(_Xf(size, name, color, pattern.casefold(), fill_color, sides))
    return out


def _cell_pos(ref: str) -> tuple[int, int] | None:
    m = _CELL_REF.match(ref or "")
    if not m:
        return None
    return int(m.group(2)), column_index(m.group(1))


def _anchor_cells(anchor: ET.Element) -> CellAnchor | None:
    def marker(tag: str) -> tuple[int, int] | None:
        el = anchor.find(f"xdr:{tag}", NS)
        if el is None:
            return None
        row = el.find("xdr:row", NS)
        col = el.find("xdr:col", NS)
        return int(row.text or 0) + 1, int(col.text or 0) + 1

    start = marker("from")
    if start is None:
        return None
    end = marker("to") if local_name(anchor.tag) == "twoCellAnchor" else None
    return CellAnchor(from_cell=start, to_cell=end or start)


def chart_kind(pkg: OpcPackage, chart_part: str) -> ChartProps | None:
    root = pkg.xml(chart_part)
    plot = root.find("c:chart/c:plotArea", NS)
    if plot is None:
        return None
    for el in plot:
        tag = local_name(el.tag)
        if tag.endswith("Chart"):
            dim = 3 if "3D" in tag else 2
            return ChartProps(chart_type=tag.replace("3D", "").casefold(), dimensionality=dim)
    return None


def _drawing_objects(pkg: OpcPackage, drawing_name: str) -> list[LayoutObject]:
    root = pkg.xml(drawing_name)
    rels = rel_by_id(pkg, drawing_name)
    out: list[LayoutObject] = []

    def contents(anchor: ET.Element, container: ET.Element, cells: CellAnchor | None) -> None:
        for el in container:
            tag = local_name(el.tag)
            if tag == "pic":
                out.append(LayoutObject(kind="sheet_image", cell_anchor=cells))
            elif tag == "graphicFrame":
                chart = el.find("a:graphic/a:graphicData/c:chart", NS)
                if chart is None:
                    continue
                rel = rels.get(chart.get(R_ID, ""))
                if rel is None or rel.target not in pkg.parts:
                    continue
                props = chart_kind(pkg, rel.target)
                if props is not None:
                    out.append(LayoutObject(kind="chart", chart_props=props, cell_anchor=cells))
            elif tag == "grpSp":
                contents(anchor, el, cells)
            elif tag == "AlternateContent":
                choice = next((c for c in el if local_name(c.tag) in ("Choice", "Fallback")), None)
                if choice is not None:
                    contents(anchor, choice, cells)

    for anchor in root:
        if local_name(anchor.tag) in ("twoCellAnchor", "oneCellAnchor", "absoluteAnchor"):
            contents(anchor, anchor, _anchor_cells(anchor))
    return out


def _sheet_feature(pkg: OpcPackage, sheet_name: str, xfs: list[_Xf], doc_id: str, position: int) -> PageFeature:
    root = pkg.xml(sheet_name)
    view = root.find("s:sheetViews/s:sheetView", NS)
    zoom = int(view.get("zoomScale", DEFAULT_ZOOM)) if view is not None else DEFAULT_ZOOM

    used_xfs: dict[int, None] = {}
    max_row = max_col = 0
    for cell in root.iter(q("s", "c")):
        used_xfs.setdefault(int(cell.get("s", 0)), None)
        pos = _cell_pos(cell.get("r", ""))
        if pos:
            max_row, max_col = max(max_row, pos[0]), max(max_col, pos[1])

    objects: list[LayoutObject] = []
    if used_xfs:
        text, styles = TextProps(), CellStyleProps()
        for idx in used_xfs:
            if idx >= len(xfs):
                continue
            xf = xfs[idx]
            if xf.font_size is not None:
                text.font_sizes.append(xf.font_size)
            if xf.font_name is not None:
                text.font_names.append(xf.font_name)
            if xf.font_color is not None:
                text.font_colors.append(xf.font_color)
            styles.fill_patterns.append(xf.fill_pattern)
            if xf.fill_color is not None:
                styles.fill_colors.append(xf.fill_color)
            styles.borders.extend(xf.borders)
        objects.append(LayoutObject(kind="cell_styles", text_props=text, cell_style_props=styles))

    for drawing in root.findall("s:drawing", NS):
        rel = rel_by_id(pkg, sheet_name).get(drawing.get(R_ID, ""))
        if rel is not None and rel.target in pkg.parts:
            objects.extend(_drawing_objects(pkg, rel.target))

    for obj in objects:
        if obj.cell_anchor is not None:
            for r, c in (obj.cell_anchor.from_cell, obj.cell_anchor.to_cell):
                max_row, max_col = max(max_row, r), max(max_col, c)

    geometry = PageGeometry(zoom_scale=zoom, used_rows=max_row or None, used_cols=max_col or None)
    return PageFeature(doc_id=doc_id, doc_type="spreadsheet", page_index=position,
                       page_geometry=geometry, objects=objects)


def extract_spreadsheet(pkg: OpcPackage, doc_id: str, warnings: list[str] | None = None) -> list[PageFeature]:
    wb_name = main_part(pkg)
    if wb_name is None:
        raise ParseFailure(f"{pkg.source_path}: no workbook part")
    workbook = pkg.xml(wb_name)
    theme_rel = next(iter(rels_by_type(pkg, wb_name, "theme")), None)
    theme = parse_theme(pkg.xml(theme_rel.target) if theme_rel else None)
    xfs = _load_xfs(pkg, wb_name, theme)
    rels = rel_by_id(pkg, wb_name)

    pages: list[PageFeature] = []
    for position, sheet in enumerate(workbook.findall("s:sheets/s:sheet", NS), start=1):
        rel = rels.get(sheet.get(R_ID, ""))
        try:
            if rel is None or rel.target not in pkg.parts:
                raise ParseFailure(f"sheet {position}: relationship unresolved")
            pages.append(_sheet_feature(pkg, rel.target, xfs, doc_id, len(pages) + 1))
        except (ET.ParseError, ParseFailure, KeyError, ValueError, IndexError) as exc:
            msg = f"{doc_id}: sheet {position} skipped: {exc}"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
    return pages
