"""Retrieval queries: the field registry, parsing, validation and serialization.

A query file is JSON::

    {"doc_type": "presentation", "unit": "cm", "threshold": "auto",
     "items": [{"kind": "page_geometry", "fields": {"height": 19.05, "width": 25.4}},
               {"kind": "textbox", "fields": {"x": 1.06, "y": 4.02, "width": 23.28}}]}

Lengths are converted to centimeters at parse time, so a parsed query is
always in the canonical unit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

from .errors import EmptyQuery, OutOfBounds, QueryError, QuerySyntaxError, RegistryNotFound, UnitError, UnknownField
from .extractor.theme import normalize_hex
from .model import format_r1c1, parse_cell_ref
from .units import CM_PER_INCH, quantize

PAGE_EXTENT = "page_extent"

EM, AM1, AM2, AM3, AM4 = "EM", "AM-1", "AM-2", "AM-3", "AM-4"

# value classes
LENGTH = "length"          # cm (inch input converted)
INTEGER = "integer"
TEXT = "text"              # case-insensitive string
CHART = "chart"            # chart type with dimensionality
CELL_REF = "cell_ref"      # (row, col)
NUMBER_LIST = "number_list"
HEX_LIST = "hex_list"
TEXT_LIST = "text_list"

LIST_CLASSES = (NUMBER_LIST, HEX_LIST, TEXT_LIST)


@dataclass(frozen=True)
class QueryFieldSpec:
    doc_type: str
    kind: str
    field: str
    value_class: str
    method: str
    bound_min: float | None = None
    bound_max: float | str | None = None
    # for page_extent bounds and coordinates: which page axis the field runs along
    axis: str | None = None


def _font_rows(doc_type: str, kind: str, names=("font_size", "font_color", "font_name")) -> list[QueryFieldSpec]:
    classes = {"font_size": NUMBER_LIST, "font_color": HEX_LIST, "font_name": TEXT_LIST}
    return [QueryFieldSpec(doc_type, kind, n, classes[n], AM1) for n in names]


def _slide_geometry_rows(kind: str, fields=("x", "y", "width", "height")) -> list[QueryFieldSpec]:
    rows = []
    for f in fields:
        if f in ("x", "y"):
            rows.append(QueryFieldSpec("presentation", kind, f, LENGTH, AM4, 0.0, PAGE_EXTENT,
                                       "width" if f == "x" else "height"))
        else:
            rows.append(QueryFieldSpec("presentation", kind, f, LENGTH, AM3, 0.0, PAGE_EXTENT, f))
    return rows


DOCX_PAGE_MAX = 55.87
SLIDE_MIN, SLIDE_MAX = 2.54, 142.24
ZOOM_MIN, ZOOM_MAX = 10, 400

_PL_FIELDS = ("height", "width", "columns", "column_margin", "upper_margin", "right_margin", "lower_margin",
              "left_margin", "header_margin", "footer_margin", "gutter_margin")

REGISTRY: tuple[QueryFieldSpec, ...] = tuple(
    # wordprocessing
    [QueryFieldSpec("wordprocessing", "page_geometry", f, INTEGER if f == "columns" else LENGTH, AM3,
                    0.0, DOCX_PAGE_MAX) for f in _PL_FIELDS]
    + _font_rows("wordprocessing", "body_text")
    + _font_rows("wordprocessing", "footnote")
    + _font_rows("wordprocessing", "header")
    + _font_rows("wordprocessing", "footer")
    + [QueryFieldSpec("wordprocessing", "image", "height", LENGTH, AM3, 0.0, PAGE_EXTENT, "height"),
       QueryFieldSpec("wordprocessing", "image", "width", LENGTH, AM3, 0.0, PAGE_EXTENT, "width"),
       QueryFieldSpec("wordprocessing", "table", "rows", INTEGER, EM),
       QueryFieldSpec("wordprocessing", "table", "cols", INTEGER, EM)]
    + _font_rows("wordprocessing", "table")
    # presentation
    + [QueryFieldSpec("presentation", "page_geometry", "height", LENGTH, AM3, SLIDE_MIN, SLIDE_MAX),
       QueryFieldSpec("presentation", "page_geometry", "width", LENGTH, AM3, SLIDE_MIN, SLIDE_MAX)]
    + _slide_geometry_rows("textbox") + _font_rows("presentation", "textbox", ("font_name", "font_color"))
    + _slide_geometry_rows("image")
    + _slide_geometry_rows("table")
    + [QueryFieldSpec("presentation", "table", "rows", INTEGER, EM),
       QueryFieldSpec("presentation", "table", "cols", INTEGER, EM)]
    + _font_rows("presentation", "table", ("font_name",))
    + _font_rows("presentation", "shape", ("font_color",))
    + [QueryFieldSpec("presentation", "shape", "shape_type", TEXT, EM)]
    + _slide_geometry_rows("shape")
    # spreadsheet
    + [QueryFieldSpec("spreadsheet", "page_geometry", "zoom_scale", INTEGER, AM3, ZOOM_MIN, ZOOM_MAX)]
    + _font_rows("spreadsheet", "cell_styles", ("font_size", "font_name"))
    + [QueryFieldSpec("spreadsheet", "cell_styles", "fill_pattern", TEXT_LIST, AM1),
       QueryFieldSpec("spreadsheet", "cell_styles", "fill_color", HEX_LIST, AM1),
       QueryFieldSpec("spreadsheet", "cell_styles", "border", TEXT_LIST, AM1),
       QueryFieldSpec("spreadsheet", "sheet_image", "from_cell", CELL_REF, AM4),
       QueryFieldSpec("spreadsheet", "sheet_image", "to_cell", CELL_REF, AM4),
       QueryFieldSpec("spreadsheet", "chart", "chart_type", CHART, AM2),
       QueryFieldSpec("spreadsheet", "chart", "from_cell", CELL_REF, AM4),
       QueryFieldSpec("spreadsheet", "chart", "to_cell", CELL_REF, AM4)]
)

_INDEX = {(r.doc_type, r.kind, r.field): r for r in REGISTRY}

# Short codes (TB, SWH, FTS, ...) and common synonyms accepted in query files.
KIND_ALIASES = {
    "page_layout": "page_geometry", "pl": "page_geometry", "swh": "page_geometry", "zs": "page_geometry",
    "slide_size": "page_geometry", "zoom": "page_geometry",
    "tb": "textbox", "text_box": "textbox", "img": "image", "tbl": "table", "sh": "shape",
    "txt": "body_text", "text": "body_text", "fnt": "footnote", "hdr": "header", "ftr": "footer",
    "cell": "cell_styles", "cells": "cell_styles", "picture": "image",
}
FIELD_ALIASES = {
    "row": "rows", "column": "cols", "columns_count": "cols",
    "coordinate_x": "x", "coordinate_y": "y",
    "fts": "font_size", "ftn": "font_name", "fip": "fill_pattern", "fic": "fill_color", "brd": "border",
    "imgf": "from_cell", "imgt": "to_cell", "chty": "chart_type", "chtf": "from_cell", "chtt": "to_cell",
    "from": "from_cell", "to": "to_cell", "type": "shape_type", "zoom": "zoom_scale",
    "font_sizes": "font_size", "font_colors": "font_color", "font_names": "font_name",
    "upper": "upper_margin", "top_margin": "upper_margin", "right": "right_margin",
    "lower": "lower_margin", "bottom_margin": "lower_margin", "left": "left_margin",
    "header": "header_margin", "footer": "footer_margin", "gutter": "gutter_margin",
    "column_spacing": "column_margin",
}
# the page-layout "columns" count is distinct from the table "cols" count
_PAGE_FIELD_ALIASES = {"column": "columns", "cols": "columns"}


def registry_lookup(doc_type: str, kind: str, field_name: str) -> QueryFieldSpec:
    kind = KIND_ALIASES.get(kind.lower(), kind.lower())
    key = field_name.lower()
    if kind == "page_geometry":
        key = _PAGE_FIELD_ALIASES.get(key, key)
    key = FIELD_ALIASES.get(key, key) if (doc_type, kind, key) not in _INDEX else key
    try:
        return _INDEX[(doc_type, kind, key)]
    except KeyError:
        raise RegistryNotFound(f"no registry row for ({doc_type}, {kind}, {field_name})") from None


def kinds_for(doc_type: str) -> list[str]:
    return sorted({r.kind for r in REGISTRY if r.doc_type == doc_type})


@dataclass(frozen=True)
class ChartValue:
    chart_type: str      # case-folded base type, e.g. "barchart"
    dimensionality: int


def parse_chart_type(text: str) -> ChartValue:
    folded = text.strip().casefold()
    dim = 3 if "3d" in folded else 2
    base = folded.replace("3d", "")
    if not base.endswith("chart"):
        base += "chart"
    return ChartValue(base, dim)


QueryValue = Union[float, int, str, tuple, ChartValue]


@dataclass
class QueryItem:
    kind: str
    constraints: dict[str, QueryValue]


@dataclass
class RetrievalQuery:
    doc_type: str
    items: list[QueryItem]
    unit: str = "cm"
    threshold: float | str = "auto"
    extra: dict[str, Any] = field(default_factory=dict, compare=False)


def query_count(rq: RetrievalQuery) -> int:
    return len(rq.items)


# --- value coercion --------------------------------------------------------

def _as_list(raw: Any) -> list:
    if isinstance(raw, str):
        parts = [p.strip() for p in raw.split(",")]
        return [p for p in parts if p]
    if isinstance(raw, (list, tuple)):
        return list(raw)
    return [raw]


def _number(raw: Any, where: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float, str)):
        raise QueryError(f"{where}: expected a number, got {raw!r}")
    try:
        value = float(raw)
    except ValueError:
        raise QueryError(f"{where}: expected a number, got {raw!r}") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise QueryError(f"{where}: non-finite number")
    return value


def _integer(raw: Any, where: str) -> int:
    value = _number(raw, where)
    if value != int(value):
        raise QueryError(f"{where}: expected an integer, got {raw!r}")
    return int(value)


def _hex(raw: Any, where: str) -> str:
    value = normalize_hex(str(raw)) if isinstance(raw, (str, int)) else None
    if value is None:
        raise QueryError(f"{where}: {raw!r} is not a 6-digit hex color")
    return value


def coerce_value(spec: QueryFieldSpec, raw: Any, unit: str, where: str) -> QueryValue:
    vc = spec.value_class
    if vc == LENGTH:
        value = _number(raw, where)
        if unit == "inch":
            value *= CM_PER_INCH
        value = quantize(value)
        if value < 0:
            raise OutOfBounds(f"{where}: negative length {value}")
    elif vc == INTEGER:
        value = _integer(raw, where)
    elif vc == TEXT:
        if not isinstance(raw, str) or not raw.strip():
            raise QueryError(f"{where}: expected a non-empty string")
        return raw.strip().casefold()
    elif vc == CHART:
        if not isinstance(raw, str) or not raw.strip():
            raise QueryError(f"{where}: expected a chart type name")
        return parse_chart_type(raw)
    elif vc == CELL_REF:
        try:
            return parse_cell_ref(str(raw))
        except ValueError as exc:
            raise QueryError(f"{where}: {exc}") from None
    elif vc in LIST_CLASSES:
        items = _as_list(raw)
        if not items:
            raise QueryError(f"{where}: empty value list")
        if vc == NUMBER_LIST:
            return tuple(_number(v, where) for v in items)
        if vc == HEX_LIST:
            return tuple(_hex(v, where) for v in items)
        out = tuple(str(v).strip().casefold() for v in items)
        if any(not v for v in out):
            raise QueryError(f"{where}: blank entry in value list")
        return out
    else:  # pragma: no cover - registry is closed
        raise QueryError(f"{where}: unsupported value class {vc}")

    if isinstance(spec.bound_min, (int, float)) and isinstance(spec.bound_max, (int, float)):
        if not spec.bound_min <= value <= spec.bound_max:
            raise OutOfBounds(f"{where}: {value} outside [{spec.bound_min}, {spec.bound_max}]")
    return value


# --- parsing ---------------------------------------------------------------

_DOC_TYPE_ALIASES = {"pptx": "presentation", "docx": "wordprocessing", "xlsx": "spreadsheet"}
_UNIT_ALIASES = {"cm": "cm", "centimeter": "cm", "centimeters": "cm", "in": "inch", "inch": "inch", "inches": "inch"}
_TOP_KEYS = {"doc_type", "unit", "threshold", "items", "group", "label", "name"}


def parse_query(source: str | Path | dict) -> RetrievalQuery:
    """Parse and validate a query from a path, JSON text, or an already-decoded dict."""
    if isinstance(source, dict):
        data = source
    else:
        text = source
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            try:
                text = Path(source).read_text(encoding="utf-8")
            except OSError as exc:
                raise QueryError(f"cannot read query file {source}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise QuerySyntaxError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise QuerySyntaxError("query must be a JSON object")

    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise UnknownField(f"unknown top-level keys: {sorted(unknown)}")
    raw_type = str(data.get("doc_type", "")).lower()
    doc_type = _DOC_TYPE_ALIASES.get(raw_type, raw_type)
    if doc_type not in ("presentation", "wordprocessing", "spreadsheet"):
        raise UnknownField(f"doc_type {data.get('doc_type')!r} is not presentation/wordprocessing/spreadsheet")
    unit = _UNIT_ALIASES.get(str(data.get("unit", "cm")).lower())
    if unit is None:
        raise UnitError(f"unit {data.get('unit')!r} is not cm or inch")

    threshold: float | str = data.get("threshold", "auto")
    if threshold != "auto":
        try:
            threshold = float(threshold)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise QueryError(f"threshold {threshold!r} must be 'auto' or a number") from None
        if not 0.0 <= threshold <= 1.0:
            raise OutOfBounds(f"threshold {threshold} outside [0, 1]")

    raw_items = data.get("items")
    if not raw_items:
        raise EmptyQuery("query has no items")
    if not isinstance(raw_items, list):
        raise QuerySyntaxError("'items' must be a list")

    items = []
    for i, raw in enumerate(raw_items):
        if not isinstance(raw, dict) or "kind" not in raw:
            raise QuerySyntaxError(f"item {i}: expected an object with 'kind' and 'fields'")
        kind_in = str(raw["kind"]).lower()
        kind = KIND_ALIASES.get(kind_in, kind_in)
        fields = raw.get("fields")
        if not isinstance(fields, dict) or not fields:
            raise EmptyQuery(f"item {i} ({kind}): no fields")
        if kind not in kinds_for(doc_type):
            raise UnknownField(f"item {i}: kind {raw['kind']!r} is not queryable for {doc_type}")
        constraints: dict[str, QueryValue] = {}
        for name, value in fields.items():
            try:
                spec = registry_lookup(doc_type, kind, name)
            except RegistryNotFound:
                raise UnknownField(f"item {i}: no field {name!r} for ({doc_type}, {kind})") from None
            if spec.field in constraints:
                raise QueryError(f"item {i}: field {spec.field!r} given twice")
            constraints[spec.field] = coerce_value(spec, value, unit, f"item {i} {kind}.{spec.field}")
        items.append(QueryItem(kind=kind, constraints=constraints))

    extra = {k: data[k] for k in ("group", "label", "name") if k in data}
    return RetrievalQuery(doc_type=doc_type, items=items, unit="cm", threshold=threshold, extra=extra)


def _value_to_json(value: QueryValue, spec: QueryFieldSpec) -> Any:
    if spec.value_class == CELL_REF:
        return format_r1c1(*value)  # type: ignore[misc]
    if spec.value_class == CHART:
        assert isinstance(value, ChartValue)
        base = value.chart_type[:-len("chart")]
        return f"{base}3DChart" if value.dimensionality == 3 else f"{base}Chart"
    if isinstance(value, tuple):
        return list(value)
    return value


def query_to_dict(rq: RetrievalQuery) -> dict:
    items = []
    for item in rq.items:
        fields = {name: _value_to_json(v, registry_lookup(rq.doc_type, item.kind, name))
                  for name, v in item.constraints.items()}
        items.append({"kind": item.kind, "fields": fields})
    out: dict[str, Any] = {"doc_type": rq.doc_type, "unit": "cm", "threshold": rq.threshold, "items": items}
    out.update(rq.extra)
    return out


def serialize_query(rq: RetrievalQuery) -> str:
    return json.dumps(query_to_dict(rq), indent=2)
