"""Line-delimited JSON feature database.

Line 1 is a header ``{"schema": 1, "unit": "cm", "created": <ISO-8601>}``;
every following line is one page record. Lengths are written as decimal
strings with four fractional digits so values survive a round trip exactly.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterator

from .errors import IoFailure, MalformedRecord, SchemaMismatch
from .model import (
    CellAnchor, CellStyleProps, ChartProps, Geometry, LayoutObject, PageFeature, PageGeometry,
    TableProps, TextProps, format_r1c1, parse_cell_ref,
)
from .units import LENGTH_DECIMALS

SCHEMA_VERSION = 1
DOC_TYPES = ("presentation", "wordprocessing", "spreadsheet")


@dataclass
class DocumentEntry:
    source_path: str
    doc_type: str
    pages: list[PageFeature] = field(default_factory=list)


@dataclass
class FeatureDb:
    schema_version: int = SCHEMA_VERSION
    unit: str = "cm"
    documents: dict[str, DocumentEntry] = field(default_factory=dict)

    def add(self, doc_id: str, source_path: str, doc_type: str, pages: list[PageFeature]) -> None:
        if doc_id in self.documents:
            raise ValueError(f"duplicate doc_id {doc_id!r}")
        self.documents[doc_id] = DocumentEntry(source_path, doc_type, list(pages))

    def page_count(self) -> int:
        return sum(len(d.pages) for d in self.documents.values())


def _length(value: float | None) -> str | None:
    return None if value is None else f"{value:.{LENGTH_DECIMALS}f}"


def _unlength(value: Any) -> float | None:
    if value is None:
        return None
    if not isinstance(value, str):
        raise ValueError(f"length must be a decimal string, got {value!r}")
    return float(value)


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def object_to_record(obj: LayoutObject) -> dict:
    rec: dict[str, Any] = {"kind": obj.kind}
    if obj.geometry is not None:
        g = obj.geometry
        rec["geometry"] = _drop_none({"x": _length(g.x), "y": _length(g.y),
                                      "width": _length(g.width), "height": _length(g.height)})
    if obj.text_props is not None:
        t = obj.text_props
        rec["text_props"] = {"font_sizes": t.font_sizes, "font_colors": t.font_colors, "font_names": t.font_names}
    if obj.table_props is not None:
        rec["table_props"] = {"rows": obj.table_props.rows, "cols": obj.table_props.cols}
    if obj.shape_type is not None:
        rec["shape_type"] = obj.shape_type
    if obj.chart_props is not None:
        rec["chart_props"] = {"chart_type": obj.chart_props.chart_type,
                              "dimensionality": obj.chart_props.dimensionality}
    if obj.cell_anchor is not None:
        rec["cell_anchor"] = {"from": format_r1c1(*obj.cell_anchor.from_cell),
                              "to": format_r1c1(*obj.cell_anchor.to_cell)}
    if obj.cell_style_props is not None:
        c = obj.cell_style_props
        rec["cell_style_props"] = {"fill_patterns": c.fill_patterns, "fill_colors": c.fill_colors,
                                   "borders": c.borders}
    return rec


def object_from_record(rec: dict) -> LayoutObject:
    obj = LayoutObject(kind=rec["kind"])
    if "geometry" in rec:
        g = rec["geometry"]
        obj.geometry = Geometry(x=_unlength(g.get("x")), y=_unlength(g.get("y")),
                                width=_unlength(g.get("width")), height=_unlength(g.get("height")))
    if "text_props" in rec:
        t = rec["text_props"]
        obj.text_props = TextProps([float(v) for v in t["font_sizes"]], list(t["font_colors"]), list(t["font_names"]))
    if "table_props" in rec:
        obj.table_props = TableProps(int(rec["table_props"]["rows"]), int(rec["table_props"]["cols"]))
    if "shape_type" in rec:
        obj.shape_type = str(rec["shape_type"])
    if "chart_props" in rec:
        obj.chart_props = ChartProps(str(rec["chart_props"]["chart_type"]), int(rec["chart_props"]["dimensionality"]))
    if "cell_anchor" in rec:
        obj.cell_anchor = CellAnchor(parse_cell_ref(rec["cell_anchor"]["from"]),
                                     parse_cell_ref(rec["cell_anchor"]["to"]))
    if "cell_style_props" in rec:
        c = rec["cell_style_props"]
        obj.cell_style_props = CellStyleProps(list(c["fill_patterns"]), list(c["fill_colors"]), list(c["borders"]))
    return obj


def geometry_to_record(g: PageGeometry) -> dict:
    return _drop_none({
        "width": _length(g.width),
        "height": _length(g.height),
        "columns": g.columns,
        "margins": {k: _length(v) for k, v in g.margins.items()} if g.margins is not None else None,
        "zoom_scale": g.zoom_scale,
        "used_rows": g.used_rows,
        "used_cols": g.used_cols,
    })


def geometry_from_record(rec: dict) -> PageGeometry:
    margins = rec.get("margins")
    return PageGeometry(
        width=_unlength(rec.get("width")),
        height=_unlength(rec.get("height")),
        columns=rec.get("columns"),
        margins={k: _unlength(v) for k, v in margins.items()} if margins is not None else None,
        zoom_scale=rec.get("zoom_scale"),
        used_rows=rec.get("used_rows"),
        used_cols=rec.get("used_cols"),
    )


def page_to_record(page: PageFeature, source_path: str | None = None) -> dict:
    rec = {
        "doc_id": page.doc_id,
        "doc_type": page.doc_type,
        "page_index": page.page_index,
        "page_geometry": geometry_to_record(page.page_geometry),
        "objects": [object_to_record(o) for o in page.objects],
    }
    if source_path is not None:
        rec["source"] = source_path
    return rec


def page_from_record(rec: dict) -> PageFeature:
    return PageFeature(
        doc_id=str(rec["doc_id"]),
        doc_type=str(rec["doc_type"]),
        page_index=int(rec["page_index"]),
        page_geometry=geometry_from_record(rec["page_geometry"]),
        objects=[object_from_record(o) for o in rec["objects"]],
    )


def _dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def save_db(db: FeatureDb, path: str | Path) -> None:
    """Write the database atomically (temp file in the same directory, then rename)."""
    path = Path(path)
    header = {"schema": db.schema_version, "unit": db.unit,
              "created": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_dumps(header) + "\n")
            for doc_id in sorted(db.documents):
                entry = db.documents[doc_id]
                for page in sorted(entry.pages, key=lambda p: p.page_index):
                    fh.write(_dumps(page_to_record(page, entry.source_path)) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_db(path: str | Path) -> FeatureDb:
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    db = FeatureDb()
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno > 1 and not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(lineno, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(rec, dict):
                raise MalformedRecord(lineno, "record is not an object")
            if lineno == 1:
                if "schema" not in rec:
                    raise MalformedRecord(1, "missing header")
                if rec["schema"] != SCHEMA_VERSION:
                    raise SchemaMismatch(f"{path}: schema {rec['schema']!r}, expected {SCHEMA_VERSION}")
                db.unit = rec.get("unit", "cm")
                if db.unit != "cm":
                    raise MalformedRecord(1, f"unsupported unit {db.unit!r}")
                continue
            try:
                page = page_from_record(rec)
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(lineno, f"bad page record: {exc!r}") from exc
            if page.doc_type not in DOC_TYPES:
                raise MalformedRecord(lineno, f"unknown doc_type {page.doc_type!r}")
            entry = db.documents.get(page.doc_id)
            if entry is None:
                entry = db.documents[page.doc_id] = DocumentEntry(str(rec.get("source", "")), page.doc_type)
            elif entry.doc_type != page.doc_type:
                raise MalformedRecord(lineno, f"doc_type changes within document {page.doc_id!r}")
            entry.pages.append(page)
    if not db.documents and path.stat().st_size == 0:
        raise MalformedRecord(1, "empty file")
    return db


def pages_of_type(db: FeatureDb, doc_type: str) -> Iterator[PageFeature]:
    """Pages of documents with ``doc_type``, ordered by (doc_id, page_index)."""
    for doc_id in sorted(db.documents):
        entry = db.documents[doc_id]
        if entry.doc_type != doc_type:
            continue
        yield from sorted(entry.pages, key=lambda p: p.page_index)
