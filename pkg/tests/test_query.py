import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layoutret.errors import EmptyQuery, OutOfBounds, QueryError, QuerySyntaxError, RegistryNotFound, UnitError, UnknownField
from layoutret.query import (
    AM1, AM2, AM3, AM4, EM, PAGE_EXTENT, REGISTRY, ChartValue, QueryItem, RetrievalQuery, kinds_for, parse_chart_type,
    parse_query, query_count, query_to_dict, registry_lookup, serialize_query,
)

# Typed by hand from the method table, plus the three documented additions:
# textbox font_color (moved off the image row), shape width, and cell font size/name split.
PL = ("height", "width", "columns", "column_margin", "upper_margin", "right_margin", "lower_margin", "left_margin",
      "header_margin", "footer_margin", "gutter_margin")
EXPECTED = {
    **{("wordprocessing", "page_geometry", f): AM3 for f in PL},
    **{("wordprocessing", k, f): AM1 for k in ("body_text", "footnote", "header", "footer", "table")
       for f in ("font_size", "font_color", "font_name")},
    ("wordprocessing", "image", "height"): AM3, ("wordprocessing", "image", "width"): AM3,
    ("wordprocessing", "table", "rows"): EM, ("wordprocessing", "table", "cols"): EM,
    ("presentation", "page_geometry", "height"): AM3, ("presentation", "page_geometry", "width"): AM3,
    **{("presentation", k, f): AM4 for k in ("textbox", "image", "table", "shape") for f in ("x", "y")},
    **{("presentation", k, f): AM3 for k in ("textbox", "image", "table", "shape") for f in ("width", "height")},
    ("presentation", "textbox", "font_name"): AM1, ("presentation", "textbox", "font_color"): AM1,
    ("presentation", "table", "rows"): EM, ("presentation", "table", "cols"): EM,
    ("presentation", "table", "font_name"): AM1,
    ("presentation", "shape", "font_color"): AM1, ("presentation", "shape", "shape_type"): EM,
    ("spreadsheet", "page_geometry", "zoom_scale"): AM3,
    **{("spreadsheet", "cell_styles", f): AM1 for f in ("font_size", "font_name", "fill_pattern", "fill_color", "border")},
    ("spreadsheet", "sheet_image", "from_cell"): AM4, ("spreadsheet", "sheet_image", "to_cell"): AM4,
    ("spreadsheet", "chart", "chart_type"): AM2,
    ("spreadsheet", "chart", "from_cell"): AM4, ("spreadsheet", "chart", "to_cell"): AM4,
}

TB_QUERY = {"doc_type": "presentation", "unit": "cm", "items": [
    {"kind": "page_geometry", "fields": {"height": 19.05, "width": 25.4}},
    {"kind": "textbox", "fields": {"x": 1.06, "y": 4.02, "height": 12.90, "width": 23.28}},
]}


def test_registry_matches_method_table():
    rows = {(r.doc_type, r.kind, r.field): r.method for r in REGISTRY}
    assert len(rows) == len(REGISTRY)
    assert rows == EXPECTED


def test_lookup_slide_height():
    spec = registry_lookup("presentation", "page_geometry", "height")
    assert (spec.method, spec.bound_min, spec.bound_max) == (AM3, 2.54, 142.24)


def test_lookup_table_rows():
    assert registry_lookup("presentation", "table", "rows").method == EM
    assert registry_lookup("presentation", "tbl", "row").method == EM


def test_lookup_page_layout_height():
    spec = registry_lookup("wordprocessing", "page_layout", "height")
    assert (spec.method, spec.bound_min, spec.bound_max) == (AM3, 0.0, 55.87)


def test_lookup_page_layout_column_is_count():
    assert registry_lookup("wordprocessing", "PL", "column").field == "columns"
    assert registry_lookup("wordprocessing", "table", "column").field == "cols"


def test_lookup_zoom_bounds():
    spec = registry_lookup("spreadsheet", "zs", "zoom_scale")
    assert (spec.bound_min, spec.bound_max) == (10, 400)


def test_lookup_slide_object_bounds_are_dynamic():
    spec = registry_lookup("presentation", "image", "width")
    assert spec.bound_max == PAGE_EXTENT and spec.axis == "width"


def test_lookup_missing():
    with pytest.raises(RegistryNotFound):
        registry_lookup("spreadsheet", "textbox", "x")
    with pytest.raises(RegistryNotFound):
        registry_lookup("presentation", "image", "font_color")


def test_parse_two_item_query():
    rq = parse_query(TB_QUERY)
    assert query_count(rq) == 2
    assert rq.items[1] == QueryItem("textbox", {"x": 1.06, "y": 4.02, "height": 12.9, "width": 23.28})
    assert rq.threshold == "auto"


def test_parse_from_text_and_file(tmp_path):
    text = json.dumps(TB_QUERY)
    path = tmp_path / "q.json"
    path.write_text(text, encoding="utf-8")
    assert parse_query(text) == parse_query(path) == parse_query(str(path)) == parse_query(TB_QUERY)


def test_inch_conversion():
    rq = parse_query({"doc_type": "pptx", "unit": "inch", "items": [{"kind": "SWH", "fields": {"height": 7.5}}]})
    assert rq.items[0].constraints["height"] == 19.05
    assert rq.unit == "cm"


def test_spreadsheet_textbox_unknown():
    with pytest.raises(UnknownField, match="textbox"):
        parse_query({"doc_type": "spreadsheet", "items": [{"kind": "textbox", "fields": {"x": 1}}]})


def test_unknown_field_names_it():
    with pytest.raises(UnknownField, match="colour"):
        parse_query({"doc_type": "presentation", "items": [{"kind": "shape", "fields": {"colour": "FF0000"}}]})


def test_unknown_doc_type_and_top_key():
    with pytest.raises(UnknownField):
        parse_query({"doc_type": "pdf", "items": [{"kind": "x", "fields": {"y": 1}}]})
    with pytest.raises(UnknownField):
        parse_query({**TB_QUERY, "extra": 1})


def test_syntax_error_position():
    with pytest.raises(QuerySyntaxError) as info:
        parse_query('{"doc_type": "presentation",\n  "items": [}')
    assert info.value.line == 2 and info.value.column == 13


def test_unit_error():
    with pytest.raises(UnitError):
        parse_query({**TB_QUERY, "unit": "px"})


def test_empty_query():
    with pytest.raises(EmptyQuery):
        parse_query({"doc_type": "presentation", "items": []})
    with pytest.raises(EmptyQuery):
        parse_query({"doc_type": "presentation", "items": [{"kind": "textbox", "fields": {}}]})


def test_out_of_bounds():
    with pytest.raises(OutOfBounds):
        parse_query({"doc_type": "presentation", "items": [{"kind": "swh", "fields": {"height": 150}}]})
    with pytest.raises(OutOfBounds):
        parse_query({"doc_type": "spreadsheet", "items": [{"kind": "zs", "fields": {"zoom_scale": 5}}]})
    with pytest.raises(OutOfBounds):
        parse_query({**TB_QUERY, "threshold": 1.5})
    with pytest.raises(OutOfBounds):
        parse_query({"doc_type": "presentation", "items": [{"kind": "tb", "fields": {"x": -1}}]})


def test_duplicate_field_via_alias():
    with pytest.raises(QueryError, match="twice"):
        parse_query({"doc_type": "spreadsheet", "items": [{"kind": "cell", "fields": {"fts": [11], "font_size": [12]}}]})


def test_value_classes():
    rq = parse_query({"doc_type": "docx", "items": [
        {"kind": "TXT", "fields": {"font_size": "12, 11, 12", "font_color": "000000, #0070c0, 000000",
                                  "font_name": "Times New Roman, Arial, Calibri"}},
        {"kind": "PL", "fields": {"column": 2}},
    ]})
    txt = rq.items[0].constraints
    assert txt["font_size"] == (12.0, 11.0, 12.0)
    assert txt["font_color"] == ("000000", "0070C0", "000000")
    assert txt["font_name"] == ("times new roman", "arial", "calibri")
    assert rq.items[1].constraints == {"columns": 2}


def test_spreadsheet_values():
    rq = parse_query({"doc_type": "xlsx", "items": [
        {"kind": "chart", "fields": {"chty": "barChart", "chtf": "R8C9", "chtt": "O21"}},
        {"kind": "cell", "fields": {"fip": "gray0625", "fic": "ffff00"}},
    ]})
    chart = rq.items[0].constraints
    assert chart == {"chart_type": ChartValue("barchart", 2), "from_cell": (8, 9), "to_cell": (21, 15)}
    assert rq.items[1].constraints == {"fill_pattern": ("gray0625",), "fill_color": ("FFFF00",)}


def test_bad_values():
    bad = [
        ("presentation", "shape", {"font_color": "GG0000"}),
        ("presentation", "table", {"rows": 2.5}),
        ("presentation", "swh", {"height": "tall"}),
        ("spreadsheet", "chart", {"from_cell": "R0C1"}),
        ("presentation", "shape", {"shape_type": ""}),
    ]
    for doc_type, kind, fields in bad:
        with pytest.raises(QueryError):
            parse_query({"doc_type": doc_type, "items": [{"kind": kind, "fields": fields}]})


def test_chart_type_parsing():
    assert parse_chart_type("bar3DChart") == ChartValue("barchart", 3)
    assert parse_chart_type("pie") == ChartValue("piechart", 2)


def test_query_count_examples():
    swh = {"kind": "swh", "fields": {"width": 25.4, "height": 19.05}}
    tb = {"kind": "tb", "fields": {"x": 1.0}}
    img = {"kind": "img", "fields": {"width": 2.0}}
    assert query_count(parse_query({"doc_type": "presentation", "items": [swh, tb, tb, tb]})) == 4
    assert query_count(parse_query({"doc_type": "presentation", "items": [tb]})) == 1
    assert query_count(parse_query({"doc_type": "presentation", "items": [swh, tb, tb, img]})) == 4


def test_extra_keys_carried_not_compared():
    rq = parse_query({**TB_QUERY, "group": "G1", "name": "first"})
    assert rq.extra == {"group": "G1", "name": "first"}
    assert rq == parse_query(TB_QUERY)
    assert query_to_dict(rq)["group"] == "G1"


def test_every_kind_is_queryable():
    for doc_type in ("presentation", "wordprocessing", "spreadsheet"):
        for kind in kinds_for(doc_type):
            assert any(r.kind == kind for r in REGISTRY if r.doc_type == doc_type)


# --- properties ------------------------------------------------------------

def _raw_value(draw, spec):
    vc = spec.value_class
    if vc == "length":
        hi = spec.bound_max if isinstance(spec.bound_max, (int, float)) else 60.0
        lo = spec.bound_min or 0.0
        return draw(st.integers(int(lo * 100) + 1, int(hi * 100) - 1)) / 100
    if vc == "integer":
        lo = int(spec.bound_min) if spec.bound_min is not None else 1
        hi = int(spec.bound_max) if isinstance(spec.bound_max, (int, float)) else 50
        return draw(st.integers(lo, hi))
    if vc == "text":
        return draw(st.sampled_from(["rect", "LeftRightArrow", "ellipse"]))
    if vc == "chart":
        return draw(st.sampled_from(["barChart", "bar3DChart", "pieChart", "lineChart"]))
    if vc == "cell_ref":
        return f"R{draw(st.integers(1, 500))}C{draw(st.integers(1, 60))}"
    if vc == "number_list":
        return draw(st.lists(st.integers(2, 80).map(lambda v: v / 2), min_size=1, max_size=4))
    if vc == "hex_list":
        return draw(st.lists(st.text("0123456789abcdefABCDEF", min_size=6, max_size=6), min_size=1, max_size=4))
    return draw(st.lists(st.sampled_from(["Arial", "Calibri", "thin", "double", "solid"]), min_size=1, max_size=4))


@st.composite
def query_dicts(draw):
    doc_type = draw(st.sampled_from(["presentation", "wordprocessing", "spreadsheet"]))
    rows = [r for r in REGISTRY if r.doc_type == doc_type]
    items = []
    for _ in range(draw(st.integers(1, 6))):
        kind = draw(st.sampled_from(sorted({r.kind for r in rows})))
        specs = [r for r in rows if r.kind == kind]
        chosen = draw(st.lists(st.sampled_from(specs), min_size=1, max_size=len(specs), unique=True))
        items.append({"kind": kind, "fields": {s.field: _raw_value(draw, s) for s in chosen}})
    threshold = draw(st.one_of(st.just("auto"), st.integers(0, 100).map(lambda v: v / 100)))
    return {"doc_type": doc_type, "unit": "cm", "threshold": threshold, "items": items}


@settings(max_examples=200, deadline=None)
@given(query_dicts())
def test_parse_serialize_identity(data):
    rq = parse_query(data)
    assert parse_query(serialize_query(rq)) == rq


@settings(max_examples=100, deadline=None)
@given(query_dicts())
def test_cm_conversion_idempotent(data):
    rq = parse_query(data)
    again = parse_query(query_to_dict(rq))
    assert again == rq
    assert query_to_dict(again) == query_to_dict(rq)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 2000).map(lambda v: v / 100))
def test_inch_then_cm_is_stable(inches):
    rq = parse_query({"doc_type": "presentation", "unit": "inch", "items": [{"kind": "tb", "fields": {"width": inches}}]})
    assert rq.items[0].constraints["width"] == round(inches * 2.54, 4)
    assert parse_query(serialize_query(rq)) == rq


def test_serialized_form():
    rq = parse_query({"doc_type": "xlsx", "items": [{"kind": "chart", "fields": {"chty": "bar3DChart", "chtf": "I8"}}]})
    assert json.loads(serialize_query(rq))["items"][0]["fields"] == {"chart_type": "bar3DChart", "from_cell": "R8C9"}


def test_retrieval_query_default_unit():
    assert RetrievalQuery("presentation", []).unit == "cm"
