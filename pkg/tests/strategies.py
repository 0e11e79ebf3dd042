"""Hypothesis strategies for feature records."""

from __future__ import annotations

from hypothesis import strategies as st

from layoutret.model import (
    CellAnchor, CellStyleProps, ChartProps, Geometry, LayoutObject, PageFeature, PageGeometry, TableProps, TextProps,
)
from layoutret.store import FeatureDb

lengths = st.floats(min_value=0, max_value=200, allow_nan=False).map(lambda v: round(v, 4))
hexes = st.text("0123456789ABCDEF", min_size=6, max_size=6)
names = st.text(st.characters(min_codepoint=32, max_codepoint=0x2FF), min_size=1, max_size=12).map(str.casefold)
sizes = st.integers(min_value=2, max_value=400).map(lambda v: v / 2)
cells = st.tuples(st.integers(1, 1000), st.integers(1, 200))

text_props = st.builds(TextProps, st.lists(sizes, max_size=5), st.lists(hexes, max_size=5), st.lists(names, max_size=5))
geometry = st.builds(Geometry, lengths, lengths, lengths, lengths)

slide_object = st.one_of(
    st.builds(LayoutObject, st.just("textbox"), geometry, text_props),
    st.builds(LayoutObject, st.just("image"), geometry),
    st.builds(LayoutObject, st.just("table"), geometry, text_props,
              st.builds(TableProps, st.integers(1, 50), st.integers(1, 30))),
    st.builds(LayoutObject, st.just("shape"), geometry, text_props, shape_type=names),
)
doc_object = st.one_of(
    st.builds(LayoutObject, st.sampled_from(["body_text", "footnote", "header", "footer"]), text_props=text_props),
    st.builds(LayoutObject, st.just("image"), st.builds(Geometry, width=lengths, height=lengths)),
    st.builds(LayoutObject, st.just("table"), text_props=text_props,
              table_props=st.builds(TableProps, st.integers(1, 50), st.integers(1, 30))),
)
sheet_object = st.one_of(
    st.builds(LayoutObject, st.just("cell_styles"), text_props=text_props, cell_style_props=st.builds(
        CellStyleProps, st.lists(names, max_size=4), st.lists(hexes, max_size=4), st.lists(names, max_size=8))),
    st.builds(LayoutObject, st.just("sheet_image"), cell_anchor=st.builds(CellAnchor, cells, cells)),
    st.builds(LayoutObject, st.just("chart"), chart_props=st.builds(ChartProps, names, st.sampled_from([2, 3])),
              cell_anchor=st.builds(CellAnchor, cells, cells)),
)
positive = st.floats(min_value=0.01, max_value=200, allow_nan=False).map(lambda v: round(v, 4))
margins = st.fixed_dictionaries({k: lengths for k in
                                 ("upper", "right", "lower", "left", "header", "footer", "gutter", "column")})

PAGE_PARTS = {
    "presentation": (st.builds(PageGeometry, positive, positive), slide_object),
    "wordprocessing": (st.builds(PageGeometry, positive, positive, st.integers(1, 10), margins), doc_object),
    "spreadsheet": (st.builds(PageGeometry, zoom_scale=st.integers(10, 400), used_rows=st.integers(1, 1000),
                              used_cols=st.integers(1, 200)), sheet_object),
}


@st.composite
def documents(draw, max_pages: int = 5):
    """(doc_type, [PageFeature]) with consecutive page indices."""
    doc_type = draw(st.sampled_from(sorted(PAGE_PARTS)))
    geom, obj = PAGE_PARTS[doc_type]
    n = draw(st.integers(1, max_pages))
    return doc_type, [PageFeature("", doc_type, i + 1, draw(geom), draw(st.lists(obj, max_size=6)))
                      for i in range(n)]


@st.composite
def feature_dbs(draw, min_docs: int = 0, max_docs: int = 6):
    db = FeatureDb()
    for i, (doc_type, pages) in enumerate(draw(st.lists(documents(), min_size=min_docs, max_size=max_docs))):
        doc_id = f"dir/doc{i:03d}"
        for p in pages:
            p.doc_id = doc_id
        db.add(doc_id, f"/corpus/{doc_id}", doc_type, pages)
    return db
