"""PresentationML (PPTX) extraction.

Each slide is read together with its slide layout, slide master and theme.
Geometry of placeholders without their own transform, and run properties not
set on the slide, are inherited along slide -> layout -> master -> theme.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from xml.etree import ElementTree as ET

from ..container import OpcPackage, main_part, rels_by_type, rel_by_id
from ..errors import ParseFailure
from ..model import Geometry, LayoutObject, PageFeature, PageGeometry, TableProps, TextProps
from ..units import emu_to_cm, quantize
from .theme import NS, R_ID, DEFAULT_CLR_MAP, Theme, drawing_color, local_name, parse_theme, q

log = logging.getLogger(__name__)

TABLE_URI = "http://schemas.openxmlformats.org/drawingml/2006/table"

_MASTER_PH_TYPE = {"ctrTitle": "title", "subTitle": "body", "obj": "body", None: "body"}
_TITLE_TYPES = {"title", "ctrTitle"}


@dataclass
class _Transform:
    """Maps child EMU coordinates of a group into slide coordinates."""

    off_x: float = 0.0
    off_y: float = 0.0
    scale_x: float = 1.0
    scale_y: float = 1.0

    def apply(self, x: float, y: float, cx: float, cy: float) -> tuple[float, float, float, float]:
        return (self.off_x + x * self.scale_x, self.off_y + y * self.scale_y,
                cx * self.scale_x, cy * self.scale_y)

    def compose(self, grp_xfrm: ET.Element) -> _Transform:
        off = grp_xfrm.find("a:off", NS)
        ext = grp_xfrm.find("a:ext", NS)
        ch_off = grp_xfrm.find("a:chOff", NS)
        ch_ext = grp_xfrm.find("a:chExt", NS)
        ox, oy = _xy(off)
        cx, cy = _ext(ext)
        chx, chy = _xy(ch_off)
        chcx, chcy = _ext(ch_ext)
        sx = cx / chcx if chcx else 1.0
        sy = cy / chcy if chcy else 1.0
        # child point p maps to ox + (p - chx) * sx within the parent, then through self
        return _Transform(
            off_x=self.off_x + (ox - chx * sx) * self.scale_x,
            off_y=self.off_y + (oy - chy * sy) * self.scale_y,
            scale_x=self.scale_x * sx,
            scale_y=self.scale_y * sy,
        )


def _xy(el: ET.Element | None) -> tuple[float, float]:
    if el is None:
        return 0.0, 0.0
    return float(el.get("x", 0)), float(el.get("y", 0))


def _ext(el: ET.Element | None) -> tuple[float, float]:
    if el is None:
        return 0.0, 0.0
    return float(el.get("cx", 0)), float(el.get("cy", 0))


@dataclass
class _Placeholder:
    type: str | None
    idx: str | None


@dataclass
class _Context:
    """Inheritance sources available while reading one slide."""

    theme: Theme
    clr_map: dict[str, str]
    layout_tree: ET.Element | None
    master_tree: ET.Element | None
    master: ET.Element | None
    default_text_style: ET.Element | None
    warnings: list[str] = field(default_factory=list)


def _placeholder(el: ET.Element) -> _Placeholder | None:
    for nv in el:
        if not local_name(nv.tag).startswith("nv"):
            continue
        ph = nv.find("p:nvPr/p:ph", NS)
        if ph is not None:
            return _Placeholder(ph.get("type"), ph.get("idx"))
    return None


def _ph_family(ph_type: str | None) -> str:
    return _MASTER_PH_TYPE.get(ph_type, ph_type)  # type: ignore[arg-type]


def _find_placeholder(tree: ET.Element | None, ph: _Placeholder, use_idx: bool) -> ET.Element | None:
    if tree is None:
        return None
    candidates = []
    for el in tree.iter():
        if local_name(el.tag) in ("sp", "pic", "graphicFrame"):
            p = _placeholder(el)
            if p is not None:
                candidates.append((el, p))
    if use_idx and ph.idx is not None:
        for el, p in candidates:
            if p.idx == ph.idx:
                return el
    want = _ph_family(ph.type)
    for el, p in candidates:
        if _ph_family(p.type) == want:
            return el
    return None


def _inherited(el: ET.Element, ctx: _Context) -> list[ET.Element]:
    """Layout then master placeholder elements that ``el`` inherits from."""
    ph = _placeholder(el)
    if ph is None:
        return []
    chain: list[ET.Element] = []
    layout_ph = _find_placeholder(ctx.layout_tree, ph, use_idx=True)
    if layout_ph is not None:
        chain.append(layout_ph)
        ph_for_master = _placeholder(layout_ph) or ph
    else:
        ph_for_master = ph
    master_ph = _find_placeholder(ctx.master_tree, ph_for_master, use_idx=False)
    if master_ph is not None:
        chain.append(master_ph)
    return chain


def _own_xfrm(el: ET.Element) -> ET.Element | None:
    if local_name(el.tag) == "graphicFrame":
        return el.find("p:xfrm", NS)
    return el.find("p:spPr/a:xfrm", NS)


def _geometry(el: ET.Element, ctx: _Context, tf: _Transform) -> Geometry | None:
    xfrm = _own_xfrm(el)
    if xfrm is None or xfrm.find("a:off", NS) is None:
        for parent in _inherited(el, ctx):
            xfrm = _own_xfrm(parent)
            if xfrm is not None and xfrm.find("a:off", NS) is not None:
                break
        else:
            return None
    x, y = _xy(xfrm.find("a:off", NS))
    cx, cy = _ext(xfrm.find("a:ext", NS))
    x, y, cx, cy = tf.apply(x, y, cx, cy)
    vals = [quantize(emu_to_cm(v)) for v in (x, y, abs(cx), abs(cy))]
    return Geometry(x=vals[0], y=vals[1], width=vals[2], height=vals[3])


# --- text properties -------------------------------------------------------

def _lvl_defrpr(style: ET.Element | None, level: int) -> ET.Element | None:
    if style is None:
        return None
    el = style.find(f"a:lvl{level + 1}pPr/a:defRPr", NS)
    if el is None:
        el = style.find("a:defPPr/a:defRPr", NS)
    return el


def _master_style(ctx: _Context, ph: _Placeholder | None) -> ET.Element | None:
    if ctx.master is None:
        return None
    if ph is None:
        return ctx.master.find("p:txStyles/p:otherStyle", NS)
    if ph.type in _TITLE_TYPES:
        return ctx.master.find("p:txStyles/p:titleStyle", NS)
    if ph.type in (None, "body", "obj", "subTitle"):
        return ctx.master.find("p:txStyles/p:bodyStyle", NS)
    return ctx.master.find("p:txStyles/p:otherStyle", NS)


def _style_sources(el: ET.Element, ctx: _Context, level: int) -> list[ET.Element]:
    """Run-property sources below the paragraph, highest priority first."""
    sources: list[ET.Element | None] = [_lvl_defrpr(el.find("p:txBody/a:lstStyle", NS), level)]
    font_ref = el.find("p:style/a:fontRef", NS)
    if font_ref is not None:
        sources.append(font_ref)
    for parent in _inherited(el, ctx):
        sources.append(_lvl_defrpr(parent.find("p:txBody/a:lstStyle", NS), level))
    ph = _placeholder(el)
    sources.append(_lvl_defrpr(_master_style(ctx, ph), level))
    if ph is None:
        sources.append(_lvl_defrpr(ctx.default_text_style, level))
    return [s for s in sources if s is not None]


def _props_from(src: ET.Element, ctx: _Context) -> tuple[float | None, str | None, str | None, bool]:
    """(size_pt, color, font, color_explicit) carried by one source element."""
    if local_name(src.tag) == "fontRef":
        idx = src.get("idx")
        font = "+mj-lt" if idx == "major" else "+mn-lt" if idx == "minor" else None
        color = drawing_color(src, ctx.theme, ctx.clr_map)
        has_color = len(src) > 0
        return None, color, font, has_color
    size = float(src.get("sz")) / 100 if src.get("sz") else None
    fill = src.find("a:solidFill", NS)
    color = drawing_color(fill, ctx.theme, ctx.clr_map) if fill is not None else None
    latin = src.find("a:latin", NS)
    font = latin.get("typeface") if latin is not None else None
    return size, color, font, fill is not None


def _run_props(run_rpr: ET.Element | None, chain: list[ET.Element], ctx: _Context) -> tuple[float | None, str | None, str | None]:
    size = color = font = None
    color_done = False
    for src in ([run_rpr] if run_rpr is not None else []) + chain:
        s, c, f, explicit = _props_from(src, ctx)
        if size is None and s is not None:
            size = s
        if not color_done and explicit:
            color, color_done = c, True
        if font is None and f:
            font = f
    font = ctx.theme.resolve_font(font) if font else ctx.theme.minor_font
    return size, color, font.casefold() if font else None


def _text_props(tx_body: ET.Element | None, base_chain, ctx: _Context) -> TextProps:
    props = TextProps()
    if tx_body is None:
        return props
    for para in tx_body.findall("a:p", NS):
        ppr = para.find("a:pPr", NS)
        level = int(ppr.get("lvl", 0)) if ppr is not None else 0
        chain = list(base_chain(level))
        para_def = ppr.find("a:defRPr", NS) if ppr is not None else None
        if para_def is not None:
            chain.insert(0, para_def)
        for run in para:
            if local_name(run.tag) not in ("r", "fld"):
                continue
            size, color, font = _run_props(run.find("a:rPr", NS), chain, ctx)
            if size is not None:
                props.font_sizes.append(size)
            if color is not None:
                props.font_colors.append(color)
            if font is not None:
                props.font_names.append(font)
    return props


def _table_text_props(tbl: ET.Element, ctx: _Context) -> TextProps:
    props = TextProps()

    def chain(level: int) -> list[ET.Element]:
        srcs = [_lvl_defrpr(_master_style(ctx, None), level), _lvl_defrpr(ctx.default_text_style, level)]
        return [s for s in srcs if s is not None]

    for tc in tbl.iter(q("a", "tc")):
        body = tc.find("a:txBody", NS)
        if body is None:
            continue
        cell_style = body.find("a:lstStyle", NS)

        def cell_chain(level: int, _cs=cell_style) -> list[ET.Element]:
            own = _lvl_defrpr(_cs, level)
            return ([own] if own is not None else []) + chain(level)

        props.extend(_text_props(body, cell_chain, ctx))
    return props


# --- shape tree walk -------------------------------------------------------

def _is_textbox(sp: ET.Element) -> bool:
    c_nv = sp.find("p:nvSpPr/p:cNvSpPr", NS)
    if c_nv is not None and c_nv.get("txBox") in ("1", "true"):
        return True
    return _placeholder(sp) is not None


def _shape_type(sp: ET.Element) -> str:
    prst = sp.find("p:spPr/a:prstGeom", NS)
    if prst is not None and prst.get("prst"):
        return prst.get("prst").casefold()
    if sp.find("p:spPr/a:custGeom", NS) is not None:
        return "custom"
    return "rect"


def _walk(tree: ET.Element, ctx: _Context, tf: _Transform, out: list[LayoutObject]) -> None:
    for el in tree:
        tag = local_name(el.tag)
        if tag == "grpSp":
            xfrm = el.find("p:grpSpPr/a:xfrm", NS)
            _walk(el, ctx, tf.compose(xfrm) if xfrm is not None else tf, out)
        elif tag == "sp":
            geom = _geometry(el, ctx, tf)
            text = _text_props(el.find("p:txBody", NS), lambda lvl, _el=el: _style_sources(_el, ctx, lvl), ctx)
            if _is_textbox(el):
                out.append(LayoutObject(kind="textbox", geometry=geom, text_props=text))
            else:
                out.append(LayoutObject(kind="shape", geometry=geom, text_props=text, shape_type=_shape_type(el)))
        elif tag == "cxnSp":
            prst = el.find("p:spPr/a:prstGeom", NS)
            shape_type = (prst.get("prst") or "line").casefold() if prst is not None else "line"
            out.append(LayoutObject(kind="shape", geometry=_geometry(el, ctx, tf),
                                    text_props=TextProps(), shape_type=shape_type))
        elif tag == "pic":
            out.append(LayoutObject(kind="image", geometry=_geometry(el, ctx, tf)))
        elif tag == "graphicFrame":
            data = el.find("a:graphic/a:graphicData", NS)
            if data is None or data.get("uri") != TABLE_URI:
                continue  # charts, diagrams and OLE objects are not extracted
            tbl = data.find("a:tbl", NS)
            if tbl is None:
                continue
            rows = len(tbl.findall("a:tr", NS))
            cols = len(tbl.findall("a:tblGrid/a:gridCol", NS))
            if cols == 0 and rows:
                cols = max(len(tr.findall("a:tc", NS)) for tr in tbl.findall("a:tr", NS))
            out.append(LayoutObject(kind="table", geometry=_geometry(el, ctx, tf),
                                    text_props=_table_text_props(tbl, ctx),
                                    table_props=TableProps(rows=rows, cols=cols)))
        elif tag == "AlternateContent":
            choice = next((c for c in el if local_name(c.tag) in ("Choice", "Fallback")), None)
            if choice is not None:
                _walk(choice, ctx, tf, out)


def _clr_map(el: ET.Element | None) -> dict[str, str] | None:
    if el is None:
        return None
    return {k: v for k, v in el.attrib.items()}


def _slide_context(pkg: OpcPackage, slide_name: str, default_text_style, cache: dict) -> _Context:
    layout_name = next((r.target for r in rels_by_type(pkg, slide_name, "slideLayout")), None)
    layout = pkg.xml(layout_name) if layout_name else None
    master_name = next((r.target for r in rels_by_type(pkg, layout_name, "slideMaster")), None) if layout_name else None
    master = pkg.xml(master_name) if master_name else None
    theme_name = next((r.target for r in rels_by_type(pkg, master_name, "theme")), None) if master_name else None
    if theme_name not in cache:
        cache[theme_name] = parse_theme(pkg.xml(theme_name) if theme_name else None)
    clr_map = dict(DEFAULT_CLR_MAP)
    if master is not None:
        clr_map.update(_clr_map(master.find("p:clrMap", NS)) or {})
    return _Context(
        theme=cache[theme_name],
        clr_map=clr_map,
        layout_tree=layout.find("p:cSld/p:spTree", NS) if layout is not None else None,
        master_tree=master.find("p:cSld/p:spTree", NS) if master is not None else None,
        master=master,
        default_text_style=default_text_style,
    )


def extract_presentation(pkg: OpcPackage, doc_id: str, warnings: list[str] | None = None) -> list[PageFeature]:
    pres_name = main_part(pkg)
    if pres_name is None:
        raise ParseFailure(f"{pkg.source_path}: no presentation part")
    pres = pkg.xml(pres_name)
    sld_sz = pres.find("p:sldSz", NS)
    width = height = None
    if sld_sz is not None:
        width = quantize(emu_to_cm(int(sld_sz.get("cx", 0)))) or None
        height = quantize(emu_to_cm(int(sld_sz.get("cy", 0)))) or None
    default_text_style = pres.find("p:defaultTextStyle", NS)
    rels = rel_by_id(pkg, pres_name)

    pages: list[PageFeature] = []
    theme_cache: dict = {}
    for position, sld_id in enumerate(pres.findall("p:sldIdLst/p:sldId", NS), start=1):
        rel = rels.get(sld_id.get(R_ID, ""))
        try:
            if rel is None or rel.target not in pkg.parts:
                raise ParseFailure(f"slide {position}: relationship {sld_id.get(R_ID)!r} unresolved")
            slide = pkg.xml(rel.target)
            ctx = _slide_context(pkg, rel.target, default_text_style, theme_cache)
            override = slide.find("p:clrMapOvr/a:overrideClrMapping", NS)
            if override is not None:
                ctx.clr_map.update(_clr_map(override) or {})
            tree = slide.find("p:cSld/p:spTree", NS)
            objects: list[LayoutObject] = []
            if tree is not None:
                _walk(tree, ctx, _Transform(), objects)
        except (ET.ParseError, ParseFailure, KeyError, ValueError) as exc:
            msg = f"{doc_id}: slide {position} skipped: {exc}"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
            continue
        pages.append(PageFeature(
            doc_id=doc_id,
            doc_type="presentation",
            page_index=len(pages) + 1,
            page_geometry=PageGeometry(width=width, height=height),
            objects=objects,
        ))
    return pages
