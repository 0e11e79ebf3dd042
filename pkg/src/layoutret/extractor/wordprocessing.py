"""WordprocessingML (DOCX) extraction.

Flowed text has no fixed pages without a layout engine, so each section
(a run of body content closed by a ``w:sectPr``) becomes one page feature.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from xml.etree import ElementTree as ET

from ..container import OpcPackage, main_part, rel_by_id, rels_by_type
from ..errors import ParseFailure
from ..model import Geometry, LayoutObject, PageFeature, PageGeometry, TableProps, TextProps
from ..units import emu_to_cm, quantize, twip_to_cm
from .theme import NS, R_ID, WORD_THEME_SLOTS, Theme, local_name, normalize_hex, parse_theme, q

log = logging.getLogger(__name__)

W_VAL = q("w", "val")
PICTURE_URI = "http://schemas.openxmlformats.org/drawingml/2006/picture"
_SKIP_NOTE_TYPES = {"separator", "continuationSeparator", "continuationNotice"}
_CONTAINERS = {"hyperlink", "smartTag", "ins", "fldSimple", "customXml", "sdtContent", "sdt", "dir", "bdo"}
# Word's fallback column spacing when w:cols carries no w:space (720 twips = 0.5 in).
DEFAULT_COLUMN_SPACE_TWIPS = 720


def _w(el: ET.Element | None, attr: str) -> str | None:
    if el is None:
        return None
    return el.get(q("w", attr))


@dataclass
class _Styles:
    theme: Theme
    by_id: dict[str, ET.Element] = field(default_factory=dict)
    default_para: str | None = None
    doc_defaults: ET.Element | None = None

    def chain(self, style_id: str | None) -> list[ET.Element]:
        """rPr elements of a style and its basedOn ancestors."""
        out: list[ET.Element] = []
        seen: set[str] = set()
        while style_id and style_id not in seen:
            seen.add(style_id)
            style = self.by_id.get(style_id)
            if style is None:
                break
            rpr = style.find("w:rPr", NS)
            if rpr is not None:
                out.append(rpr)
            style_id = _w(style.find("w:basedOn", NS), "val")
        return out


def _load_styles(pkg: OpcPackage, doc_name: str, theme: Theme) -> _Styles:
    styles = _Styles(theme=theme)
    rel = next(iter(rels_by_type(pkg, doc_name, "styles")), None)
    if rel is None:
        return styles
    root = pkg.xml(rel.target)
    for style in root.findall("w:style", NS):
        sid = _w(style, "styleId")
        if sid:
            styles.by_id[sid] = style
            if _w(style, "type") == "paragraph" and _w(style, "default") in ("1", "true"):
                styles.default_para = sid
    styles.doc_defaults = root.find("w:docDefaults/w:rPrDefault/w:rPr", NS)
    return styles


def _color(rpr: ET.Element, theme: Theme) -> tuple[bool, str | None]:
    """(present, rgb) for a w:color child of ``rpr``."""
    el = rpr.find("w:color", NS)
    if el is None:
        return False, None
    hexval = normalize_hex(_w(el, "val"))
    if hexval is not None:
        return True, hexval
    slot = WORD_THEME_SLOTS.get(_w(el, "themeColor") or "")
    return True, theme.colors.get(slot) if slot else None


def _font(rpr: ET.Element, theme: Theme) -> str | None:
    fonts = rpr.find("w:rFonts", NS)
    if fonts is None:
        return None
    theme_ref = _w(fonts, "asciiTheme") or _w(fonts, "hAnsiTheme")
    if theme_ref:
        return theme.major_font if theme_ref.startswith("major") else theme.minor_font
    return _w(fonts, "ascii") or _w(fonts, "hAnsi")


class _RunReader:
    """Resolves effective run properties against the style hierarchy."""

    def __init__(self, styles: _Styles):
        self.styles = styles

    def props(self, run: ET.Element, para_style: str | None) -> tuple[float | None, str | None, str | None]:
        rpr = run.find("w:rPr", NS)
        sources: list[ET.Element] = []
        if rpr is not None:
            sources.append(rpr)
            sources.extend(self.styles.chain(_w(rpr.find("w:rStyle", NS), "val")))
        sources.extend(self.styles.chain(para_style or self.styles.default_para))
        if self.styles.doc_defaults is not None:
            sources.append(self.styles.doc_defaults)
        size = color = font = None
        color_done = False
        theme = self.styles.theme
        for src in sources:
            if size is None:
                sz = _w(src.find("w:sz", NS), "val")
                if sz:
                    size = int(sz) / 2
            if not color_done:
                present, value = _color(src, theme)
                if present:
                    color, color_done = value, True
            if font is None:
                font = _font(src, theme)
        if font is None:
            font = theme.minor_font
        return size, color, font.casefold() if font else None

    def collect(self, el: ET.Element, para_style: str | None, props: TextProps) -> None:
        """Append properties of every text run under ``el`` (a paragraph or container)."""
        for child in el:
            tag = local_name(child.tag)
            if tag == "r":
                if child.find("w:t", NS) is None and child.find("w:tab", NS) is None:
                    continue
                size, color, font = self.props(child, para_style)
                if size is not None:
                    props.font_sizes.append(size)
                if color is not None:
                    props.font_colors.append(color)
                if font is not None:
                    props.font_names.append(font)
            elif tag in _CONTAINERS:
                self.collect(child, para_style, props)

    def paragraph(self, para: ET.Element, props: TextProps) -> None:
        style = _w(para.find("w:pPr/w:pStyle", NS), "val")
        self.collect(para, style, props)

    def block(self, root: ET.Element, props: TextProps, include_tables: bool = True) -> None:
        for el in root:
            tag = local_name(el.tag)
            if tag == "p":
                self.paragraph(el, props)
            elif tag == "tbl" and include_tables:
                for cell in el.iter(q("w", "tc")):
                    self.block(cell, props, include_tables=False)
            elif tag in ("sdt", "sdtContent", "customXml"):
                self.block(el, props, include_tables)


@dataclass
class _Section:
    body: TextProps = field(default_factory=TextProps)
    objects: list[LayoutObject] = field(default_factory=list)
    footnote_ids: list[str] = field(default_factory=list)
    endnote_ids: list[str] = field(default_factory=list)
    sect_pr: ET.Element | None = None


def _page_geometry(sect_pr: ET.Element | None) -> PageGeometry:
    geom = PageGeometry(columns=1, margins={})
    if sect_pr is None:
        return geom
    pg_sz = sect_pr.find("w:pgSz", NS)
    if pg_sz is not None:
        w, h = _w(pg_sz, "w"), _w(pg_sz, "h")
        geom.width = quantize(twip_to_cm(int(w))) if w else None
        geom.height = quantize(twip_to_cm(int(h))) if h else None
    pg_mar = sect_pr.find("w:pgMar", NS)
    if pg_mar is not None:
        for attr, name in (("top", "upper"), ("right", "right"), ("bottom", "lower"), ("left", "left"),
                           ("header", "header"), ("footer", "footer"), ("gutter", "gutter")):
            raw = _w(pg_mar, attr)
            if raw is not None:
                # top/bottom may be negative (text allowed under the header); size is what counts
                geom.margins[name] = quantize(twip_to_cm(abs(int(float(raw)))))
    cols = sect_pr.find("w:cols", NS)
    num = _w(cols, "num")
    geom.columns = int(num) if num else 1
    space = _w(cols, "space")
    geom.margins["column"] = quantize(twip_to_cm(int(float(space)) if space else DEFAULT_COLUMN_SPACE_TWIPS))
    return geom


def _drawing_images(el: ET.Element) -> list[LayoutObject]:
    out = []
    for drawing in el.iter(q("w", "drawing")):
        for frame in drawing:
            if local_name(frame.tag) not in ("inline", "anchor"):
                continue
            data = frame.find("a:graphic/a:graphicData", NS)
            if data is None or data.get("uri") != PICTURE_URI:
                continue
            ext = frame.find("wp:extent", NS)
            if ext is None:
                continue
            out.append(LayoutObject(kind="image", geometry=Geometry(
                width=quantize(emu_to_cm(int(ext.get("cx", 0)))),
                height=quantize(emu_to_cm(int(ext.get("cy", 0)))),
            )))
    return out


def _note_refs(el: ET.Element, section: _Section) -> None:
    for ref in el.iter(q("w", "footnoteReference")):
        rid = _w(ref, "id")
        if rid is not None:
            section.footnote_ids.append(rid)
    for ref in el.iter(q("w", "endnoteReference")):
        rid = _w(ref, "id")
        if rid is not None:
            section.endnote_ids.append(rid)


def _table(tbl: ET.Element, reader: _RunReader) -> list[LayoutObject]:
    """The table plus any nested tables, each as its own object."""
    rows = tbl.findall("w:tr", NS)
    cols = len(tbl.findall("w:tblGrid/w:gridCol", NS))
    if cols == 0 and rows:
        cols = max(len(tr.findall("w:tc", NS)) for tr in rows)
    props = TextProps()
    nested: list[LayoutObject] = []
    for tr in rows:
        for tc in tr.findall("w:tc", NS):
            for el in tc:
                tag = local_name(el.tag)
                if tag == "p":
                    reader.paragraph(el, props)
                elif tag == "tbl":
                    nested.extend(_table(el, reader))
    return [LayoutObject(kind="table", text_props=props, table_props=TableProps(rows=len(rows), cols=cols))] + nested


def _walk_body(body: ET.Element, reader: _RunReader) -> list[_Section]:
    sections = [_Section()]

    def visit(container: ET.Element) -> None:
        for el in container:
            tag = local_name(el.tag)
            cur = sections[-1]
            if tag == "p":
                reader.paragraph(el, cur.body)
                cur.objects.extend(_drawing_images(el))
                _note_refs(el, cur)
                sect = el.find("w:pPr/w:sectPr", NS)
                if sect is not None:
                    cur.sect_pr = sect
                    sections.append(_Section())
            elif tag == "tbl":
                cur.objects.extend(_table(el, reader))
                cur.objects.extend(_drawing_images(el))
                _note_refs(el, cur)
            elif tag in ("sdt", "sdtContent", "customXml"):
                visit(el)
            elif tag == "sectPr":
                cur.sect_pr = el

    visit(body)
    if sections[-1].sect_pr is None and len(sections) > 1 and not sections[-1].objects \
            and not sections[-1].body.font_sizes and not sections[-1].body.font_names:
        sections.pop()
    return sections


def _notes(pkg: OpcPackage, doc_name: str, rel_suffix: str, tag: str, reader: _RunReader) -> dict[str, TextProps]:
    rel = next(iter(rels_by_type(pkg, doc_name, rel_suffix)), None)
    if rel is None:
        return {}
    out = {}
    for note in pkg.xml(rel.target).findall(f"w:{tag}", NS):
        if _w(note, "type") in _SKIP_NOTE_TYPES:
            continue
        props = TextProps()
        reader.block(note, props)
        out[_w(note, "id") or ""] = props
    return out


def extract_wordprocessing(pkg: OpcPackage, doc_id: str, warnings: list[str] | None = None) -> list[PageFeature]:
    doc_name = main_part(pkg)
    if doc_name is None:
        raise ParseFailure(f"{pkg.source_path}: no document part")
    theme_rel = next(iter(rels_by_type(pkg, doc_name, "theme")), None)
    theme = parse_theme(pkg.xml(theme_rel.target) if theme_rel else None)
    reader = _RunReader(_load_styles(pkg, doc_name, theme))
    body = pkg.xml(doc_name).find("w:body", NS)
    if body is None:
        raise ParseFailure(f"{doc_id}: document has no body")

    footnotes = _notes(pkg, doc_name, "footnotes", "footnote", reader)
    endnotes = _notes(pkg, doc_name, "endnotes", "endnote", reader)
    rels = rel_by_id(pkg, doc_name)
    part_cache: dict[str, TextProps] = {}

    def hdr_ftr_props(target: str) -> TextProps:
        if target not in part_cache:
            props = TextProps()
            reader.block(pkg.xml(target), props)
            part_cache[target] = props
        return part_cache[target]

    inherited = {"header": {}, "footer": {}}  # type: dict[str, dict[str, str]]
    pages: list[PageFeature] = []
    for position, sec in enumerate(_walk_body(body, reader), start=1):
        try:
            objects = [LayoutObject(kind="body_text", text_props=sec.body)]
            objects.extend(sec.objects)
            for nid in sec.footnote_ids:
                if nid in footnotes:
                    objects.append(LayoutObject(kind="footnote", text_props=footnotes[nid]))
            for nid in sec.endnote_ids:
                if nid in endnotes:
                    objects.append(LayoutObject(kind="body_text", text_props=endnotes[nid]))
            for kind in ("header", "footer"):
                refs = dict(inherited[kind])
                if sec.sect_pr is not None:
                    for ref in sec.sect_pr.findall(f"w:{kind}Reference", NS):
                        rel = rels.get(ref.get(R_ID, ""))
                        if rel is not None and rel.target in pkg.parts:
                            refs[_w(ref, "type") or "default"] = rel.target
                inherited[kind] = refs
                for target in dict.fromkeys(refs.values()):
                    props = hdr_ftr_props(target)
                    objects.append(LayoutObject(kind=kind, text_props=TextProps(
                        list(props.font_sizes), list(props.font_colors), list(props.font_names))))
            geometry = _page_geometry(sec.sect_pr)
        except (ET.ParseError, KeyError, ValueError) as exc:
            msg = f"{doc_id}: section {position} skipped: {exc}"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
            continue
        pages.append(PageFeature(doc_id=doc_id, doc_type="wordprocessing", page_index=len(pages) + 1,
                                 page_geometry=geometry, objects=objects))
    return pages
