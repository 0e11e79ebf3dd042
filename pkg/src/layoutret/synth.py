"""Writers for small but well-formed PPTX/DOCX/XLSX packages.

Used for test fixtures, generated corpora and the planted-family retrieval
experiment. Sizes are given in centimeters and font sizes in points; the
writers convert to the raw OOXML storage units.
"""

from __future__ import annotations

import base64
import posixpath
import random
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

from .units import cm_to_emu, cm_to_twip

RT = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
NS_A = "http://schemas.openxmlformats.org/drawingml/2006/main"
NS_P = "http://schemas.openxmlformats.org/presentationml/2006/main"
NS_W = "http://schemas.openxmlformats.org/wordprocessingml/2006/main"
NS_S = "http://schemas.openxmlformats.org/spreadsheetml/2006/main"
NS_XDR = "http://schemas.openxmlformats.org/drawingml/2006/spreadsheetDrawing"
NS_C = "http://schemas.openxmlformats.org/drawingml/2006/chart"
NS_WP = "http://schemas.openxmlformats.org/drawingml/2006/wordprocessingDrawing"
NS_PIC = "http://schemas.openxmlformats.org/drawingml/2006/picture"

CT_PRES = "application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml"
CT_SLIDE = "application/vnd.openxmlformats-officedocument.presentationml.slide+xml"
CT_LAYOUT = "application/vnd.openxmlformats-officedocument.presentationml.slideLayout+xml"
CT_MASTER = "application/vnd.openxmlformats-officedocument.presentationml.slideMaster+xml"
CT_THEME = "application/vnd.openxmlformats-officedocument.theme+xml"
CT_DOC = "application/vnd.openxmlformats-officedocument.wordprocessingml.document.main+xml"
CT_STYLES_W = "application/vnd.openxmlformats-officedocument.wordprocessingml.styles+xml"
CT_SETTINGS_W = "application/vnd.openxmlformats-officedocument.wordprocessingml.settings+xml"
CT_FOOTNOTES = "application/vnd.openxmlformats-officedocument.wordprocessingml.footnotes+xml"
CT_ENDNOTES = "application/vnd.openxmlformats-officedocument.wordprocessingml.endnotes+xml"
CT_HEADER = "application/vnd.openxmlformats-officedocument.wordprocessingml.header+xml"
CT_FOOTER = "application/vnd.openxmlformats-officedocument.wordprocessingml.footer+xml"
CT_WORKBOOK = "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"
CT_SHEET = "application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"
CT_STYLES_S = "application/vnd.openxmlformats-officedocument.spreadsheetml.styles+xml"
CT_DRAWING = "application/vnd.openxmlformats-officedocument.drawing+xml"
CT_CHART = "application/vnd.openxmlformats-officedocument.drawingml.chart+xml"

# 1x1 transparent PNG
PNG_1PX = base64.b64decode(
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mNkYPhfDwAChwGA60e6kgAAAABJRU5ErkJggg=="
)

XML_DECL = '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'


# --- generic package writer ------------------------------------------------

class PackageWriter:
    """Collects parts, content-type overrides and relationships, then zips them."""

    def __init__(self) -> None:
        self.parts: dict[str, bytes] = {}
        self.overrides: dict[str, str] = {}
        self.rels: dict[str, list[tuple[str, str, str, str]]] = {}

    def add(self, name: str, data: str | bytes, content_type: str | None = None) -> None:
        self.parts[name] = data.encode("utf-8") if isinstance(data, str) else data
        if content_type:
            self.overrides[name] = content_type

    def relate(self, source: str, rel_type: str, target: str, mode: str = "Internal") -> str:
        """Add a relationship from ``source`` ('' = package); returns its id."""
        rels = self.rels.setdefault(source, [])
        rid = f"rId{len(rels) + 1}"
        if mode == "Internal":
            base = posixpath.dirname(source)
            target = posixpath.relpath(target, base) if base else target
        rels.append((rid, rel_type, target, mode))
        return rid

    def _rels_name(self, source: str) -> str:
        if not source:
            return "_rels/.rels"
        folder, base = posixpath.split(source)
        return posixpath.join(folder, "_rels", base + ".rels")

    def content_types_xml(self) -> str:
        lines = [XML_DECL, '<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">',
                 '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>',
                 '<Default Extension="xml" ContentType="application/xml"/>',
                 '<Default Extension="png" ContentType="image/png"/>']
        for name, ctype in sorted(self.overrides.items()):
            lines.append(f'<Override PartName="/{name}" ContentType="{ctype}"/>')
        lines.append("</Types>")
        return "".join(lines)

    def write(self, path: str | Path, content_types: bool = True) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
            if content_types:
                zf.writestr("[Content_Types].xml", self.content_types_xml())
            for source, rels in self.rels.items():
                body = "".join(
                    f'<Relationship Id="{rid}" Type="{rtype}" Target={quoteattr(target)}'
                    + (' TargetMode="External"' if mode == "External" else "") + "/>"
                    for rid, rtype, target, mode in rels
                )
                zf.writestr(self._rels_name(source), XML_DECL + (
                    '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
                    f"{body}</Relationships>"))
            for name, data in self.parts.items():
                zf.writestr(name, data)
        return path


def theme_xml(major_font: str = "Calibri Light", minor_font: str = "Calibri",
              colors: dict[str, str] | None = None) -> str:
    palette = {
        "dk1": "000000", "lt1": "FFFFFF", "dk2": "44546A", "lt2": "E7E6E6",
        "accent1": "4472C4", "accent2": "ED7D31", "accent3": "A5A5A5", "accent4": "FFC000",
        "accent5": "5B9BD5", "accent6": "70AD47", "hlink": "0563C1", "folHlink": "954F72",
    }
    palette.update(colors or {})
    slots = "".join(
        f'<a:{k}><a:sysClr val="{"windowText" if k == "dk1" else "window"}" lastClr="{v}"/></a:{k}>'
        if k in ("dk1", "lt1") else f'<a:{k}><a:srgbClr val="{v}"/></a:{k}>'
        for k, v in palette.items()
    )
    return (XML_DECL + f'<a:theme xmlns:a="{NS_A}" name="Synthetic"><a:themeElements>'
            f'<a:clrScheme name="Synthetic">{slots}</a:clrScheme>'
            f'<a:fontScheme name="Synthetic"><a:majorFont><a:latin typeface={quoteattr(major_font)}/>'
            '<a:ea typeface=""/><a:cs typeface=""/></a:majorFont>'
            f'<a:minorFont><a:latin typeface={quoteattr(minor_font)}/><a:ea typeface=""/><a:cs typeface=""/>'
            '</a:minorFont></a:fontScheme>'
            '<a:fmtScheme name="Synthetic"><a:fillStyleLst><a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
            '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill><a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
            '</a:fillStyleLst><a:lnStyleLst><a:ln w="6350"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln>'
            '<a:ln w="12700"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln>'
            '<a:ln w="19050"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln></a:lnStyleLst>'
            '<a:effectStyleLst><a:effectStyle><a:effectLst/></a:effectStyle><a:effectStyle><a:effectLst/></a:effectStyle>'
            '<a:effectStyle><a:effectLst/></a:effectStyle></a:effectStyleLst>'
            '<a:bgFillStyleLst><a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
            '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill><a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
            '</a:bgFillStyleLst></a:fmtScheme></a:themeElements></a:theme>')


# --- presentation ----------------------------------------------------------

@dataclass
class Run:
    text: str = "text"
    size: float | None = None          # points
    color: str | None = None           # RGB hex
    font: str | None = None
    scheme_color: str | None = None    # e.g. "accent1", "tx1"


@dataclass
class SlideItem:
    """One object on a slide; kind is textbox, shape, image, table, placeholder or group."""

    kind: str
    x: float = 0.0
    y: float = 0.0
    width: float = 1.0
    height: float = 1.0
    runs: list[Run] = field(default_factory=list)
    rows: int = 0
    cols: int = 0
    shape_type: str = "rect"
    ph_type: str | None = None         # placeholder type (title, body, ...) for kind="placeholder"
    ph_idx: int | None = None
    inherit_geometry: bool = False     # placeholder without its own xfrm
    children: list[SlideItem] = field(default_factory=list)
    child_offset: tuple[float, float] = (0.0, 0.0)
    child_extent: tuple[float, float] | None = None


def _rpr(run: Run, tag: str = "a:rPr") -> str:
    attrs = ' lang="en-US"'
    if run.size is not None:
        attrs += f' sz="{round(run.size * 100)}"'
    inner = ""
    if run.color:
        inner += f'<a:solidFill><a:srgbClr val="{run.color}"/></a:solidFill>'
    elif run.scheme_color:
        inner += f'<a:solidFill><a:schemeClr val="{run.scheme_color}"/></a:solidFill>'
    if run.font:
        inner += f"<a:latin typeface={quoteattr(run.font)}/>"
    return f"<{tag}{attrs}>{inner}</{tag}>" if inner else f"<{tag}{attrs}/>"


def _paragraphs(runs: list[Run]) -> str:
    if not runs:
        return '<a:p><a:endParaRPr lang="en-US"/></a:p>'
    return "".join(f"<a:p><a:r>{_rpr(r)}<a:t>{escape(r.text)}</a:t></a:r></a:p>" for r in runs)


def _xfrm(item: SlideItem, tag: str = "a:xfrm") -> str:
    return (f'<{tag}><a:off x="{cm_to_emu(item.x)}" y="{cm_to_emu(item.y)}"/>'
            f'<a:ext cx="{cm_to_emu(item.width)}" cy="{cm_to_emu(item.height)}"/></{tag}>')


class _IdCounter:
    def __init__(self) -> None:
        self.n = 1

    def __call__(self) -> int:
        self.n += 1
        return self.n


def slide_item_xml(item: SlideItem, ids: _IdCounter, image_rid: str | None = None) -> str:
    sid = ids()
    if item.kind in ("textbox", "shape", "placeholder"):
        if item.kind == "placeholder":
            ph_attrs = (f' type="{item.ph_type}"' if item.ph_type else "") + \
                       (f' idx="{item.ph_idx}"' if item.ph_idx is not None else "")
            nv = f'<p:nvSpPr><p:cNvPr id="{sid}" name="Placeholder {sid}"/><p:cNvSpPr><a:spLocks noGrp="1"/></p:cNvSpPr><p:nvPr><p:ph{ph_attrs}/></p:nvPr></p:nvSpPr>'
        else:
            tx = ' txBox="1"' if item.kind == "textbox" else ""
            nv = f'<p:nvSpPr><p:cNvPr id="{sid}" name="{item.kind} {sid}"/><p:cNvSpPr{tx}/><p:nvPr/></p:nvSpPr>'
        geom = "" if item.inherit_geometry else _xfrm(item)
        prst = "" if item.kind == "placeholder" else f'<a:prstGeom prst="{item.shape_type}"><a:avLst/></a:prstGeom>'
        return (f"<p:sp>{nv}<p:spPr>{geom}{prst}</p:spPr>"
                f'<p:txBody><a:bodyPr/><a:lstStyle/>{_paragraphs(item.runs)}</p:txBody></p:sp>')
    if item.kind == "image":
        return (f'<p:pic><p:nvPicPr><p:cNvPr id="{sid}" name="Picture {sid}"/><p:cNvPicPr/><p:nvPr/></p:nvPicPr>'
                f'<p:blipFill><a:blip r:embed="{image_rid}"/><a:stretch><a:fillRect/></a:stretch></p:blipFill>'
                f'<p:spPr>{_xfrm(item)}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr></p:pic>')
    if item.kind == "table":
        col_w = cm_to_emu(item.width / max(item.cols, 1))
        row_h = cm_to_emu(item.height / max(item.rows, 1))
        grid = "".join(f'<a:gridCol w="{col_w}"/>' for _ in range(item.cols))
        runs = iter(item.runs)
        rows = ""
        for _ in range(item.rows):
            cells = ""
            for _ in range(item.cols):
                run = next(runs, None)
                para = (f"<a:p><a:r>{_rpr(run)}<a:t>{escape(run.text)}</a:t></a:r></a:p>" if run
                        else '<a:p><a:endParaRPr lang="en-US"/></a:p>')
                cells += f"<a:tc><a:txBody><a:bodyPr/><a:lstStyle/>{para}</a:txBody><a:tcPr/></a:tc>"
            rows += f'<a:tr h="{row_h}">{cells}</a:tr>'
        return (f'<p:graphicFrame><p:nvGraphicFramePr><p:cNvPr id="{sid}" name="Table {sid}"/>'
                f'<p:cNvGraphicFramePr><a:graphicFrameLocks noGrp="1"/></p:cNvGraphicFramePr><p:nvPr/></p:nvGraphicFramePr>'
                f'{_xfrm(item, "p:xfrm")}<a:graphic><a:graphicData uri="http://schemas.openxmlformats.org/drawingml/2006/table">'
                f'<a:tbl><a:tblPr firstRow="1" bandRow="1"/><a:tblGrid>{grid}</a:tblGrid>{rows}</a:tbl>'
                f"</a:graphicData></a:graphic></p:graphicFrame>")
    if item.kind == "group":
        ext = item.child_extent or (item.width, item.height)
        xfrm = (f'<a:xfrm><a:off x="{cm_to_emu(item.x)}" y="{cm_to_emu(item.y)}"/>'
                f'<a:ext cx="{cm_to_emu(item.width)}" cy="{cm_to_emu(item.height)}"/>'
                f'<a:chOff x="{cm_to_emu(item.child_offset[0])}" y="{cm_to_emu(item.child_offset[1])}"/>'
                f'<a:chExt cx="{cm_to_emu(ext[0])}" cy="{cm_to_emu(ext[1])}"/></a:xfrm>')
        inner = "".join(slide_item_xml(c, ids, image_rid) for c in item.children)
        return (f'<p:grpSp><p:nvGrpSpPr><p:cNvPr id="{sid}" name="Group {sid}"/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
                f"<p:grpSpPr>{xfrm}</p:grpSpPr>{inner}</p:grpSp>")
    raise ValueError(f"unknown slide item kind {item.kind!r}")


def _sp_tree(body: str) -> str:
    return ('<p:cSld><p:spTree><p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
            '<p:grpSpPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="0" cy="0"/><a:chOff x="0" y="0"/>'
            f'<a:chExt cx="0" cy="0"/></a:xfrm></p:grpSpPr>{body}</p:spTree></p:cSld>')


def _level_style(size: float, color_scheme: str, font: str) -> str:
    return (f'<a:lvl1pPr><a:defRPr sz="{round(size * 100)}"><a:solidFill><a:schemeClr val="{color_scheme}"/></a:solidFill>'
            f'<a:latin typeface="{font}"/></a:defRPr></a:lvl1pPr>')


@dataclass
class MasterStyle:
    title_size: float = 44.0
    body_size: float = 28.0
    other_size: float = 18.0
    title_color: str = "tx1"
    body_color: str = "tx1"
    # placeholder boxes on the master (x, y, w, h in cm)
    title_box: tuple[float, float, float, float] = (1.75, 1.0, 21.9, 3.2)
    body_box: tuple[float, float, float, float] = (1.75, 4.7, 21.9, 12.4)
    # layout-level overrides for the body placeholder (None = inherit master box)
    layout_body_box: tuple[float, float, float, float] | None = None
    layout_body_size: float | None = None


def write_pptx(path: str | Path, slides: list[list[SlideItem]], width: float = 25.4, height: float = 19.05,
               master: MasterStyle | None = None, major_font: str = "Calibri Light",
               minor_font: str = "Calibri", theme_colors: dict[str, str] | None = None) -> Path:
    master = master or MasterStyle()
    pkg = PackageWriter()
    pres = "ppt/presentation.xml"
    master_name = "ppt/slideMasters/slideMaster1.xml"
    layout_name = "ppt/slideLayouts/slideLayout1.xml"
    theme_name = "ppt/theme/theme1.xml"
    pkg.relate("", f"{RT}/officeDocument", pres)
    master_rid = pkg.relate(pres, f"{RT}/slideMaster", master_name)
    pkg.relate(master_name, f"{RT}/slideLayout", layout_name)
    pkg.relate(master_name, f"{RT}/theme", theme_name)
    pkg.relate(layout_name, f"{RT}/slideMaster", master_name)
    pkg.add(theme_name, theme_xml(major_font, minor_font, theme_colors), CT_THEME)

    ns = f'xmlns:a="{NS_A}" xmlns:r="{RT}" xmlns:p="{NS_P}"'

    def box(kind: str, ph: str, idx: int | None, b: tuple[float, float, float, float] | None) -> str:
        if b is None:
            item = SlideItem("placeholder", ph_type=ph, ph_idx=idx, inherit_geometry=True)
        else:
            item = SlideItem("placeholder", *b, ph_type=ph, ph_idx=idx)
        return slide_item_xml(item, _IdCounter())

    m_tree = box("placeholder", "title", None, master.title_box) + box("placeholder", "body", 1, master.body_box)
    tx_styles = (f'<p:txStyles><p:titleStyle>{_level_style(master.title_size, master.title_color, "+mj-lt")}</p:titleStyle>'
                 f'<p:bodyStyle>{_level_style(master.body_size, master.body_color, "+mn-lt")}</p:bodyStyle>'
                 f'<p:otherStyle>{_level_style(master.other_size, "tx1", "+mn-lt")}</p:otherStyle></p:txStyles>')
    pkg.add(master_name, XML_DECL + f"<p:sldMaster {ns}>{_sp_tree(m_tree)}"
            '<p:clrMap bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2" accent1="accent1" accent2="accent2" accent3="accent3" '
            'accent4="accent4" accent5="accent5" accent6="accent6" hlink="hlink" folHlink="folHlink"/>'
            f'<p:sldLayoutIdLst><p:sldLayoutId id="2147483649" r:id="rId1"/></p:sldLayoutIdLst>{tx_styles}</p:sldMaster>',
            CT_MASTER)

    layout_body = box("placeholder", "body", 1, master.layout_body_box)
    if master.layout_body_size is not None:
        layout_body = layout_body.replace(
            "<a:lstStyle/>",
            f'<a:lstStyle><a:lvl1pPr><a:defRPr sz="{round(master.layout_body_size * 100)}"/></a:lvl1pPr></a:lstStyle>', 1)
    l_tree = box("placeholder", "title", None, None) + layout_body
    pkg.add(layout_name, XML_DECL + f'<p:sldLayout {ns} type="obj">{_sp_tree(l_tree)}'
            '<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sldLayout>', CT_LAYOUT)

    sld_ids = ""
    image_n = 0
    for n, items in enumerate(slides, start=1):
        slide_name = f"ppt/slides/slide{n}.xml"
        rid = pkg.relate(pres, f"{RT}/slide", slide_name)
        sld_ids += f'<p:sldId id="{255 + n}" r:id="{rid}"/>'
        pkg.relate(slide_name, f"{RT}/slideLayout", layout_name)
        image_rid = None
        if _needs_image(items):
            image_n += 1
            media = f"ppt/media/image{image_n}.png"
            pkg.add(media, PNG_1PX)
            image_rid = pkg.relate(slide_name, f"{RT}/image", media)
        ids = _IdCounter()
        body = "".join(slide_item_xml(it, ids, image_rid) for it in items)
        pkg.add(slide_name, XML_DECL + f"<p:sld {ns}>{_sp_tree(body)}"
                "<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sld>", CT_SLIDE)

    pkg.relate(pres, f"{RT}/theme", theme_name)
    default_style = '<p:defaultTextStyle><a:lvl1pPr><a:defRPr sz="1800"/></a:lvl1pPr></p:defaultTextStyle>'
    pkg.add(pres, XML_DECL + f"<p:presentation {ns}>"
            f'<p:sldMasterIdLst><p:sldMasterId id="2147483648" r:id="{master_rid}"/></p:sldMasterIdLst>'
            f"<p:sldIdLst>{sld_ids}</p:sldIdLst>"
            f'<p:sldSz cx="{cm_to_emu(width)}" cy="{cm_to_emu(height)}"/><p:notesSz cx="6858000" cy="9144000"/>'
            f"{default_style}</p:presentation>", CT_PRES)
    return pkg.write(path)


def _needs_image(items: list[SlideItem]) -> bool:
    return any(it.kind == "image" or (it.kind == "group" and _needs_image(it.children)) for it in items)


# --- wordprocessing --------------------------------------------------------

@dataclass
class WRun:
    text: str = "text"
    size: float | None = None
    color: str | None = None
    font: str | None = None
    theme_color: str | None = None


@dataclass
class Paragraph:
    runs: list[WRun] = field(default_factory=list)
    style: str | None = None
    footnote: list[WRun] | None = None
    endnote: list[WRun] | None = None


@dataclass
class Table:
    rows: int
    cols: int
    runs: list[WRun] = field(default_factory=list)


@dataclass
class Image:
    width: float
    height: float


@dataclass
class Section:
    blocks: list[Paragraph | Table | Image] = field(default_factory=list)
    width: float = 21.59
    height: float = 27.94
    margins: dict[str, float] = field(default_factory=lambda: {
        "upper": 2.54, "right": 2.54, "lower": 2.54, "left": 2.54,
        "header": 1.27, "footer": 1.27, "gutter": 0.0})
    columns: int = 1
    column_space: float = 1.27
    header: list[WRun] | None = None
    footer: list[WRun] | None = None


def _w_rpr(run: WRun) -> str:
    inner = ""
    if run.font:
        inner += f"<w:rFonts w:ascii={quoteattr(run.font)} w:hAnsi={quoteattr(run.font)}/>"
    if run.color:
        inner += f'<w:color w:val="{run.color}"/>'
    elif run.theme_color:
        inner += f'<w:color w:val="auto" w:themeColor="{run.theme_color}"/>'
    if run.size is not None:
        inner += f'<w:sz w:val="{round(run.size * 2)}"/>'
    return f"<w:rPr>{inner}</w:rPr>" if inner else ""


def _w_run(run: WRun) -> str:
    return f'<w:r>{_w_rpr(run)}<w:t xml:space="preserve">{escape(run.text)}</w:t></w:r>'


def _w_para(runs: list[WRun], style: str | None = None, extra: str = "", ppr_extra: str = "") -> str:
    ppr = ""
    if style or ppr_extra:
        ppr = "<w:pPr>" + (f'<w:pStyle w:val="{style}"/>' if style else "") + ppr_extra + "</w:pPr>"
    return f"<w:p>{ppr}{''.join(_w_run(r) for r in runs)}{extra}</w:p>"


def _inline_image(img: Image, rid: str, n: int) -> str:
    cx, cy = cm_to_emu(img.width), cm_to_emu(img.height)
    return (f'<w:r><w:drawing><wp:inline distT="0" distB="0" distL="0" distR="0"><wp:extent cx="{cx}" cy="{cy}"/>'
            f'<wp:docPr id="{n}" name="Picture {n}"/><a:graphic><a:graphicData uri="{NS_PIC}">'
            f'<pic:pic><pic:nvPicPr><pic:cNvPr id="{n}" name="image{n}.png"/><pic:cNvPicPr/></pic:nvPicPr>'
            f'<pic:blipFill><a:blip r:embed="{rid}"/><a:stretch><a:fillRect/></a:stretch></pic:blipFill>'
            f'<pic:spPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="{cx}" cy="{cy}"/></a:xfrm>'
            f'<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></pic:spPr></pic:pic></a:graphicData></a:graphic>'
            "</wp:inline></w:drawing></w:r>")


def write_docx(path: str | Path, sections: list[Section], default_size: float = 11.0,
               default_font: str | None = None, major_font: str = "Calibri Light", minor_font: str = "Calibri",
               styles_extra: str = "") -> Path:
    pkg = PackageWriter()
    doc = "word/document.xml"
    pkg.relate("", f"{RT}/officeDocument", doc)
    pkg.relate(doc, f"{RT}/styles", "word/styles.xml")
    pkg.relate(doc, f"{RT}/settings", "word/settings.xml")
    pkg.relate(doc, f"{RT}/theme", "word/theme/theme1.xml")
    pkg.add("word/theme/theme1.xml", theme_xml(major_font, minor_font), CT_THEME)
    pkg.add("word/settings.xml", XML_DECL + f'<w:settings xmlns:w="{NS_W}"/>', CT_SETTINGS_W)
    fonts = (f"<w:rFonts w:ascii={quoteattr(default_font)} w:hAnsi={quoteattr(default_font)}/>" if default_font
             else '<w:rFonts w:asciiTheme="minorHAnsi" w:hAnsiTheme="minorHAnsi"/>')
    pkg.add("word/styles.xml", XML_DECL + f'<w:styles xmlns:w="{NS_W}"><w:docDefaults><w:rPrDefault><w:rPr>'
            f'{fonts}<w:sz w:val="{round(default_size * 2)}"/></w:rPr></w:rPrDefault></w:docDefaults>'
            '<w:style w:type="paragraph" w:default="1" w:styleId="Normal"><w:name w:val="Normal"/></w:style>'
            '<w:style w:type="paragraph" w:styleId="FootnoteText"><w:name w:val="footnote text"/>'
            '<w:basedOn w:val="Normal"/><w:rPr><w:sz w:val="20"/></w:rPr></w:style>'
            f"{styles_extra}</w:styles>", CT_STYLES_W)

    ns = (f'xmlns:w="{NS_W}" xmlns:r="{RT}" xmlns:a="{NS_A}" xmlns:wp="{NS_WP}" xmlns:pic="{NS_PIC}"')
    footnotes: list[str] = []
    endnotes: list[str] = []
    image_n = 0
    hf_n = 0
    body = ""
    for s_idx, sec in enumerate(sections):
        for block in sec.blocks:
            if isinstance(block, Paragraph):
                extra = ""
                if block.footnote is not None:
                    fid = len(footnotes) + 1
                    footnotes.append(f'<w:footnote w:id="{fid}">{_w_para(block.footnote, "FootnoteText")}</w:footnote>')
                    extra += f'<w:r><w:footnoteReference w:id="{fid}"/></w:r>'
                if block.endnote is not None:
                    eid = len(endnotes) + 1
                    endnotes.append(f'<w:endnote w:id="{eid}">{_w_para(block.endnote)}</w:endnote>')
                    extra += f'<w:r><w:endnoteReference w:id="{eid}"/></w:r>'
                body += _w_para(block.runs, block.style, extra)
            elif isinstance(block, Table):
                runs = iter(block.runs)
                grid = "".join(f'<w:gridCol w:w="{2000}"/>' for _ in range(block.cols))
                rows = "".join(
                    "<w:tr>" + "".join(
                        f"<w:tc>{_w_para([r] if (r := next(runs, None)) else [])}</w:tc>" for _ in range(block.cols)
                    ) + "</w:tr>" for _ in range(block.rows))
                body += f"<w:tbl><w:tblPr/><w:tblGrid>{grid}</w:tblGrid>{rows}</w:tbl>"
            elif isinstance(block, Image):
                image_n += 1
                media = f"word/media/image{image_n}.png"
                pkg.add(media, PNG_1PX)
                rid = pkg.relate(doc, f"{RT}/image", media)
                body += f"<w:p>{_inline_image(block, rid, image_n)}</w:p>"
        refs = ""
        for kind, runs in (("header", sec.header), ("footer", sec.footer)):
            if runs is None:
                continue
            hf_n += 1
            part = f"word/{kind}{hf_n}.xml"
            root = "w:hdr" if kind == "header" else "w:ftr"
            pkg.add(part, XML_DECL + f"<{root} {ns}>{_w_para(runs)}</{root}>",
                    CT_HEADER if kind == "header" else CT_FOOTER)
            rid = pkg.relate(doc, f"{RT}/{kind}", part)
            refs += f'<w:{kind}Reference w:type="default" r:id="{rid}"/>'
        m = sec.margins
        mar = " ".join(f'w:{attr}="{cm_to_twip(m.get(name, 0.0))}"' for attr, name in (
            ("top", "upper"), ("right", "right"), ("bottom", "lower"), ("left", "left"),
            ("header", "header"), ("footer", "footer"), ("gutter", "gutter")))
        sect = (f'<w:sectPr>{refs}<w:pgSz w:w="{cm_to_twip(sec.width)}" w:h="{cm_to_twip(sec.height)}"/>'
                f'<w:pgMar {mar}/><w:cols w:num="{sec.columns}" w:space="{cm_to_twip(sec.column_space)}"/></w:sectPr>')
        if s_idx < len(sections) - 1:
            body += f"<w:p><w:pPr>{sect}</w:pPr></w:p>"
        else:
            body += sect

    for kind, notes, ctype in (("footnotes", footnotes, CT_FOOTNOTES), ("endnotes", endnotes, CT_ENDNOTES)):
        if not notes:
            continue
        tag = kind[:-1]
        sep = (f'<w:{tag} w:type="separator" w:id="-1"><w:p><w:r><w:separator/></w:r></w:p></w:{tag}>'
               f'<w:{tag} w:type="continuationSeparator" w:id="0"><w:p><w:r><w:continuationSeparator/></w:r></w:p></w:{tag}>')
        pkg.add(f"word/{kind}.xml", XML_DECL + f"<w:{kind} {ns}>{sep}{''.join(notes)}</w:{kind}>", ctype)
        pkg.relate(doc, f"{RT}/{kind}", f"word/{kind}.xml")

    pkg.add(doc, XML_DECL + f"<w:document {ns}><w:body>{body}</w:body></w:document>", CT_DOC)
    return pkg.write(path)


# --- spreadsheet -----------------------------------------------------------

@dataclass
class CellStyle:
    font_size: float = 11.0
    font_name: str = "Calibri"
    font_color: str | None = None
    fill_pattern: str = "none"
    fill_color: str | None = None
    borders: tuple[str, str, str, str] = ("none", "none", "none", "none")  # left, right, top, bottom


@dataclass
class SheetDrawing:
    kind: str                       # "image" or "chart"
    from_cell: tuple[int, int]      # 1-based (row, col)
    to_cell: tuple[int, int]
    chart_tag: str = "barChart"     # plot element name, e.g. bar3DChart, pieChart


@dataclass
class Sheet:
    zoom: int | None = None
    cells: list[tuple[str, int]] = field(default_factory=list)   # (A1 ref, style index)
    drawings: list[SheetDrawing] = field(default_factory=list)


def column_letters(col: int) -> str:
    out = ""
    while col:
        col, rem = divmod(col - 1, 26)
        out = chr(ord("A") + rem) + out
    return out


def _border_xml(sides: tuple[str, str, str, str]) -> str:
    out = ""
    for name, style in zip(("left", "right", "top", "bottom"), sides):
        out += f'<{name} style="{style}"><color auto="1"/></{name}>' if style and style != "none" else f"<{name}/>"
    return f"<border>{out}<diagonal/></border>"


def write_xlsx(path: str | Path, sheets: list[Sheet], styles: list[CellStyle] | None = None) -> Path:
    styles = styles or [CellStyle()]
    pkg = PackageWriter()
    wb = "xl/workbook.xml"
    pkg.relate("", f"{RT}/officeDocument", wb)
    pkg.relate(wb, f"{RT}/styles", "xl/styles.xml")
    pkg.relate(wb, f"{RT}/theme", "xl/theme/theme1.xml")
    pkg.add("xl/theme/theme1.xml", theme_xml(), CT_THEME)

    fonts = "".join(
        f'<font><sz val="{s.font_size:g}"/>' + (f'<color rgb="FF{s.font_color}"/>' if s.font_color else '<color theme="1"/>')
        + f"<name val={quoteattr(s.font_name)}/></font>" for s in styles)
    fills = '<fill><patternFill patternType="none"/></fill><fill><patternFill patternType="gray125"/></fill>'
    fills += "".join(
        f'<fill><patternFill patternType="{s.fill_pattern}">'
        + (f'<fgColor rgb="FF{s.fill_color}"/>' if s.fill_color else "") + "</patternFill></fill>" for s in styles)
    borders = "".join(_border_xml(s.borders) for s in styles)
    xfs = "".join(
        f'<xf numFmtId="0" fontId="{i}" fillId="{i + 2}" borderId="{i}" xfId="0" applyFont="1" applyFill="1" applyBorder="1"/>'
        for i in range(len(styles)))
    pkg.add("xl/styles.xml", XML_DECL + f'<styleSheet xmlns="{NS_S}">'
            f'<fonts count="{len(styles)}">{fonts}</fonts><fills count="{len(styles) + 2}">{fills}</fills>'
            f'<borders count="{len(styles)}">{borders}</borders>'
            '<cellStyleXfs count="1"><xf numFmtId="0" fontId="0" fillId="0" borderId="0"/></cellStyleXfs>'
            f'<cellXfs count="{len(styles)}">{xfs}</cellXfs></styleSheet>', CT_STYLES_S)

    sheet_xml = ""
    media_n = chart_n = 0
    for n, sheet in enumerate(sheets, start=1):
        name = f"xl/worksheets/sheet{n}.xml"
        rid = pkg.relate(wb, f"{RT}/worksheet", name)
        sheet_xml += f'<sheet name="Sheet{n}" sheetId="{n}" r:id="{rid}"/>'
        rows: dict[int, list[str]] = {}
        for ref, style in sheet.cells:
            row = int("".join(ch for ch in ref if ch.isdigit()))
            rows.setdefault(row, []).append(f'<c r="{ref}" s="{style}"><v>1</v></c>')
        data = "".join(f'<row r="{r}">{"".join(cells)}</row>' for r, cells in sorted(rows.items()))
        zoom = f' zoomScale="{sheet.zoom}"' if sheet.zoom is not None else ""
        drawing_ref = ""
        if sheet.drawings:
            dname = f"xl/drawings/drawing{n}.xml"
            drid = pkg.relate(name, f"{RT}/drawing", dname)
            drawing_ref = f'<drawing r:id="{drid}"/>'
            anchors = ""
            for k, d in enumerate(sheet.drawings, start=2):
                marker = lambda tag, rc: (f"<xdr:{tag}><xdr:col>{rc[1] - 1}</xdr:col><xdr:colOff>0</xdr:colOff>"
                                          f"<xdr:row>{rc[0] - 1}</xdr:row><xdr:rowOff>0</xdr:rowOff></xdr:{tag}>")
                if d.kind == "image":
                    media_n += 1
                    media = f"xl/media/image{media_n}.png"
                    pkg.add(media, PNG_1PX)
                    mrid = pkg.relate(dname, f"{RT}/image", media)
                    content = (f'<xdr:pic><xdr:nvPicPr><xdr:cNvPr id="{k}" name="Picture {k}"/><xdr:cNvPicPr/></xdr:nvPicPr>'
                               f'<xdr:blipFill><a:blip r:embed="{mrid}"/><a:stretch><a:fillRect/></a:stretch></xdr:blipFill>'
                               '<xdr:spPr><a:prstGeom prst="rect"><a:avLst/></a:prstGeom></xdr:spPr></xdr:pic>')
                else:
                    chart_n += 1
                    cname = f"xl/charts/chart{chart_n}.xml"
                    crid = pkg.relate(dname, f"{RT}/chart", cname)
                    view3d = "<c:view3D/>" if "3D" in d.chart_tag else ""
                    pkg.add(cname, XML_DECL + f'<c:chartSpace xmlns:c="{NS_C}" xmlns:a="{NS_A}" xmlns:r="{RT}">'
                            f"<c:chart>{view3d}<c:plotArea><c:layout/><c:{d.chart_tag}><c:varyColors val=\"0\"/>"
                            f"</c:{d.chart_tag}></c:plotArea></c:chart></c:chartSpace>", CT_CHART)
                    content = (f'<xdr:graphicFrame macro=""><xdr:nvGraphicFramePr><xdr:cNvPr id="{k}" name="Chart {k}"/>'
                               '<xdr:cNvGraphicFramePr/></xdr:nvGraphicFramePr><xdr:xfrm><a:off x="0" y="0"/>'
                               '<a:ext cx="0" cy="0"/></xdr:xfrm><a:graphic>'
                               f'<a:graphicData uri="{NS_C}"><c:chart r:id="{crid}"/></a:graphicData></a:graphic>'
                               "</xdr:graphicFrame>")
                anchors += (f'<xdr:twoCellAnchor>{marker("from", d.from_cell)}{marker("to", d.to_cell)}'
                            f"{content}<xdr:clientData/></xdr:twoCellAnchor>")
            pkg.add(dname, XML_DECL + f'<xdr:wsDr xmlns:xdr="{NS_XDR}" xmlns:a="{NS_A}" xmlns:r="{RT}" '
                    f'xmlns:c="{NS_C}">{anchors}</xdr:wsDr>', CT_DRAWING)
        pkg.add(name, XML_DECL + f'<worksheet xmlns="{NS_S}" xmlns:r="{RT}">'
                f'<sheetViews><sheetView workbookViewId="0"{zoom}/></sheetViews>'
                f"<sheetData>{data}</sheetData>{drawing_ref}</worksheet>", CT_SHEET)

    pkg.add(wb, XML_DECL + f'<workbook xmlns="{NS_S}" xmlns:r="{RT}"><sheets>{sheet_xml}</sheets></workbook>',
            CT_WORKBOOK)
    return pkg.write(path)


# --- random corpora --------------------------------------------------------

FONTS = ("arial", "calibri", "times new roman", "verdana", "candara", "georgia", "tahoma", "consolas")
COLORS = ("000000", "FF0000", "0070C0", "00B050", "7030A0", "FFC000", "404040", "C00000")
SHAPES = ("rect", "ellipse", "leftRightArrow", "rightArrow", "triangle", "roundRect", "star5", "chevron")
CHARTS = ("barChart", "bar3DChart", "lineChart", "line3DChart", "pieChart", "pie3DChart", "areaChart", "scatterChart")
SLIDE_SIZES = ((25.4, 19.05), (33.867, 19.05), (25.4, 14.288), (27.517, 19.05))
PAGE_SIZES = ((21.59, 27.94), (21.0, 29.7), (21.59, 35.56), (29.7, 42.0))
WORDS = ("alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliet")


def _random_run(rng: random.Random, runs_cls=Run) -> Run:
    return runs_cls(text=" ".join(rng.choices(WORDS, k=3)), size=float(rng.choice((10, 11, 12, 14, 18, 20, 24, 28))),
                    color=rng.choice(COLORS), font=rng.choice(FONTS).title())


def random_slide(rng: random.Random, width: float, height: float, max_objects: int = 6) -> list[SlideItem]:
    items = []
    for _ in range(rng.randint(1, max_objects)):
        kind = rng.choice(("textbox", "textbox", "image", "table", "shape"))
        w = round(rng.uniform(0.1, 0.8) * width, 2)
        h = round(rng.uniform(0.05, 0.6) * height, 2)
        x = round(rng.uniform(0, width - w), 2)
        y = round(rng.uniform(0, height - h), 2)
        item = SlideItem(kind, x, y, w, h)
        if kind in ("textbox", "shape"):
            item.runs = [_random_run(rng) for _ in range(rng.randint(0, 3))]
        if kind == "shape":
            item.shape_type = rng.choice(SHAPES)
        if kind == "table":
            item.rows, item.cols = rng.randint(1, 6), rng.randint(1, 5)
            item.runs = [_random_run(rng) for _ in range(rng.randint(0, 4))]
        items.append(item)
    return items


def random_presentation(rng: random.Random, path: str | Path, max_pages: int = 10) -> Path:
    width, height = rng.choice(SLIDE_SIZES)
    slides = [random_slide(rng, width, height) for _ in range(rng.randint(1, max_pages))]
    return write_pptx(path, slides, width, height)


def random_document(rng: random.Random, path: str | Path, max_pages: int = 10) -> Path:
    sections = []
    for _ in range(rng.randint(1, max_pages)):
        width, height = rng.choice(PAGE_SIZES)
        blocks: list[Paragraph | Table | Image] = []
        for _ in range(rng.randint(1, 5)):
            choice = rng.random()
            if choice < 0.55:
                para = Paragraph(runs=[_random_run(rng, WRun) for _ in range(rng.randint(1, 3))])
                if rng.random() < 0.2:
                    para.footnote = [_random_run(rng, WRun)]
                blocks.append(para)
            elif choice < 0.8:
                blocks.append(Table(rng.randint(1, 6), rng.randint(1, 5),
                                    [_random_run(rng, WRun) for _ in range(rng.randint(0, 4))]))
            else:
                blocks.append(Image(round(rng.uniform(1, width - 2), 2), round(rng.uniform(1, height - 2), 2)))
        sec = Section(blocks=blocks, width=width, height=height, columns=rng.randint(1, 3),
                      margins={k: round(rng.uniform(0.5, 3.5), 2) for k in
                               ("upper", "right", "lower", "left", "header", "footer", "gutter")},
                      column_space=round(rng.uniform(0.3, 2.0), 2))
        if rng.random() < 0.5:
            sec.header = [_random_run(rng, WRun)]
        if rng.random() < 0.5:
            sec.footer = [_random_run(rng, WRun)]
        sections.append(sec)
    return write_docx(path, sections)


def random_workbook(rng: random.Random, path: str | Path, max_pages: int = 10) -> Path:
    styles = [CellStyle(font_size=float(rng.choice((9, 10, 11, 12, 14))), font_name=rng.choice(FONTS).title(),
                        font_color=rng.choice(COLORS),
                        fill_pattern=rng.choice(("none", "solid", "gray125", "darkGrid")),
                        fill_color=rng.choice(COLORS),
                        borders=tuple(rng.choice(("none", "thin", "double", "dotted")) for _ in range(4)))
              for _ in range(rng.randint(1, 5))]
    sheets = []
    for _ in range(rng.randint(1, max_pages)):
        cells = [(f"{column_letters(rng.randint(1, 12))}{rng.randint(1, 40)}", rng.randrange(len(styles)))
                 for _ in range(rng.randint(0, 12))]
        drawings = []
        for _ in range(rng.randint(0, 3)):
            r0, c0 = rng.randint(1, 30), rng.randint(1, 15)
            to = (r0 + rng.randint(0, 15), c0 + rng.randint(0, 8))
            if rng.random() < 0.5:
                drawings.append(SheetDrawing("image", (r0, c0), to))
            else:
                drawings.append(SheetDrawing("chart", (r0, c0), to, rng.choice(CHARTS)))
        sheets.append(Sheet(zoom=rng.choice((None, 85, 100, 120, 150)), cells=cells, drawings=drawings))
    return write_xlsx(path, sheets, styles)


def random_corpus(directory: str | Path, n_docs: int, seed: int = 0, max_pages: int = 10) -> list[Path]:
    """Write ``n_docs`` random documents, cycling PPTX/DOCX/XLSX."""
    rng = random.Random(seed)
    directory = Path(directory)
    out = []
    writers = ((random_presentation, "pptx"), (random_document, "docx"), (random_workbook, "xlsx"))
    for i in range(n_docs):
        writer, ext = writers[i % 3]
        out.append(writer(rng, directory / f"doc{i:04d}.{ext}", max_pages))
    return out


@dataclass
class PlantedCorpus:
    paths: list[Path]
    truth: dict                 # {"groups": {family: [doc_id, ...]}}
    queries: list[dict]         # one query per family, built from its first member


def _jitter(rng: random.Random, item: SlideItem, width: float, height: float, amount: float) -> SlideItem:
    def move(value: float, extent: float) -> float:
        return round(max(0.0, value + rng.uniform(-amount, amount) * extent), 2)

    out = SlideItem(item.kind, move(item.x, width), move(item.y, height),
                    max(0.01, move(item.width, width)), max(0.01, move(item.height, height)))
    out.shape_type = item.shape_type
    return out


def planted_corpus(directory: str | Path, n_docs: int = 200, family_sizes: tuple[int, ...] = (4, 8, 12),
                   seed: int = 0, jitter: float = 0.02) -> PlantedCorpus:
    """Random presentations with a few planted layout families.

    Every member of a family carries one slide whose boxes are the family
    template moved and resized by up to ``jitter`` of the slide extent, with
    freshly drawn text. Query geometry comes from the first member.
    """
    rng = random.Random(seed)
    directory = Path(directory)
    slots = rng.sample(range(n_docs), sum(family_sizes))
    owners: dict[int, str] = {}
    for f, size in enumerate(family_sizes):
        for slot in slots[:size]:
            owners[slot] = f"F{f + 1}"
        slots = slots[size:]

    templates = {}
    for f in range(len(family_sizes)):
        width, height = rng.choice(SLIDE_SIZES)
        boxes = [SlideItem("textbox", *_random_box(rng, width, height)) for _ in range(3)]
        boxes.append(SlideItem("image", *_random_box(rng, width, height)))
        templates[f"F{f + 1}"] = (width, height, boxes)

    groups: dict[str, list[str]] = {name: [] for name in templates}
    query_slides: dict[str, tuple[float, float, list[SlideItem]]] = {}
    paths = []
    for i in range(n_docs):
        path = directory / f"doc{i:04d}.pptx"
        family = owners.get(i)
        if family is None:
            paths.append(random_presentation(rng, path, max_pages=4))
            continue
        width, height, boxes = templates[family]
        planted = [_jitter(rng, b, width, height, jitter) for b in boxes]
        for item in planted:
            if item.kind == "textbox":
                item.runs = [_random_run(rng) for _ in range(rng.randint(1, 3))]
        slides = [random_slide(rng, width, height) for _ in range(rng.randint(0, 2))]
        slides.insert(rng.randint(0, len(slides)), planted)
        paths.append(write_pptx(path, slides, width, height))
        groups[family].append(path.name)
        query_slides.setdefault(family, (width, height, planted))

    queries = []
    for family in sorted(query_slides):
        width, height, planted = query_slides[family]
        items = [{"kind": "page_geometry", "fields": {"width": width, "height": height}}]
        items += [{"kind": b.kind, "fields": {"x": b.x, "y": b.y, "width": b.width, "height": b.height}}
                  for b in planted]
        queries.append({"doc_type": "presentation", "unit": "cm", "threshold": "auto", "group": family,
                        "name": f"{family}-q1", "items": items})
    return PlantedCorpus(paths, {"groups": groups}, queries)


def _random_box(rng: random.Random, width: float, height: float) -> tuple[float, float, float, float]:
    w = round(rng.uniform(0.15, 0.6) * width, 2)
    h = round(rng.uniform(0.1, 0.4) * height, 2)
    return round(rng.uniform(0, width - w), 2), round(rng.uniform(0, height - h), 2), w, h
