import zipfile

import pytest

from layoutret.container import (
    UNKNOWN, detect_doc_type, normalize_part_name, open_package, relationships_of, resolve_target,
)
from layoutret.errors import CorruptArchive, MalformedRelationshipXml, MissingContentTypes, NotZip
from layoutret.synth import Sheet, write_docx, write_xlsx, Section

RT = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
CT = ('<?xml version="1.0"?><Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
      '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
      '<Default Extension="xml" ContentType="application/xml"/>'
      '<Default Extension="png" ContentType="image/png"/>'
      '<Override PartName="/ppt/presentation.xml" '
      'ContentType="{main}"/></Types>')
PRES_CT = "application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml"


def _rels(*rels):
    body = "".join(f'<Relationship Id="{i}" Type="{RT}/{t}" Target="{tg}"{extra}/>' for i, t, tg, extra in rels)
    return f'<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">{body}</Relationships>'


def minimal_pptx(path, main_ct=PRES_CT, slide_rels=None, content_types=True):
    """Hand-built package with a fixed, known part list."""
    with zipfile.ZipFile(path, "w") as zf:
        if content_types:
            zf.writestr("[Content_Types].xml", CT.format(main=main_ct))
        zf.writestr("_rels/.rels", _rels(("rId1", "officeDocument", "ppt/presentation.xml", "")))
        zf.writestr("ppt/presentation.xml", "<p/>")
        zf.writestr("ppt/_rels/presentation.xml.rels", _rels(("rId1", "slide", "slides/slide1.xml", "")))
        zf.writestr("ppt/slides/slide1.xml", "<sld/>")
        zf.writestr("ppt/slides/_rels/slide1.xml.rels", slide_rels or _rels(
            ("rId1", "slideLayout", "../slideLayouts/slideLayout1.xml", ""),
            ("rId2", "image", "../media/image1.png", ""),
            ("rId3", "hyperlink", "https://example.org/", ' TargetMode="External"')))
        zf.writestr("ppt/slideLayouts/slideLayout1.xml", "<layout/>")
        zf.writestr("ppt/media/image1.png", b"\x89PNG")
    return path


def test_parts_enumerated(tmp_path):
    pkg = open_package(minimal_pptx(tmp_path / "m.pptx"))
    assert set(pkg.parts) == {
        "_rels/.rels", "ppt/presentation.xml", "ppt/_rels/presentation.xml.rels", "ppt/slides/slide1.xml",
        "ppt/slides/_rels/slide1.xml.rels", "ppt/slideLayouts/slideLayout1.xml", "ppt/media/image1.png"}
    assert pkg.content_type_map["ppt/presentation.xml"] == PRES_CT
    assert pkg.content_type_map["ppt/media/image1.png"] == "image/png"
    assert "/ppt/presentation.xml" in pkg


def test_slide_relationships_resolved(tmp_path):
    pkg = open_package(minimal_pptx(tmp_path / "m.pptx"))
    rels = {r.id: r for r in relationships_of(pkg, "ppt/slides/slide1.xml")}
    assert rels["rId1"].rel_type.endswith("/slideLayout")
    assert rels["rId1"].target == "ppt/slideLayouts/slideLayout1.xml"
    assert rels["rId2"].target == "ppt/media/image1.png"
    assert rels["rId3"].is_external and rels["rId3"].target == "https://example.org/"


def test_part_without_rels_has_none(tmp_path):
    pkg = open_package(minimal_pptx(tmp_path / "m.pptx"))
    assert relationships_of(pkg, "ppt/slideLayouts/slideLayout1.xml") == []


def test_internal_targets_exist_or_are_external(tmp_path):
    pkg = open_package(minimal_pptx(tmp_path / "m.pptx"))
    for part in list(pkg.parts) + [""]:
        if part.endswith(".rels"):
            continue
        for rel in relationships_of(pkg, part):
            assert rel.is_external or rel.target in pkg.parts


def test_escaping_target_is_external(tmp_path):
    rels = _rels(("rId1", "image", "../../../outside.png", ""))
    pkg = open_package(minimal_pptx(tmp_path / "m.pptx", slide_rels=rels))
    (rel,) = relationships_of(pkg, "ppt/slides/slide1.xml")
    assert rel.is_external


def test_dangling_target_logged(tmp_path, caplog):
    rels = _rels(("rId1", "image", "../media/missing.png", ""))
    pkg = open_package(minimal_pptx(tmp_path / "m.pptx", slide_rels=rels))
    (rel,) = relationships_of(pkg, "ppt/slides/slide1.xml")
    assert rel.target == "ppt/media/missing.png" and rel.target not in pkg.parts
    assert "missing.png" in caplog.text


@pytest.mark.parametrize("body", ["<Relationships", _rels(("rId1", "image", "a.png", ""), ("rId1", "image", "b.png", ""))])
def test_malformed_rels(tmp_path, body):
    pkg = open_package(minimal_pptx(tmp_path / "m.pptx", slide_rels=body))
    with pytest.raises(MalformedRelationshipXml):
        relationships_of(pkg, "ppt/slides/slide1.xml")


def test_resolve_target():
    assert resolve_target("ppt/slides/slide1.xml", "../media/image1.png") == "ppt/media/image1.png"
    assert resolve_target("ppt/slides/slide1.xml", "/ppt/media/a.png") == "ppt/media/a.png"
    assert resolve_target("word/document.xml", "media/./x.png") == "word/media/x.png"
    assert resolve_target("a.xml", "../b.xml") is None
    assert normalize_part_name("\\word\\document.xml") == "word/document.xml"


def test_zero_byte_file(tmp_path):
    p = tmp_path / "empty.pptx"
    p.write_bytes(b"")
    with pytest.raises(NotZip):
        open_package(p)


def test_corrupt_archive(tmp_path):
    p = tmp_path / "bad.pptx"
    p.write_bytes(b"PK\x03\x04" + b"\x00" * 40)
    with pytest.raises(CorruptArchive):
        open_package(p)


def test_missing_content_types(tmp_path):
    with pytest.raises(MissingContentTypes):
        open_package(minimal_pptx(tmp_path / "m.pptx", content_types=False))


def test_corrupt_member_skipped_with_warning(tmp_path):
    p = minimal_pptx(tmp_path / "m.pptx")
    data = bytearray(p.read_bytes())
    with zipfile.ZipFile(p) as zf:
        info = zf.getinfo("ppt/slideLayouts/slideLayout1.xml")
    # flip payload bytes of one stored member so its CRC check fails
    start = info.header_offset + 30 + len(info.filename)
    data[start:start + 3] = b"XXX"
    p.write_bytes(bytes(data))
    pkg = open_package(p)
    assert "ppt/slideLayouts/slideLayout1.xml" not in pkg.parts
    assert any("slideLayout1" in w for w in pkg.warnings)
    assert "ppt/slides/slide1.xml" in pkg.parts


def test_detect_doc_types(tmp_path):
    assert detect_doc_type(open_package(minimal_pptx(tmp_path / "a.pptx"))) == "presentation"
    assert detect_doc_type(open_package(write_docx(tmp_path / "b.docx", [Section()]))) == "wordprocessing"
    assert detect_doc_type(open_package(write_xlsx(tmp_path / "c.xlsx", [Sheet()]))) == "spreadsheet"
    assert detect_doc_type(open_package(minimal_pptx(tmp_path / "d.bin", main_ct="text/plain"))) == UNKNOWN


def test_reading_twice_is_identical(tmp_path):
    p = minimal_pptx(tmp_path / "m.pptx")
    a, b = open_package(p), open_package(p)
    assert {n: x.bytes for n, x in a.parts.items()} == {n: x.bytes for n, x in b.parts.items()}
    assert detect_doc_type(a) == detect_doc_type(b)
