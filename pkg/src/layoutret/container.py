"""OPC (ZIP) package access: parts, content types and relationships."""

from __future__ import annotations

import logging
import posixpath
import zipfile
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping
from xml.etree import ElementTree as ET

from .errors import CorruptArchive, MalformedRelationshipXml, MissingContentTypes, NotZip

log = logging.getLogger(__name__)

CONTENT_TYPES_PART = "[Content_Types].xml"
PACKAGE_RELS_PART = "_rels/.rels"

NS_CT = "http://schemas.openxmlformats.org/package/2006/content-types"
NS_PR = "http://schemas.openxmlformats.org/package/2006/relationships"

RT_OFFICE_DOCUMENT = (
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument"
)
RT_OFFICE_DOCUMENT_STRICT = "http://purl.oclc.org/ooxml/officeDocument/relationships/officeDocument"

ZIP_MAGIC = (b"PK\x03\x04", b"PK\x05\x06")

PRESENTATION = "presentation"
WORDPROCESSING = "wordprocessing"
SPREADSHEET = "spreadsheet"
UNKNOWN = "unknown"
DOC_TYPES = (PRESENTATION, WORDPROCESSING, SPREADSHEET)

_MAIN_CONTENT_TYPES = {
    PRESENTATION: (
        "application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml",
        "application/vnd.openxmlformats-officedocument.presentationml.slideshow.main+xml",
        "application/vnd.openxmlformats-officedocument.presentationml.template.main+xml",
        "application/vnd.ms-powerpoint.presentation.macroenabled.main+xml",
        "application/vnd.ms-powerpoint.slideshow.macroenabled.main+xml",
        "application/vnd.ms-powerpoint.template.macroenabled.main+xml",
    ),
    WORDPROCESSING: (
        "application/vnd.openxmlformats-officedocument.wordprocessingml.document.main+xml",
        "application/vnd.openxmlformats-officedocument.wordprocessingml.template.main+xml",
        "application/vnd.ms-word.document.macroenabled.main+xml",
        "application/vnd.ms-word.template.macroenabledtemplate.main+xml",
    ),
    SPREADSHEET: (
        "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml",
        "application/vnd.openxmlformats-officedocument.spreadsheetml.template.main+xml",
        "application/vnd.ms-excel.sheet.macroenabled.main+xml",
        "application/vnd.ms-excel.template.macroenabled.main+xml",
    ),
}


def normalize_part_name(name: str) -> str:
    """Canonical part name: forward slashes, no leading slash, case preserved."""
    return name.replace("\\", "/").lstrip("/")


@dataclass(frozen=True)
class PackagePart:
    name: str
    content_type: str
    bytes: bytes = field(repr=False)


@dataclass(frozen=True)
class Relationship:
    id: str
    rel_type: str
    target: str
    mode: str = "internal"  # internal | external

    @property
    def is_external(self) -> bool:
        return self.mode == "external"


@dataclass(frozen=True)
class OpcPackage:
    source_path: str
    parts: Mapping[str, PackagePart]
    content_type_map: Mapping[str, str]
    warnings: tuple[str, ...] = ()

    def __contains__(self, part_name: str) -> bool:
        return normalize_part_name(part_name) in self.parts

    def part(self, part_name: str) -> PackagePart:
        return self.parts[normalize_part_name(part_name)]

    def read(self, part_name: str) -> bytes:
        return self.part(part_name).bytes

    def xml(self, part_name: str) -> ET.Element:
        return ET.fromstring(self.read(part_name))


def _check_magic(path: Path) -> None:
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head not in ZIP_MAGIC:
        raise NotZip(f"{path}: not a ZIP container")


def _parse_content_types(data: bytes) -> tuple[dict[str, str], dict[str, str]]:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MissingContentTypes(f"unreadable content types part: {exc}") from exc
    defaults: dict[str, str] = {}
    overrides: dict[str, str] = {}
    for el in root:
        tag = el.tag.rsplit("}", 1)[-1]
        if tag == "Default" and el.get("Extension") is not None:
            defaults[el.get("Extension", "").lower()] = el.get("ContentType", "")
        elif tag == "Override" and el.get("PartName") is not None:
            overrides[normalize_part_name(el.get("PartName", "")).lower()] = el.get("ContentType", "")
    return defaults, overrides


def _content_type_for(name: str, defaults: dict[str, str], overrides: dict[str, str]) -> str:
    # OPC part names compare case-insensitively.
    hit = overrides.get(name.lower())
    if hit is not None:
        return hit
    ext = posixpath.splitext(name)[1].lstrip(".").lower()
    return defaults.get(ext, "")


def open_package(path: str | Path) -> OpcPackage:
    """Read every part of an OPC package into memory.

    Unreadable members (bad CRC, broken deflate stream) are skipped and
    reported in ``warnings``; a package without ``[Content_Types].xml`` is
    rejected.
    """
    path = Path(path)
    _check_magic(path)
    try:
        zf = zipfile.ZipFile(path)
    except (zipfile.BadZipFile, OSError, ValueError) as exc:
        raise CorruptArchive(f"{path}: {exc}") from exc

    raw: dict[str, bytes] = {}
    warnings: list[str] = []
    with zf:
        for info in zf.infolist():
            if info.is_dir():
                continue
            name = normalize_part_name(info.filename)
            if name in raw:
                warnings.append(f"duplicate part {name!r} ignored")
                continue
            try:
                raw[name] = zf.read(info)
            except (zipfile.BadZipFile, zlib.error, OSError, EOFError, NotImplementedError) as exc:
                warnings.append(f"part {name!r} unreadable: {exc}")
                log.warning("%s: skipping member %s: %s", path, name, exc)

    ct_name = next((n for n in raw if n.lower() == CONTENT_TYPES_PART.lower()), None)
    if ct_name is None:
        raise MissingContentTypes(f"{path}: no {CONTENT_TYPES_PART} part")
    defaults, overrides = _parse_content_types(raw.pop(ct_name))

    parts: dict[str, PackagePart] = {}
    ct_map: dict[str, str] = {}
    for name, data in raw.items():
        ctype = _content_type_for(name, defaults, overrides)
        parts[name] = PackagePart(name=name, content_type=ctype, bytes=data)
        ct_map[name] = ctype
    return OpcPackage(
        source_path=str(path),
        parts=MappingProxyType(parts),
        content_type_map=MappingProxyType(ct_map),
        warnings=tuple(warnings),
    )


def rels_part_name(part_name: str) -> str:
    """Name of the relationship part belonging to ``part_name`` ('' = package)."""
    part_name = normalize_part_name(part_name)
    if not part_name:
        return PACKAGE_RELS_PART
    folder, base = posixpath.split(part_name)
    return posixpath.join(folder, "_rels", base + ".rels")


def resolve_target(source_part: str, target: str) -> str | None:
    """Resolve a relationship target against its source part.

    Returns the normalized part name, or None when the target escapes the
    package root.
    """
    target = target.replace("\\", "/")
    if target.startswith("/"):
        joined = target.lstrip("/")
    else:
        base = posixpath.dirname(normalize_part_name(source_part))
        joined = posixpath.join(base, target)
    # strip fragment identifiers such as 'slide1.xml#id'
    joined = joined.split("#", 1)[0]
    normed = posixpath.normpath(joined) if joined else ""
    if normed in ("", ".") or normed == ".." or normed.startswith("../"):
        return None
    return normed


def relationships_of(pkg: OpcPackage, part_name: str) -> list[Relationship]:
    """Parsed relationships whose source is ``part_name`` ('' for the package).

    Internal targets that do not exist in the package are still returned but
    logged, so callers checking ``target in pkg`` never meet a silent dangle.
    """
    part_name = normalize_part_name(part_name)
    rels_name = rels_part_name(part_name)
    if rels_name not in pkg.parts:
        return []
    try:
        root = pkg.xml(rels_name)
    except ET.ParseError as exc:
        raise MalformedRelationshipXml(f"{rels_name}: {exc}") from exc

    out: list[Relationship] = []
    seen: set[str] = set()
    for el in root:
        if el.tag.rsplit("}", 1)[-1] != "Relationship":
            continue
        rid = el.get("Id")
        target = el.get("Target")
        if not rid or target is None:
            raise MalformedRelationshipXml(f"{rels_name}: relationship without Id/Target")
        if rid in seen:
            raise MalformedRelationshipXml(f"{rels_name}: duplicate relationship id {rid!r}")
        seen.add(rid)
        rel_type = el.get("Type", "")
        if el.get("TargetMode", "Internal").lower() == "external":
            out.append(Relationship(rid, rel_type, target, "external"))
            continue
        resolved = resolve_target(part_name, target)
        if resolved is None:
            out.append(Relationship(rid, rel_type, target, "external"))
            continue
        if resolved not in pkg.parts:
            log.warning("%s: relationship %s targets missing part %s", pkg.source_path, rid, resolved)
        out.append(Relationship(rid, rel_type, resolved, "internal"))
    return out


def rel_by_id(pkg: OpcPackage, part_name: str) -> dict[str, Relationship]:
    return {r.id: r for r in relationships_of(pkg, part_name)}


def rels_by_type(pkg: OpcPackage, part_name: str, suffix: str) -> list[Relationship]:
    """Internal relationships whose type URI ends with ``/suffix``."""
    return [
        r for r in relationships_of(pkg, part_name)
        if not r.is_external and r.rel_type.rsplit("/", 1)[-1] == suffix and r.target in pkg.parts
    ]


def main_part(pkg: OpcPackage) -> str | None:
    try:
        rels = relationships_of(pkg, "")
    except MalformedRelationshipXml:
        return None
    for rel in rels:
        if rel.rel_type in (RT_OFFICE_DOCUMENT, RT_OFFICE_DOCUMENT_STRICT) and not rel.is_external:
            return rel.target if rel.target in pkg.parts else None
    return None


def detect_doc_type(pkg: OpcPackage) -> str:
    """Classify by the content type of the main document part."""
    name = main_part(pkg)
    if name is None:
        return UNKNOWN
    ctype = pkg.content_type_map.get(name, "").lower()
    for doc_type, ctypes in _MAIN_CONTENT_TYPES.items():
        if ctype in ctypes:
            return doc_type
    return UNKNOWN
