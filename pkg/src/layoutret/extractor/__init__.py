"""Layout-feature extraction for the three OOXML document families."""

from __future__ import annotations

from ..container import OpcPackage, detect_doc_type
from ..errors import UnsupportedType
from ..model import PageFeature
from ..units import convert_length
from .presentation import extract_presentation
from .spreadsheet import extract_spreadsheet
from .wordprocessing import extract_wordprocessing

_EXTRACTORS = {
    "presentation": extract_presentation,
    "wordprocessing": extract_wordprocessing,
    "spreadsheet": extract_spreadsheet,
}


def extract_document(pkg: OpcPackage, doc_id: str, warnings: list[str] | None = None) -> list[PageFeature]:
    """One PageFeature per slide, section or worksheet, in document order.

    Pages that fail to parse are left out and described in ``warnings``.
    """
    doc_type = detect_doc_type(pkg)
    extractor = _EXTRACTORS.get(doc_type)
    if extractor is None:
        raise UnsupportedType(f"{pkg.source_path}: document type {doc_type!r} is not supported")
    return extractor(pkg, doc_id, warnings)


__all__ = [
    "convert_length",
    "extract_document",
    "extract_presentation",
    "extract_spreadsheet",
    "extract_wordprocessing",
]
