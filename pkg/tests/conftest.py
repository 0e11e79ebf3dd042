from __future__ import annotations

import pytest

from layoutret.container import detect_doc_type, open_package
from layoutret.extractor import extract_document
from layoutret.store import FeatureDb, load_db, save_db
from layoutret.synth import random_corpus


def build_db(paths, root=None) -> FeatureDb:
    db = FeatureDb()
    for p in paths:
        pkg = open_package(p)
        doc_id = p.relative_to(root).as_posix() if root else p.name
        db.add(doc_id, str(p), detect_doc_type(pkg), extract_document(pkg, doc_id))
    return db


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """50 random documents (PPTX/DOCX/XLSX) indexed and saved: (db_path, FeatureDb)."""
    root = tmp_path_factory.mktemp("corpus")
    paths = random_corpus(root / "docs", 50, seed=7)
    db_path = root / "features.jsonl"
    save_db(build_db(paths), db_path)
    return db_path, load_db(db_path)


# criterion number -> (passed, description); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}")
