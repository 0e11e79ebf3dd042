import json
import subprocess
import sys

import pytest

from authored import DOCX_LAYOUT, PPTX_OBJECTS, XLSX_OWN
from layoutret.cli import main
from layoutret.store import load_db

TB_QUERY = {"doc_type": "presentation", "unit": "cm", "items": [
    {"kind": "page_geometry", "fields": {"height": 19.05, "width": 25.4}},
    {"kind": "textbox", "fields": {"x": 1.06, "y": 4.02, "height": 12.90, "width": 23.28}},
]}


@pytest.fixture()
def docs(tmp_path):
    root = tmp_path / "docs"
    (root / "sub").mkdir(parents=True)
    PPTX_OBJECTS.build(root)
    DOCX_LAYOUT.build(root / "sub")
    XLSX_OWN.build(root)
    return root


@pytest.fixture()
def indexed(docs, tmp_path):
    db = tmp_path / "features.jsonl"
    assert main(["extract", "--in", str(docs), "--out", str(db), "--workers", "1"]) == 0
    return db


def write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_extract_three_fixtures(docs, tmp_path, capsys):
    out = tmp_path / "f.jsonl"
    assert main(["extract", "--in", str(docs), "--out", str(out), "--workers", "2"]) == 0
    db = load_db(out)
    assert sorted(db.documents) == ["objects.pptx", "own.xlsx", "sub/layout.docx"]
    assert {e.doc_type for e in db.documents.values()} == {"presentation", "wordprocessing", "spreadsheet"}
    assert "files seen: 3, extracted: 3, skipped: 0" in capsys.readouterr().err


def test_extract_is_deterministic(docs, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["extract", "--in", str(docs), "--out", str(a), "--workers", "1"]) == 0
    assert main(["extract", "--in", str(docs), "--out", str(b), "--workers", "3"]) == 0
    # the header carries a creation time; the records must be byte-identical
    assert a.read_bytes().split(b"\n")[1:] == b.read_bytes().split(b"\n")[1:]


def test_extract_skips_corrupt(docs, tmp_path, capsys):
    (docs / "broken.pptx").write_bytes(b"PK\x03\x04 not really a zip")
    (docs / "notes.txt").write_text("plain text")
    out = tmp_path / "f.jsonl"
    assert main(["extract", "--in", str(docs), "--out", str(out), "--workers", "1"]) == 0
    err = capsys.readouterr().err
    assert "broken.pptx" in err and "notes.txt" in err
    assert "files seen: 5, extracted: 3, skipped: 2" in err
    assert len(load_db(out).documents) == 3


def test_extract_type_filter(docs, tmp_path):
    out = tmp_path / "f.jsonl"
    assert main(["extract", "--in", str(docs), "--out", str(out), "--types", "pptx", "--workers", "1"]) == 0
    assert {e.doc_type for e in load_db(out).documents.values()} == {"presentation"}


def test_extract_bad_types_is_usage(docs, tmp_path):
    assert main(["extract", "--in", str(docs), "--out", str(tmp_path / "f"), "--types", "pdf"]) == 1


def test_extract_io_errors(docs, tmp_path):
    assert main(["extract", "--in", str(tmp_path / "nope"), "--out", str(tmp_path / "f")]) == 2
    assert main(["extract", "--in", str(docs), "--out", str(tmp_path / "missing" / "f.jsonl"), "--workers", "1"]) == 2


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["search", "--db", "x"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["search", "--db", "x", "--query", "q", "--threshold", "high"])
    assert info.value.code == 1


def test_search_table(indexed, tmp_path, capsys):
    q = write_json(tmp_path / "q.json", TB_QUERY)
    assert main(["search", "--db", str(indexed), "--query", str(q)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split() == ["rank", "s_value", "page", "document"]
    first = lines[1].split()
    assert first[:3] == ["1", "1.0000", "1"] and first[3].endswith("objects.pptx")


def test_search_explain(indexed, tmp_path, capsys):
    q = write_json(tmp_path / "q.json", TB_QUERY)
    assert main(["search", "--db", str(indexed), "--query", str(q), "--threshold", "0.78", "--explain"]) == 0
    out = capsys.readouterr().out
    assert "item 0 page_geometry" in out and "item 1 textbox -> 0" in out and "[AM-4]" in out


def test_search_records(indexed, tmp_path, capsys):
    q = write_json(tmp_path / "q.json", TB_QUERY)
    assert main(["search", "--db", str(indexed), "--query", str(q), "--threshold", "0", "--format", "records",
                 "--top", "1"]) == 0
    recs = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert len(recs) == 1 and recs[0]["doc_id"] == "objects.pptx" and "traces" not in recs[0]


def test_search_no_pages_of_type(tmp_path, docs, capsys):
    db = tmp_path / "f.jsonl"
    assert main(["extract", "--in", str(docs), "--out", str(db), "--types", "docx", "--workers", "1"]) == 0
    capsys.readouterr()
    q = write_json(tmp_path / "q.json", TB_QUERY)
    assert main(["search", "--db", str(db), "--query", str(q)]) == 0
    captured = capsys.readouterr()
    assert "0 pages scanned of type presentation" in captured.err
    assert captured.out.splitlines()[1:] == []


def test_search_invalid_query(indexed, tmp_path, capsys):
    q = write_json(tmp_path / "q.json", {"doc_type": "spreadsheet", "items": [{"kind": "textbox", "fields": {"x": 1}}]})
    assert main(["search", "--db", str(indexed), "--query", str(q)]) == 3
    assert "textbox" in capsys.readouterr().err


def test_search_missing_db(tmp_path):
    q = write_json(tmp_path / "q.json", TB_QUERY)
    assert main(["search", "--db", str(tmp_path / "none.jsonl"), "--query", str(q)]) == 2


def test_search_corrupt_db(tmp_path):
    db = tmp_path / "bad.jsonl"
    db.write_text('{"schema": 99}\n')
    q = write_json(tmp_path / "q.json", TB_QUERY)
    assert main(["search", "--db", str(db), "--query", str(q)]) == 3


# --- eval ------------------------------------------------------------------

@pytest.fixture()
def planted(tmp_path):
    from layoutret.synth import planted_corpus

    pc = planted_corpus(tmp_path / "docs", n_docs=30, family_sizes=(3, 4, 3), seed=11)
    db = tmp_path / "f.jsonl"
    assert main(["extract", "--in", str(tmp_path / "docs"), "--out", str(db), "--workers", "1"]) == 0
    qdir = tmp_path / "queries"
    qdir.mkdir()
    for q in pc.queries:
        write_json(qdir / f"{q['name']}.json", q)
    truth = write_json(tmp_path / "truth.json", pc.truth)
    return db, qdir, truth


def test_eval_rows(planted, capsys):
    db, qdir, truth = planted
    capsys.readouterr()
    assert main(["eval", "--db", str(db), "--queries", str(qdir), "--truth", str(truth)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split()[:8] == ["group", "query", "threshold", "A", "B", "C", "precision", "recall"]
    assert [line.split()[0] for line in lines[1:]] == ["F1", "F2", "F3"]


def test_eval_records_match_precision_recall(planted, capsys):
    from layoutret.evaluation import precision_recall

    db, qdir, truth = planted
    capsys.readouterr()
    assert main(["eval", "--db", str(db), "--queries", str(qdir), "--truth", str(truth), "--format", "records"]) == 0
    for line in capsys.readouterr().out.splitlines():
        rec = json.loads(line)
        a, b, c = rec["a"], rec["b"], rec["c"]
        pr = precision_recall(set(range(a + b)), set(range(a)) | {f"m{i}" for i in range(c)})
        assert (rec["precision"], rec["recall"]) == (pr.precision, pr.recall)


def test_eval_empty_queries_dir(planted, tmp_path):
    db, _, truth = planted
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["eval", "--db", str(db), "--queries", str(empty), "--truth", str(truth)]) == 1


def test_eval_malformed_truth(planted, tmp_path):
    db, qdir, _ = planted
    bad = tmp_path / "bad.json"
    bad.write_text("{groups: ")
    assert main(["eval", "--db", str(db), "--queries", str(qdir), "--truth", str(bad)]) == 3
    unknown_doc = write_json(tmp_path / "t2.json", {"groups": {"F1": ["ghost.pptx"], "F2": ["x"], "F3": ["y"]}})
    assert main(["eval", "--db", str(db), "--queries", str(qdir), "--truth", str(unknown_doc)]) == 3


def test_eval_query_without_group(planted, tmp_path):
    db, _, truth = planted
    qdir = tmp_path / "q2"
    qdir.mkdir()
    write_json(qdir / "a.json", TB_QUERY)
    assert main(["eval", "--db", str(db), "--queries", str(qdir), "--truth", str(truth)]) == 3


# --- configuration ---------------------------------------------------------

def test_config_from_env(indexed, tmp_path, monkeypatch, capsys):
    q = write_json(tmp_path / "q.json", {**TB_QUERY, "items": TB_QUERY["items"][1:]})
    cfg = write_json(tmp_path / "cfg.json", {"threshold_table": {"1": 1.0}})
    monkeypatch.setenv("LAYOUTRET_CONFIG", str(cfg))
    assert main(["search", "--db", str(indexed), "--query", str(q), "--format", "records"]) == 0
    recs = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert [r["s_value_final"] for r in recs] == [1.0]
    # a flag beats the file
    assert main(["--lambda", "0.125", "search", "--db", str(indexed), "--query", str(q), "--format", "records"]) == 0
    assert capsys.readouterr().out == ""


def test_bad_lambda(indexed, tmp_path, capsys):
    q = write_json(tmp_path / "q.json", TB_QUERY)
    assert main(["--lambda", "-1", "search", "--db", str(indexed), "--query", str(q)]) == 3
    assert "lambda" in capsys.readouterr().err


def test_bad_config_file(indexed, tmp_path, monkeypatch):
    q = write_json(tmp_path / "q.json", TB_QUERY)
    monkeypatch.setenv("LAYOUTRET_CONFIG", str(tmp_path / "absent.json"))
    assert main(["search", "--db", str(indexed), "--query", str(q)]) == 2
    write_json(tmp_path / "cfg.json", {"decay_scale": 0})
    monkeypatch.setenv("LAYOUTRET_CONFIG", str(tmp_path / "cfg.json"))
    assert main(["search", "--db", str(indexed), "--query", str(q)]) == 3


def test_module_entry_point(indexed, tmp_path):
    q = write_json(tmp_path / "q.json", TB_QUERY)
    proc = subprocess.run([sys.executable, "-m", "layoutret", "search", "--db", str(indexed), "--query", str(q)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "objects.pptx" in proc.stdout
