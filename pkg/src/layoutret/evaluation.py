"""Precision/recall benchmark over labeled groups of similar documents.

Ground truth is JSON ``{"groups": {"G1": ["deck_a.pptx", "deck_b.pptx#2"]}}``.
A plain doc_id marks the whole document relevant; ``doc_id#N`` marks page N.
A whole document counts as retrieved when any of its pages clears the
threshold.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Union

from .errors import GroundTruthError, UnknownGroup
from .matcher import DEFAULT_CONFIG, MatcherConfig, resolve_threshold, search
from .query import RetrievalQuery
from .store import FeatureDb

Ref = Union[str, tuple[str, int]]
_PAGE_REF = re.compile(r"^(.*)#(\d+)$")


@dataclass(frozen=True)
class GroundTruth:
    groups: dict[str, frozenset]

    def relevant(self, group: str) -> frozenset:
        try:
            return self.groups[group]
        except KeyError:
            raise UnknownGroup(f"group {group!r} is not in the ground truth") from None


def parse_ref(text: str) -> Ref:
    m = _PAGE_REF.match(text)
    if m and m.group(1):
        return m.group(1), int(m.group(2))
    return text


def load_ground_truth(source: str | Path | dict) -> GroundTruth:
    if isinstance(source, dict):
        data = source
    else:
        try:
            data = json.loads(Path(source).read_text(encoding="utf-8"))
        except OSError as exc:
            raise GroundTruthError(f"cannot read ground truth {source}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise GroundTruthError(f"{source}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    groups = data.get("groups") if isinstance(data, dict) else None
    if not isinstance(groups, dict) or not groups:
        raise GroundTruthError("ground truth needs a non-empty 'groups' object")
    out = {}
    for gid, members in groups.items():
        if not isinstance(members, list) or not all(isinstance(m, str) and m for m in members):
            raise GroundTruthError(f"group {gid!r}: members must be a list of doc ids")
        out[str(gid)] = frozenset(parse_ref(m) for m in members)
    return GroundTruth(out)


@dataclass(frozen=True)
class PrecisionRecall:
    a: int
    b: int
    c: int
    precision: float | None
    recall: float | None


def precision_recall(retrieved: Iterable, relevant: Iterable) -> PrecisionRecall:
    """A: relevant and retrieved, B: retrieved but not relevant, C: relevant but missed.

    A ratio with a zero denominator is undefined and returned as None.
    """
    got, want = set(retrieved), set(relevant)
    a, b, c = len(got & want), len(got - want), len(want - got)
    return PrecisionRecall(a, b, c, a / (a + b) if a + b else None, a / (a + c) if a + c else None)


@dataclass(frozen=True)
class BenchmarkQuery:
    name: str
    group: str
    query: RetrievalQuery


@dataclass(frozen=True)
class ReportRow:
    group: str
    query: str
    threshold: float
    a: int
    b: int
    c: int
    precision: float | None
    recall: float | None
    pages: int  # retrieved pages, before document-level aggregation


@dataclass
class EvalReport:
    rows: list[ReportRow]

    def to_records(self) -> list[dict]:
        return [asdict(r) for r in self.rows]

    def format_table(self) -> str:
        header = ("group", "query", "threshold", "A", "B", "C", "precision", "recall", "pages")
        body = [(r.group, r.query, round2(r.threshold), str(r.a), str(r.b), str(r.c),
                 _fmt(r.precision), _fmt(r.recall), str(r.pages)) for r in self.rows]
        widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h) for i, h in enumerate(header)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
        lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in body]
        return "\n".join(lines)


def round2(value: float) -> str:
    """Two decimals, halves rounded up (0.625 -> "0.63")."""
    return str(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else round2(value)


def check_refs(db: FeatureDb, truth: GroundTruth) -> None:
    for gid, refs in truth.groups.items():
        for ref in refs:
            doc_id, page = (ref, None) if isinstance(ref, str) else ref
            entry = db.documents.get(doc_id)
            if entry is None:
                raise GroundTruthError(f"group {gid!r}: document {doc_id!r} is not in the database")
            if page is not None and all(p.page_index != page for p in entry.pages):
                raise GroundTruthError(f"group {gid!r}: {doc_id!r} has no page {page}")


def evaluate_query(db: FeatureDb, bq: BenchmarkQuery, truth: GroundTruth,
                   cfg: MatcherConfig = DEFAULT_CONFIG, threshold: float | str | None = None) -> ReportRow:
    relevant = truth.relevant(bq.group)
    level = resolve_threshold(bq.query, cfg, threshold)
    hits = search(bq.query, db, cfg, threshold=level)
    pages = {(p.doc_id, p.page_index) for p in hits}
    docs = {doc for doc, _ in pages}
    relevant_docs = {r if isinstance(r, str) else r[0] for r in relevant}
    retrieved = {r for r in relevant if (r in docs if isinstance(r, str) else r in pages)}
    retrieved |= {d for d in docs if d not in relevant_docs}
    pr = precision_recall(retrieved, relevant)
    return ReportRow(bq.group, bq.name, level, pr.a, pr.b, pr.c, pr.precision, pr.recall, len(pages))


def run_benchmark(db: FeatureDb, queries: Iterable[BenchmarkQuery | tuple[RetrievalQuery, str]],
                  truth: GroundTruth, cfg: MatcherConfig = DEFAULT_CONFIG,
                  threshold: float | str | None = None) -> EvalReport:
    """One report row per query, in the order given."""
    items = []
    for i, q in enumerate(queries):
        if not isinstance(q, BenchmarkQuery):
            rq, group = q
            q = BenchmarkQuery(name=f"q{i + 1}", group=group, query=rq)
        truth.relevant(q.group)
        items.append(q)
    check_refs(db, truth)
    return EvalReport([evaluate_query(db, q, truth, cfg, threshold) for q in items])
