"""Command-line entry point: ``layoutret extract|search|eval``.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 validation. Logs go to stderr and
results to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from .container import detect_doc_type, open_package
from .errors import EvalError, LayoutRetError, MalformedRecord, QueryError, SchemaMismatch, StoreError
from .evaluation import BenchmarkQuery, load_ground_truth, run_benchmark
from .extractor import extract_document
from .matcher import DEFAULT_THRESHOLDS, MatcherConfig, rank, resolve_threshold, score_all, write_results
from .query import parse_query
from .store import FeatureDb, load_db, save_db

log = logging.getLogger("layoutret")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VALIDATION = 0, 1, 2, 3
CONFIG_ENV = "LAYOUTRET_CONFIG"
TYPE_NAMES = {"pptx": "presentation", "docx": "wordprocessing", "xlsx": "spreadsheet"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _threshold_arg(text: str) -> float | str:
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"threshold {value} outside [0, 1]")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="layoutret", description="Layout-similarity retrieval for OOXML documents.")
    parser.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--lambda", dest="lam", type=float, help="decay rate, in (0, 0.25]")
    parser.add_argument("--decay-scale", type=float, help="multiplier on the normalized distance")
    parser.add_argument("--threshold-table", help="JSON file mapping query count to S-value")
    parser.add_argument("--assignment-mode", choices=("independent", "one_to_one"))
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ex = sub.add_parser("extract", help="index a directory tree into a feature database")
    ex.add_argument("--in", dest="in_dir", required=True)
    ex.add_argument("--out", dest="out_db", required=True)
    ex.add_argument("--types", help="comma-separated subset of pptx,docx,xlsx")
    ex.add_argument("--workers", type=_positive_int)

    se = sub.add_parser("search", help="rank pages against a query file")
    se.add_argument("--db", required=True)
    se.add_argument("--query", required=True)
    se.add_argument("--threshold", type=_threshold_arg)
    se.add_argument("--top", type=_positive_int)
    se.add_argument("--explain", action="store_true", help="include per-item score traces")
    se.add_argument("--format", choices=("table", "records"), default="table")

    ev = sub.add_parser("eval", help="precision/recall over labeled groups")
    ev.add_argument("--db", required=True)
    ev.add_argument("--queries", required=True, help="directory of query files, each with a 'group' key")
    ev.add_argument("--truth", required=True)
    ev.add_argument("--format", choices=("table", "records"), default="table")
    return parser


# --- configuration ---------------------------------------------------------

def _read_json(path: str | Path, what: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise OSError(f"cannot read {what} {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{what} {path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def _threshold_table(raw: Any) -> dict[int, float]:
    if not isinstance(raw, dict):
        raise ValueError("threshold table must be a JSON object of count -> S-value")
    return {int(k): float(v) for k, v in raw.items()}


def load_settings(args: argparse.Namespace) -> tuple[MatcherConfig, dict[str, Any]]:
    """Defaults, then the config file, then command-line flags."""
    settings: dict[str, Any] = {}
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        data = _read_json(path, "config file")
        if not isinstance(data, dict):
            raise ValueError(f"config file {path}: expected a JSON object")
        settings.update(data)
    flags = {"lambda": args.lam, "decay_scale": args.decay_scale, "threshold_table": args.threshold_table,
             "assignment_mode": args.assignment_mode, "log_level": args.log_level,
             "workers": getattr(args, "workers", None)}
    settings.update({k: v for k, v in flags.items() if v is not None})

    table = settings.get("threshold_table")
    if isinstance(table, str):
        table = _read_json(table, "threshold table")
    cfg = MatcherConfig(
        lam=float(settings.get("lambda", 0.25)),
        decay_scale=float(settings.get("decay_scale", 16.0)),
        threshold_table=_threshold_table(table) if table is not None else dict(DEFAULT_THRESHOLDS),
        assignment_mode=settings.get("assignment_mode", "independent"),
    )
    if settings.get("unit", "cm") not in ("cm", "inch"):
        raise ValueError(f"unit must be cm or inch, got {settings['unit']!r}")
    workers = settings.get("workers")
    if workers is not None and (not isinstance(workers, int) or workers < 1):
        raise ValueError(f"workers must be a positive integer, got {workers!r}")
    return cfg, settings


# --- extract ---------------------------------------------------------------

def _extract_one(path: str, doc_id: str) -> tuple[str, str, str | None, list | None, list[str], str | None]:
    """Worker: (doc_id, path, doc_type, pages, warnings, error)."""
    warnings: list[str] = []
    try:
        pkg = open_package(path)
        doc_type = detect_doc_type(pkg)
        warnings.extend(pkg.warnings)
        pages = extract_document(pkg, doc_id, warnings)
        return doc_id, path, doc_type, pages, warnings, None
    except LayoutRetError as exc:
        return doc_id, path, None, None, warnings, f"{type(exc).__name__}: {exc}"
    except Exception as exc:  # a malformed file must never abort the scan
        return doc_id, path, None, None, warnings, f"{type(exc).__name__}: {exc}"


def cmd_extract(args: argparse.Namespace, settings: dict[str, Any]) -> int:
    root = Path(args.in_dir)
    if not root.is_dir():
        log.error("input directory %s does not exist", root)
        return EXIT_IO
    wanted = set(TYPE_NAMES.values())
    if args.types:
        names = [t.strip().lower() for t in args.types.split(",") if t.strip()]
        unknown = [t for t in names if t not in TYPE_NAMES]
        if unknown or not names:
            raise UsageError(f"--types accepts pptx, docx, xlsx; got {args.types!r}")
        wanted = {TYPE_NAMES[t] for t in names}

    files = sorted(p for p in root.rglob("*") if p.is_file())
    jobs = [(str(p), p.relative_to(root).as_posix()) for p in files]
    workers = settings.get("workers") or os.cpu_count() or 1
    if workers == 1 or len(jobs) <= 1:
        results = [_extract_one(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_extract_one, *zip(*jobs), chunksize=4))

    db = FeatureDb()
    extracted = skipped = 0
    for doc_id, path, doc_type, pages, warnings, error in results:
        for w in warnings:
            log.warning("%s: %s", path, w)
        if error is not None:
            log.warning("skipped %s: %s", path, error)
            skipped += 1
        elif doc_type not in wanted:
            log.info("skipped %s: type %s filtered out", path, doc_type)
            skipped += 1
        elif not pages:
            log.warning("skipped %s: no pages extracted", path)
            skipped += 1
        else:
            db.add(doc_id, path, doc_type, pages)
            extracted += 1
    try:
        save_db(db, args.out_db)
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    log.info("files seen: %d, extracted: %d, skipped: %d", len(jobs), extracted, skipped)
    print(f"files seen: {len(jobs)}, extracted: {extracted}, skipped: {skipped}", file=sys.stderr)
    return EXIT_OK


# --- search ----------------------------------------------------------------

def _print_table(results, db: FeatureDb, explain: bool) -> None:
    print(f"{'rank':>4}  {'s_value':>7}  page  document")
    for i, page in enumerate(results, start=1):
        source = db.documents[page.doc_id].source_path or page.doc_id
        print(f"{i:>4}  {page.s_value_final:>7.4f}  {page.page_index:>4}  {source}")
        if explain:
            for t in page.traces:
                ref = "-" if t.matched_object_ref is None else t.matched_object_ref
                print(f"        item {t.item_index} {t.kind} -> {ref}: {t.s_value_item:.4f}")
                for f in t.fields:
                    detail = "" if f.d is None else f" d={f.d:.4f} range={f.distance_range:.4f}"
                    print(f"          {f.field} [{f.method}] q={f.query_value!r} f={f.feature_value!r}"
                          f"{detail} s={f.s_value_field:.4f}")


def cmd_search(args: argparse.Namespace, cfg: MatcherConfig) -> int:
    try:
        rq = parse_query(Path(args.query))
    except QueryError as exc:
        log.error("invalid query %s: %s", args.query, exc)
        return EXIT_VALIDATION
    db = load_db(args.db)
    scored = list(score_all(rq, db, cfg))
    if not scored:
        print(f"0 pages scanned of type {rq.doc_type}", file=sys.stderr)
    else:
        log.info("%d pages scanned of type %s", len(scored), rq.doc_type)
    threshold = resolve_threshold(rq, cfg, args.threshold)
    results = rank(scored, threshold, args.top)
    log.info("threshold %.2f, %d pages retrieved", threshold, len(results))
    if args.format == "records":
        write_results(results, sys.stdout, db, explain=args.explain)
    else:
        _print_table(results, db, args.explain)
    return EXIT_OK


# --- eval ------------------------------------------------------------------

def cmd_eval(args: argparse.Namespace, cfg: MatcherConfig) -> int:
    qdir = Path(args.queries)
    if not qdir.is_dir():
        raise UsageError(f"--queries {qdir} is not a directory")
    paths = sorted(qdir.glob("*.json"))
    if not paths:
        raise UsageError(f"no query files (*.json) in {qdir}")
    try:
        truth = load_ground_truth(args.truth)
    except EvalError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    queries = []
    for path in paths:
        try:
            rq = parse_query(path)
        except QueryError as exc:
            log.error("invalid query %s: %s", path, exc)
            return EXIT_VALIDATION
        group = rq.extra.get("group")
        if not group:
            log.error("query %s has no 'group' key", path)
            return EXIT_VALIDATION
        queries.append(BenchmarkQuery(name=str(rq.extra.get("name") or path.stem), group=str(group), query=rq))
    db = load_db(args.db)
    try:
        report = run_benchmark(db, queries, truth, cfg)
    except EvalError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    if args.format == "records":
        for rec in report.to_records():
            print(json.dumps(rec, separators=(",", ":")))
    else:
        print(report.format_table())
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, settings = load_settings(args)
    except OSError as exc:
        print(f"layoutret: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"layoutret: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    level = str(settings.get("log_level", "WARNING")).upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        print(f"layoutret: unknown log level {level!r}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)

    try:
        if args.command == "extract":
            return cmd_extract(args, settings)
        if args.command == "search":
            return cmd_search(args, cfg)
        return cmd_eval(args, cfg)
    except UsageError as exc:
        print(f"layoutret: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaMismatch, MalformedRecord) as exc:
        log.error("feature database: %s", exc)
        return EXIT_VALIDATION
    except (StoreError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
