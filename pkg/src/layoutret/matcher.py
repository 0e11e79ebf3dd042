"""Similarity scoring and ranked retrieval.

Field scores come from one of five methods:

* EM: exact match, 0 or 1.
* AM-1: unordered multiset overlap of value lists, divided by the query count k.
* AM-2: chart type, 1 for type and dimensionality, 0.5 for type only.
* AM-3: exponential decay in the distance between two scalars, normalized by
  the largest gap the query could have inside its bounds.
* AM-4: the same decay for 2-D positions, normalized by the distance from the
  query point to the farthest page corner.

With ``lam`` = 0.25 the prefactor ``4 * lam`` is 1, so a zero distance scores
exactly 1. The decay argument is ``decay_scale * min(d / range, 1)``.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from typing import IO, Any, Iterable, Iterator, Mapping

from .errors import TypeMismatch
from .model import ChartProps, LayoutObject, PageFeature, format_r1c1
from .query import (
    AM1, AM2, AM3, AM4, EM, PAGE_EXTENT, ChartValue, QueryFieldSpec, QueryItem, RetrievalQuery, registry_lookup,
)
from .store import FeatureDb, pages_of_type
from .units import LENGTH_DECIMALS


def _build_default_table() -> dict[int, float]:
    table = {1: 0.90, 2: 0.90, 3: 0.90, 4: 0.81, 5: 0.78}
    for n in range(6, 10):
        table[n] = round(0.78 - (n - 5) * 0.012, 3)
    table[10] = 0.72
    return table


DEFAULT_THRESHOLDS: Mapping[int, float] = _build_default_table()


def _table_lookup(table: Mapping[int, float], n: int) -> float:
    if n < 1:
        raise ValueError(f"query count must be >= 1, got {n}")
    if n in table:
        return table[n]
    keys = sorted(table)
    below = [k for k in keys if k <= n]
    return table[below[-1]] if below else table[keys[0]]


def default_threshold(n: int) -> float:
    """S-value threshold for a query with ``n`` items; non-increasing in n."""
    return _table_lookup(DEFAULT_THRESHOLDS, n)


@dataclass(frozen=True)
class MatcherConfig:
    lam: float = 0.25
    decay_scale: float = 16.0
    threshold_table: Mapping[int, float] = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    assignment_mode: str = "independent"

    def __post_init__(self) -> None:
        if not (isinstance(self.lam, (int, float)) and 0 < self.lam <= 0.25):
            raise ValueError(f"lambda must be in (0, 0.25] so scores stay within [0, 1], got {self.lam!r}")
        if not (isinstance(self.decay_scale, (int, float)) and self.decay_scale > 0 and math.isfinite(self.decay_scale)):
            raise ValueError(f"decay_scale must be a positive finite number, got {self.decay_scale!r}")
        if not self.threshold_table:
            raise ValueError("threshold table is empty")
        for n, s in self.threshold_table.items():
            if not isinstance(n, int) or n < 1:
                raise ValueError(f"threshold table key must be an integer >= 1, got {n!r}")
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"threshold for n={n} outside [0, 1]: {s!r}")
        if self.assignment_mode not in ("independent", "one_to_one"):
            raise ValueError(f"assignment_mode must be independent or one_to_one, got {self.assignment_mode!r}")

    def threshold_for(self, n: int) -> float:
        return _table_lookup(self.threshold_table, n)


DEFAULT_CONFIG = MatcherConfig()


# --- primitive methods -----------------------------------------------------

def _canon(value: Any) -> Any:
    if isinstance(value, bool):
        raise TypeMismatch("boolean values are not comparable")
    if isinstance(value, (int, float)):
        return round(float(value), LENGTH_DECIMALS)
    if isinstance(value, str):
        return value.casefold()
    if isinstance(value, ChartProps):
        return ChartValue(value.chart_type.casefold(), value.dimensionality)
    if isinstance(value, (tuple, list, ChartValue)):
        return tuple(value) if isinstance(value, list) else value
    raise TypeMismatch(f"unsupported value {value!r}")


def _kind_of(value: Any) -> str:
    if isinstance(value, (int, float)):
        return "number"
    return type(value).__name__


def em(query_value: Any, feature_value: Any) -> int:
    qc, fc = _canon(query_value), _canon(feature_value)
    if _kind_of(qc) != _kind_of(fc):
        raise TypeMismatch(f"cannot compare {query_value!r} with {feature_value!r}")
    return int(qc == fc)


def am1(query_list: Iterable[Any], feature_list: Iterable[Any]) -> float:
    """Fraction of query values found in the features, each feature value used once."""
    wanted = [_canon(v) for v in query_list]
    if not wanted:
        raise ValueError("AM-1 needs at least one query value")
    available = Counter(_canon(v) for v in feature_list)
    hits = 0
    for v in wanted:
        if available[v] > 0:
            available[v] -= 1
            hits += 1
    return hits / len(wanted)


def am2(query_chart: ChartValue | ChartProps, feature_chart: ChartValue | ChartProps) -> float:
    q, f = _canon(query_chart), _canon(feature_chart)
    if q.chart_type != f.chart_type:
        return 0.0
    return 1.0 if q.dimensionality == f.dimensionality else 0.5


def _dec(value: float) -> Decimal:
    return Decimal(repr(float(value)))


def distance_range(q: float, bound_min: float, bound_max: float) -> float:
    """Largest gap between ``q`` and any value in [bound_min, bound_max].

    Subtraction is done in decimal so that e.g. 142.24 - 19.05 gives 123.19
    rather than 123.19000000000001.
    """
    qd = _dec(q)
    return float(max(abs(qd - _dec(bound_min)), abs(qd - _dec(bound_max))))


def max_distance(q: tuple[float, float], extent: tuple[float, float], origin: tuple[float, float] = (0.0, 0.0)) -> float:
    """Euclidean distance from ``q`` to the farthest corner of the page rectangle."""
    (qx, qy), (w, h), (ox, oy) = q, extent, origin
    return max(math.hypot(cx - qx, cy - qy) for cx in (ox, w) for cy in (oy, h))


def decay(d: float, span: float, cfg: MatcherConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """Return (x, s) for a raw distance ``d`` normalized by ``span``."""
    x = cfg.decay_scale * min(d / span, 1.0)
    return x, 4 * cfg.lam * math.exp(-cfg.lam * x)


def am3(q: float, f: float, bound_min: float, bound_max: float, cfg: MatcherConfig = DEFAULT_CONFIG) -> float:
    return am3_detail(q, f, bound_min, bound_max, cfg)[3]


def am3_detail(q: float, f: float, bound_min: float, bound_max: float,
               cfg: MatcherConfig = DEFAULT_CONFIG) -> tuple[float, float, float | None, float]:
    """(d, distance_range, x, s). A zero range degrades to exact match with x = None."""
    span = distance_range(q, bound_min, bound_max)
    d = abs(float(f) - float(q))
    if span == 0:
        return d, span, None, float(em(q, f))
    x, s = decay(d, span, cfg)
    return d, span, x, s


def am4(q: tuple[float, float], f: tuple[float, float], page_w: float, page_h: float,
        cfg: MatcherConfig = DEFAULT_CONFIG, origin: tuple[float, float] = (0.0, 0.0)) -> float:
    return am4_detail(q, f, page_w, page_h, cfg, origin)[3]


def am4_detail(q: tuple[float, float], f: tuple[float, float], page_w: float, page_h: float,
               cfg: MatcherConfig = DEFAULT_CONFIG,
               origin: tuple[float, float] = (0.0, 0.0)) -> tuple[float, float, float | None, float]:
    span = max_distance(q, (page_w, page_h), origin)
    d = math.hypot(f[0] - q[0], f[1] - q[1])
    if span == 0 or page_w == origin[0] or page_h == origin[1]:
        same = round(q[0], LENGTH_DECIMALS) == round(f[0], LENGTH_DECIMALS) and \
            round(q[1], LENGTH_DECIMALS) == round(f[1], LENGTH_DECIMALS)
        return d, span, None, float(same)
    x, s = decay(d, span, cfg)
    return d, span, x, s


# --- traces ----------------------------------------------------------------

@dataclass
class FieldScore:
    field: str
    query_value: Any
    feature_value: Any
    method: str
    d: float | None = None
    distance_range: float | None = None
    x: float | None = None
    s_value_field: float = 0.0


@dataclass
class ScoreTrace:
    item_index: int
    kind: str
    matched_object_ref: int | str | None
    fields: list[FieldScore]
    s_value_item: float


@dataclass
class ScoredPage:
    doc_id: str
    page_index: int
    s_value_final: float
    n: int
    traces: list[ScoreTrace]


# --- feature access --------------------------------------------------------

_MARGIN_FIELDS = {f"{m}_margin": m for m in ("upper", "right", "lower", "left", "header", "footer", "gutter", "column")}


def _page_value(pf: PageFeature, name: str) -> Any:
    g = pf.page_geometry
    if name in _MARGIN_FIELDS:
        return (g.margins or {}).get(_MARGIN_FIELDS[name])
    return getattr(g, name, None)


def _object_value(obj: LayoutObject, name: str) -> Any:
    if name in ("x", "y", "width", "height"):
        return getattr(obj.geometry, name) if obj.geometry is not None else None
    if name in ("font_size", "font_color", "font_name"):
        t = obj.text_props
        return None if t is None else {"font_size": t.font_sizes, "font_color": t.font_colors,
                                       "font_name": t.font_names}[name]
    if name in ("rows", "cols"):
        return getattr(obj.table_props, name) if obj.table_props is not None else None
    if name == "shape_type":
        return obj.shape_type
    if name == "chart_type":
        return obj.chart_props
    if name in ("from_cell", "to_cell"):
        a = obj.cell_anchor
        return None if a is None else (a.from_cell if name == "from_cell" else a.to_cell)
    if name in ("fill_pattern", "fill_color", "border"):
        c = obj.cell_style_props
        return None if c is None else {"fill_pattern": c.fill_patterns, "fill_color": c.fill_colors,
                                       "border": c.borders}[name]
    return None


def _extent(pf: PageFeature, axis: str | None) -> float | None:
    g = pf.page_geometry
    return g.width if axis == "width" else g.height if axis == "height" else None


def _bounds(spec: QueryFieldSpec, pf: PageFeature) -> tuple[float, float] | None:
    lo = spec.bound_min if spec.bound_min is not None else 0.0
    if spec.bound_max == PAGE_EXTENT:
        hi = _extent(pf, spec.axis)
        return None if hi is None else (lo, hi)
    if spec.bound_max is None:
        return None
    return lo, float(spec.bound_max)


def _score_scalar(spec: QueryFieldSpec, name: str, q: Any, f: Any, pf: PageFeature,
                  cfg: MatcherConfig) -> FieldScore:
    fs = FieldScore(field=name, query_value=q, feature_value=f, method=spec.method)
    if f is None:
        return fs
    if spec.method == EM:
        fs.s_value_field = float(em(q, f))
    elif spec.method == AM1:
        fs.s_value_field = am1(q, f)
    elif spec.method == AM2:
        fs.s_value_field = am2(q, f)
    elif spec.method == AM3:
        bounds = _bounds(spec, pf)
        if bounds is None:
            fs.s_value_field = float(em(q, f))
        else:
            fs.d, fs.distance_range, fs.x, fs.s_value_field = am3_detail(q, f, bounds[0], bounds[1], cfg)
    elif spec.method == AM4:
        # a lone coordinate is scored along its own axis
        bounds = _bounds(spec, pf)
        if bounds is None:
            fs.s_value_field = float(em(q, f))
        else:
            fs.d, fs.distance_range, fs.x, fs.s_value_field = am3_detail(q, f, bounds[0], bounds[1], cfg)
    else:  # pragma: no cover
        raise ValueError(f"unknown method {spec.method}")
    return fs


def _score_point(name: str, q: tuple, f: tuple | None, extent: tuple | None, origin: tuple,
                 cfg: MatcherConfig) -> FieldScore:
    fs = FieldScore(field=name, query_value=q, feature_value=f, method=AM4)
    if f is None or None in f:
        fs.feature_value = None
        return fs
    if extent is None or None in extent:
        fs.s_value_field = float(em(q, f))
        return fs
    fs.d, fs.distance_range, fs.x, fs.s_value_field = am4_detail(q, f, extent[0], extent[1], cfg, origin)
    return fs


def _field_scores(doc_type: str, item: QueryItem, pf: PageFeature, obj: LayoutObject | None,
                  cfg: MatcherConfig) -> list[FieldScore]:
    get = (lambda name: _page_value(pf, name)) if obj is None else (lambda name: _object_value(obj, name))
    c = item.constraints
    out: list[FieldScore] = []
    handled: set[str] = set()
    # slide position: x and y together form one coordinate
    if "x" in c and "y" in c:
        g = pf.page_geometry
        out.append(_score_point("x,y", (c["x"], c["y"]), (get("x"), get("y")), (g.width, g.height),
                                (0.0, 0.0), cfg))
        handled |= {"x", "y"}
    for name, q in c.items():
        if name in handled:
            continue
        spec = registry_lookup(doc_type, item.kind, name)
        if name in ("from_cell", "to_cell"):
            g = pf.page_geometry
            extent = (g.used_rows, g.used_cols)
            f = get(name)
            fs = _score_point(name, q, f, extent, (1, 1), cfg)
            fs.query_value = format_r1c1(*q)
            fs.feature_value = format_r1c1(*f) if f is not None else None
            out.append(fs)
            continue
        out.append(_score_scalar(spec, name, q, get(name), pf, cfg))
    return out


def _trace(index: int, item: QueryItem, ref: int | str | None, fields: list[FieldScore]) -> ScoreTrace:
    s = math.fsum(f.s_value_field for f in fields) / len(fields) if fields else 0.0
    return ScoreTrace(item_index=index, kind=item.kind, matched_object_ref=ref, fields=fields, s_value_item=s)


def _candidates(doc_type: str, index: int, item: QueryItem, pf: PageFeature,
                cfg: MatcherConfig) -> list[ScoreTrace]:
    return [_trace(index, item, ordinal, _field_scores(doc_type, item, pf, obj, cfg))
            for ordinal, obj in pf.objects_of(item.kind)]


def _absent(index: int, item: QueryItem) -> ScoreTrace:
    return ScoreTrace(item_index=index, kind=item.kind, matched_object_ref=None, fields=[], s_value_item=0.0)


def score_item(item: QueryItem, pf: PageFeature, cfg: MatcherConfig = DEFAULT_CONFIG, *,
               item_index: int = 0, doc_type: str | None = None) -> ScoreTrace:
    """Best-scoring match for one query item on one page (first object wins ties)."""
    doc_type = doc_type or pf.doc_type
    if item.kind == "page_geometry":
        return _trace(item_index, item, "page_geometry", _field_scores(doc_type, item, pf, None, cfg))
    best: ScoreTrace | None = None
    for cand in _candidates(doc_type, item_index, item, pf, cfg):
        if best is None or cand.s_value_item > best.s_value_item:
            best = cand
    return best if best is not None else _absent(item_index, item)


def _one_to_one(rq: RetrievalQuery, pf: PageFeature, cfg: MatcherConfig) -> list[ScoreTrace]:
    traces: dict[int, ScoreTrace] = {}
    pool: list[ScoreTrace] = []
    for i, item in enumerate(rq.items):
        if item.kind == "page_geometry":
            traces[i] = score_item(item, pf, cfg, item_index=i, doc_type=rq.doc_type)
        else:
            pool.extend(_candidates(rq.doc_type, i, item, pf, cfg))
    # greedy: highest score first, then lowest item index, then lowest object ordinal
    pool.sort(key=lambda t: (-t.s_value_item, t.item_index, t.matched_object_ref))
    used: set[int] = set()
    for cand in pool:
        if cand.item_index in traces or cand.matched_object_ref in used:
            continue
        traces[cand.item_index] = cand
        used.add(cand.matched_object_ref)  # type: ignore[arg-type]
    return [traces.get(i) or _absent(i, item) for i, item in enumerate(rq.items)]


def s_value_final(item_scores: Iterable[float]) -> float:
    scores = list(item_scores)
    if not scores:
        raise ValueError("no item scores")
    return math.fsum(scores) / len(scores)


def score_page(rq: RetrievalQuery, pf: PageFeature, cfg: MatcherConfig = DEFAULT_CONFIG) -> ScoredPage:
    if pf.doc_type != rq.doc_type:
        raise TypeMismatch(f"query targets {rq.doc_type}, page is {pf.doc_type}")
    if cfg.assignment_mode == "one_to_one":
        traces = _one_to_one(rq, pf, cfg)
    else:
        traces = [score_item(item, pf, cfg, item_index=i, doc_type=rq.doc_type) for i, item in enumerate(rq.items)]
    return ScoredPage(doc_id=pf.doc_id, page_index=pf.page_index,
                      s_value_final=s_value_final(t.s_value_item for t in traces), n=len(traces), traces=traces)


def resolve_threshold(rq: RetrievalQuery, cfg: MatcherConfig = DEFAULT_CONFIG,
                      override: float | str | None = None) -> float:
    chosen = rq.threshold if override is None else override
    if chosen == "auto":
        return cfg.threshold_for(len(rq.items))
    return float(chosen)  # type: ignore[arg-type]


def rank(scored: Iterable[ScoredPage], threshold: float, top_k: int | None = None) -> list[ScoredPage]:
    kept = [p for p in scored if p.s_value_final >= threshold]
    kept.sort(key=lambda p: (-p.s_value_final, p.doc_id, p.page_index))
    return kept[:top_k] if top_k is not None else kept


def score_all(rq: RetrievalQuery, db: FeatureDb, cfg: MatcherConfig = DEFAULT_CONFIG) -> Iterator[ScoredPage]:
    for pf in pages_of_type(db, rq.doc_type):
        yield score_page(rq, pf, cfg)


def search(rq: RetrievalQuery, db: FeatureDb, cfg: MatcherConfig = DEFAULT_CONFIG, top_k: int | None = None,
           threshold: float | str | None = None) -> list[ScoredPage]:
    """Pages of the query's document type scoring at or above the threshold, best first."""
    if top_k is not None and top_k < 0:
        raise ValueError("top_k must be non-negative")
    return rank(score_all(rq, db, cfg), resolve_threshold(rq, cfg, threshold), top_k)


# --- result serialization --------------------------------------------------

def _jsonable(value: Any) -> Any:
    if isinstance(value, ChartValue):
        return {"chart_type": value.chart_type, "dimensionality": value.dimensionality}
    if isinstance(value, ChartProps):
        return {"chart_type": value.chart_type, "dimensionality": value.dimensionality}
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, list):
        return [_jsonable(v) for v in value]
    return value


def result_to_record(page: ScoredPage, source: str | None = None, explain: bool = True) -> dict:
    rec: dict[str, Any] = {"doc_id": page.doc_id, "page_index": page.page_index}
    if source is not None:
        rec["source"] = source
    rec["s_value_final"] = page.s_value_final
    rec["n"] = page.n
    if explain:
        rec["traces"] = [{
            "item_index": t.item_index,
            "kind": t.kind,
            "matched_object_ref": t.matched_object_ref,
            "s_value_item": t.s_value_item,
            "fields": [{"field": f.field, "query_value": _jsonable(f.query_value),
                        "feature_value": _jsonable(f.feature_value), "method": f.method, "d": f.d,
                        "distance_range": f.distance_range, "x": f.x, "s_value_field": f.s_value_field}
                       for f in t.fields],
        } for t in page.traces]
    return rec


def write_results(results: Iterable[ScoredPage], out: IO[str], db: FeatureDb | None = None,
                  explain: bool = True) -> None:
    """One JSON record per line, same layout conventions as the feature database."""
    for page in results:
        source = db.documents[page.doc_id].source_path if db is not None and page.doc_id in db.documents else None
        out.write(json.dumps(result_to_record(page, source, explain), separators=(",", ":")) + "\n")
