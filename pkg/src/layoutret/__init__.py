"""Layout-similarity retrieval for Office Open XML documents.

Extract page layout features from PPTX, DOCX and XLSX packages, keep them in
a line-delimited feature database, and rank pages against layout queries.
"""

from .container import detect_doc_type, open_package, relationships_of
from .evaluation import load_ground_truth, precision_recall, run_benchmark
from .extractor import convert_length, extract_document
from .matcher import (
    MatcherConfig, ScoredPage, ScoreTrace, am1, am2, am3, am4, default_threshold, em, score_item, score_page,
    search,
)
from .model import LayoutObject, PageFeature, PageGeometry
from .query import RetrievalQuery, parse_query, query_count, registry_lookup, serialize_query
from .store import FeatureDb, load_db, pages_of_type, save_db

__version__ = "0.1.0"

__all__ = [
    "FeatureDb", "LayoutObject", "MatcherConfig", "PageFeature", "PageGeometry", "RetrievalQuery",
    "ScoreTrace", "ScoredPage", "am1", "am2", "am3", "am4", "convert_length", "default_threshold",
    "detect_doc_type", "em", "extract_document", "load_db", "load_ground_truth", "open_package",
    "pages_of_type", "parse_query", "precision_recall", "query_count", "registry_lookup",
    "relationships_of", "run_benchmark", "save_db", "score_item", "score_page", "search", "serialize_query",
]
