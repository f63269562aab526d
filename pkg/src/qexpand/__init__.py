"""Query expansion into AND-of-OR Boolean queries using word embeddings."""

__version__ = "0.1.0"

from .boolean_query import Document, QueryAst, formulate, matches, parse, render
from .clustering import Cluster, Grouping, brute_force_grouping, cluster_score, group_score, optimize_grouping
from .errors import QueryExpansionError
from .pipeline import Expander, PipelineConfig
from .ranking import RankedWord, select_top, set_similarity_score, word_distance
from .suggestions import DatamuseClient, LocalLexicon, Suggestion, fetch_datamuse, fetch_local
from .vector_model import VectorModel, WordVector, embed_query, load_model, lookup

__all__ = [
    "Cluster", "DatamuseClient", "Document", "Expander", "Grouping", "LocalLexicon",
    "PipelineConfig", "QueryAst", "QueryExpansionError", "RankedWord", "Suggestion",
    "VectorModel", "WordVector", "brute_force_grouping", "cluster_score", "embed_query",
    "fetch_datamuse", "fetch_local", "formulate", "group_score", "load_model", "lookup",
    "matches", "optimize_grouping", "parse", "render", "select_top", "set_similarity_score",
    "word_distance",
]
