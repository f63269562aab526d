"""End-to-end expansion: embed, suggest, rank, cluster, formulate, render."""

import os
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

from .boolean_query import QueryAst, flat_or, formulate, render
from .clustering import Grouping, optimize_grouping
from .errors import ConfigError
from .ranking import RankedWord, select_top
from .suggestions import DatamuseClient, LocalLexicon, Suggestion, fetch_local
from .vector_model import VectorModel, WordVector, embed_query, normalize_token, query_token_vectors

Provider = Callable[[str, int], List[Suggestion]]


@dataclass
class PipelineConfig:
    model_path: Optional[str] = None
    provider: str = "local"
    lexicon_path: Optional[str] = None
    max_suggestions: int = 50
    top_n: int = 25
    clusters: int = 3
    iterations: int = 10_000
    seed: int = 0
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    output_path: Optional[str] = None
    report_path: Optional[str] = None
    include_title: bool = True

    def validate(self) -> "PipelineConfig":
        if self.provider not in ("datamuse", "local"):
            raise ConfigError(f"unknown provider {self.provider!r}")
        if self.provider == "local" and not self.lexicon_path:
            raise ConfigError("--provider local requires --lexicon")
        for name in ("max_suggestions", "top_n", "clusters", "threads"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.top_n > self.max_suggestions:
            raise ConfigError(f"top_n ({self.top_n}) exceeds max_suggestions ({self.max_suggestions})")
        return self


def make_provider(config: PipelineConfig) -> Provider:
    if config.provider == "local":
        lexicon = LocalLexicon.from_file(config.lexicon_path)
        return lambda query, max_n: fetch_local(lexicon, query, max_n)
    client = DatamuseClient()
    return client.fetch


def query_seed(seed: int, index: int) -> int:
    """Per-query RNG seed; independent of scheduling order."""
    return seed ^ index


@dataclass
class Expansion:
    query: str
    query_vector: WordVector
    suggestions: List[Suggestion]
    ranked: List[RankedWord]
    grouping: Grouping
    ast: QueryAst
    text: str
    elapsed: float


class Expander:
    """Holds a loaded model and a provider; expands queries on demand.

    Safe to share across threads: the model is read-only and every call
    owns its own RNG.
    """

    def __init__(self, model: VectorModel, provider: Provider, config: PipelineConfig):
        self.model = model
        self.provider = provider
        self.config = config

    def suggest(self, query: str) -> List[Suggestion]:
        return self.provider(query, self.config.max_suggestions)

    def expand(self, query: str, seed: Optional[int] = None,
               suggestions: Optional[Sequence[Suggestion]] = None) -> Expansion:
        cfg = self.config
        start = time.perf_counter()
        qvec = embed_query(self.model, query)
        if suggestions is None:
            suggestions = self.suggest(query)
        ranked = select_top(self.model, qvec, suggestions, cfg.top_n)

        vectors = [r.word for r in ranked]
        present = {v.token for v in vectors}
        for v in query_token_vectors(self.model, query):
            if v.token not in present:
                vectors.append(v)
                present.add(v.token)

        grouping = optimize_grouping(vectors, cfg.clusters, cfg.iterations,
                                     cfg.seed if seed is None else seed)
        ast = formulate(grouping)
        text = render(ast)
        return Expansion(normalize_token(query), qvec, list(suggestions), ranked, grouping,
                         ast, text, time.perf_counter() - start)

    def flat_expansion(self, query: str, suggestions: Optional[Sequence[Suggestion]] = None) -> QueryAst:
        """The query OR-ed with the raw provider suggestions, no optimization."""
        if suggestions is None:
            suggestions = self.suggest(query)
        return flat_or([query] + [s.term for s in suggestions])
