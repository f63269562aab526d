"""Exception hierarchy shared across the package."""

from typing import List


class QueryExpansionError(Exception):
    """Base class for every error raised by qexpand."""


class ModelLoadError(QueryExpansionError):
    """The embedding model file is missing, unreadable or malformed."""


class NotEmbeddableError(QueryExpansionError):
    """Every token of a query is out of vocabulary."""

    def __init__(self, query: str, oov_tokens: List[str]):
        self.query = query
        self.oov_tokens = list(oov_tokens)
        super().__init__(
            f"query not embeddable: {query!r} (out of vocabulary: {', '.join(self.oov_tokens)})"
        )


class ProviderError(QueryExpansionError):
    """A suggestion provider failed for a given query."""

    def __init__(self, query: str, message: str):
        self.query = query
        super().__init__(f"{message} (query={query!r})")


class ClusteringError(QueryExpansionError):
    """Invalid clustering request (bad m, empty input, enumeration cap)."""


class QueryParseError(QueryExpansionError):
    """A Boolean query string does not conform to the grammar."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class UndefinedRateError(QueryExpansionError):
    """A TP/FP rate or accuracy has a zero denominator."""


class CorpusError(QueryExpansionError):
    """The corpus or query CSV cannot be loaded."""


class ConfigError(QueryExpansionError):
    """Pipeline configuration violates its invariants."""
