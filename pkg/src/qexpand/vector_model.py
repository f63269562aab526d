"""Loading word2vec text models and mapping tokens and queries to vectors."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from .errors import ModelLoadError, NotEmbeddableError

logger = logging.getLogger(__name__)


def normalize_token(text: str) -> str:
    """Lowercase and collapse internal whitespace."""
    return " ".join(text.lower().split())


@dataclass(frozen=True, eq=False)
class WordVector:
    """A normalized token and its embedding coordinates.

    ``components`` is a read-only float64 array.
    """

    token: str
    components: np.ndarray

    def __post_init__(self):
        arr = np.array(self.components, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "components", arr)
        if not self.token:
            raise ValueError("WordVector token must be non-empty")

    @property
    def dimension(self) -> int:
        return self.components.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def __eq__(self, other):
        if not isinstance(other, WordVector):
            return NotImplemented
        return self.token == other.token and np.array_equal(self.components, other.components)

    def __hash__(self):
        return hash((self.token, self.components.tobytes()))

    def __repr__(self):
        return f"WordVector({self.token!r}, dim={self.dimension})"


@dataclass(frozen=True)
class VectorModel:
    """An immutable token -> vector table of fixed dimension."""

    dimension: int
    entries: Dict[str, WordVector] = field(repr=False)
    duplicate_count: int = 0
    zero_norm_count: int = 0

    @property
    def vocab_size(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return normalize_token(token) in self.entries

    def lookup(self, token: str) -> Optional[WordVector]:
        return lookup(self, token)

    def embed_query(self, query: str) -> WordVector:
        return embed_query(self, query)


def load_model(path: Union[str, Path], expected_dim: Optional[int] = None) -> VectorModel:
    """Parse a word2vec text-format model.

    The first line is ``<vocab_size> <dimension>``; each following line is a
    token followed by exactly ``dimension`` floats. Zero-norm rows are
    skipped and duplicate tokens keep their first occurrence; both are
    counted on the returned model.

    Raises:
        ModelLoadError: on any I/O or format problem, or if nothing usable
            remains after filtering.
    """
    path = Path(path)
    try:
        fh = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise ModelLoadError(f"cannot open model file {path}: {exc}") from exc

    entries: Dict[str, WordVector] = {}
    duplicates = 0
    zero_norm = 0
    with fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ModelLoadError(f"malformed header in {path}: {header.strip()!r}")
        declared_vocab, dim = int(parts[0]), int(parts[1])
        if dim <= 0:
            raise ModelLoadError(f"non-positive dimension {dim} in {path}")
        if expected_dim is not None and dim != expected_dim:
            raise ModelLoadError(f"dimension mismatch: header says {dim}, expected {expected_dim}")

        for lineno, line in enumerate(fh, start=2):
            fields = line.split()
            if not fields:
                continue
            if len(fields) - 1 != dim:
                raise ModelLoadError(
                    f"component count mismatch at line {lineno}: "
                    f"expected {dim}, got {len(fields) - 1}"
                )
            try:
                comps = np.array([float(x) for x in fields[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ModelLoadError(f"non-numeric component at line {lineno}: {exc}") from exc
            if not np.all(np.isfinite(comps)):
                raise ModelLoadError(f"non-finite component at line {lineno}")
            token = normalize_token(fields[0])
            if not np.any(comps):
                zero_norm += 1
                logger.warning("skipping zero-norm vector for %r at line %d", token, lineno)
                continue
            if token in entries:
                duplicates += 1
                logger.warning("duplicate token %r at line %d; keeping first", token, lineno)
                continue
            entries[token] = WordVector(token, comps)

    if not entries:
        raise ModelLoadError(f"empty vocabulary after filtering in {path}")
    if declared_vocab != len(entries) + duplicates + zero_norm:
        logger.info("header declares %d rows, read %d", declared_vocab,
                    len(entries) + duplicates + zero_norm)
    return VectorModel(dim, entries, duplicates, zero_norm)


def lookup(model: VectorModel, token: str) -> Optional[WordVector]:
    """Vector for ``token`` after normalization, or None when out of vocabulary."""
    return model.entries.get(normalize_token(token))


def embed_query(model: VectorModel, query: str) -> WordVector:
    """Mean of the in-vocabulary token vectors of ``query``.

    Raises:
        NotEmbeddableError: if the query is empty or every token is OOV.
    """
    normalized = normalize_token(query)
    tokens = normalized.split()
    found = [model.entries[t] for t in tokens if t in model.entries]
    if not found:
        raise NotEmbeddableError(query, tokens)
    if len(found) == 1:
        comps = found[0].components
    else:
        comps = np.mean([w.components for w in found], axis=0)
    return WordVector(normalized, comps)


def query_token_vectors(model: VectorModel, query: str):
    """In-vocabulary vectors for each distinct token of ``query``, in order."""
    seen = set()
    out = []
    for tok in normalize_token(query).split():
        if tok in seen:
            continue
        seen.add(tok)
        vec = model.entries.get(tok)
        if vec is not None:
            out.append(vec)
    return out
