"""Euclidean scoring of suggestions against the query vector."""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .suggestions import Suggestion
from .vector_model import VectorModel, WordVector


@dataclass(frozen=True)
class RankedWord:
    word: WordVector
    distance: float

    @property
    def token(self) -> str:
        return self.word.token


def word_distance(w: WordVector, i: WordVector) -> float:
    """Euclidean distance |w - i|."""
    if w.dimension != i.dimension:
        raise ValueError(f"dimension mismatch: {w.dimension} != {i.dimension}")
    return float(np.linalg.norm(w.components - i.components))


def set_similarity_score(candidates: Sequence[WordVector], i: WordVector) -> float:
    """Mean distance of ``candidates`` to ``i``; lower means closer to the query."""
    if not candidates:
        raise ValueError("candidate set is empty")
    return math.fsum(word_distance(w, i) for w in candidates) / len(candidates)


def suggestion_vector(model: VectorModel, term: str) -> Optional[WordVector]:
    """Vector for a suggestion term, trying the underscore-joined form for phrases."""
    vec = model.lookup(term)
    if vec is None and " " in term:
        joined = model.lookup(term.replace(" ", "_"))
        if joined is not None:
            vec = WordVector(term, joined.components)
    return vec


def select_top(model: VectorModel, i: WordVector, suggestions: Sequence[Suggestion], n: int) -> List[RankedWord]:
    """The ``n`` in-vocabulary suggestions nearest to ``i``.

    OOV suggestions are dropped. Ordering is by ascending distance, then by
    term. An empty result means no suggestion was embeddable.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ranked = []
    for s in suggestions:
        vec = suggestion_vector(model, s.term)
        if vec is not None:
            ranked.append(RankedWord(vec, word_distance(vec, i)))
    ranked.sort(key=lambda r: (r.distance, r.token))
    return ranked[:n]


def compare_providers(model: VectorModel, query_vector: WordVector, candidates: dict) -> dict:
    """Score several providers' suggestion lists against one query vector.

    ``candidates`` maps provider name -> list of terms. Returns a mapping with
    per-provider scores (None when no term is in vocabulary) and the name of
    the lowest-scoring provider under ``"best"``.
    """
    scores = {}
    for name, terms in candidates.items():
        vecs = [v for v in (suggestion_vector(model, t) for t in terms) if v is not None]
        scores[name] = set_similarity_score(vecs, query_vector) if vecs else None
    scored = {k: v for k, v in scores.items() if v is not None}
    best = min(scored, key=lambda k: (scored[k], k)) if scored else None
    return {"scores": scores, "best": best}
