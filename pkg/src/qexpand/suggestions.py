"""Candidate related words: a live Datamuse client and an offline JSON lexicon."""

import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import requests

from .errors import ProviderError
from .vector_model import normalize_token

logger = logging.getLogger(__name__)

DATAMUSE_URL = "https://api.datamuse.com/words"
DATAMUSE_URL_ENV = "QEXPAND_DATAMUSE_URL"

MAX_IN_FLIGHT = 4
MAX_RETRIES = 3
BACKOFF_BASE = 0.25  # seconds; in line with observed per-request latency


@dataclass(frozen=True)
class Suggestion:
    term: str
    provider_rank: int
    provider_score: Optional[float] = None


def _dedup(terms: Iterable[tuple]) -> List[Suggestion]:
    # (term, score) pairs in provider order -> ranked, normalized, duplicate-free
    seen = set()
    out: List[Suggestion] = []
    for term, score in terms:
        norm = normalize_token(term)
        if not norm or norm in seen:
            continue
        seen.add(norm)
        out.append(Suggestion(norm, len(out), score))
    return out


class LocalLexicon:
    """Offline stand-in for Datamuse: query phrase -> ordered suggestion terms."""

    def __init__(self, entries: Dict[str, Sequence[str]]):
        self.entries: Dict[str, tuple] = {}
        for key, terms in entries.items():
            seen = []
            for t in terms:
                n = normalize_token(t)
                if n and n not in seen:
                    seen.append(n)
            self.entries[normalize_token(key)] = tuple(seen)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "LocalLexicon":
        """Load a UTF-8 JSON object mapping query strings to lists of terms."""
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ProviderError("<lexicon>", f"cannot load lexicon {path}: {exc}") from exc
        if not isinstance(data, dict) or not all(isinstance(v, list) for v in data.values()):
            raise ProviderError("<lexicon>", f"lexicon {path} must map strings to lists")
        return cls(data)

    def __len__(self):
        return len(self.entries)


def fetch_local(lexicon: LocalLexicon, query: str, max_n: int) -> List[Suggestion]:
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    terms = lexicon.entries.get(normalize_token(query), ())
    return [Suggestion(t, i) for i, t in enumerate(terms[:max_n])]


def parse_datamuse_response(body: Union[str, bytes], query: str = "", max_n: Optional[int] = None) -> List[Suggestion]:
    """Turn a Datamuse JSON array into ranked Suggestions.

    Rows lacking a string ``word`` are ignored; ``score`` is optional.
    """
    try:
        data = json.loads(body)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ProviderError(query, f"malformed JSON from Datamuse: {exc}") from exc
    if not isinstance(data, list):
        raise ProviderError(query, "Datamuse response is not a JSON array")
    rows = []
    for item in data:
        if not isinstance(item, dict) or not isinstance(item.get("word"), str):
            continue
        score = item.get("score")
        if not isinstance(score, (int, float)) or isinstance(score, bool) or score < 0:
            score = None
        rows.append((item["word"], None if score is None else float(score)))
    out = _dedup(rows)
    return out if max_n is None else out[:max_n]


class DatamuseClient:
    """Thread-safe Datamuse "means like" client with retries.

    At most ``max_in_flight`` requests run concurrently per client. Transient
    failures (connection errors, timeouts, 429 and 5xx) are retried with
    exponential backoff; other HTTP errors fail immediately.
    """

    def __init__(self, base_url: Optional[str] = None, *, max_retries: int = MAX_RETRIES,
                 backoff_base: float = BACKOFF_BASE, max_in_flight: int = MAX_IN_FLIGHT,
                 timeout: float = 10.0, session: Optional[requests.Session] = None):
        self.base_url = base_url or os.environ.get(DATAMUSE_URL_ENV) or DATAMUSE_URL
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.timeout = timeout
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._session = session or requests.Session()

    def fetch(self, query: str, max_n: int) -> List[Suggestion]:
        if max_n < 1:
            raise ValueError("max_n must be >= 1")
        params = {"ml": query, "max": max_n}
        last_error = "unknown error"
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                with self._slots:
                    resp = self._session.get(self.base_url, params=params, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = f"network failure: {exc}"
                logger.debug("datamuse attempt %d failed: %s", attempt + 1, exc)
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = f"HTTP {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise ProviderError(query, f"Datamuse returned HTTP {resp.status_code}")
            return parse_datamuse_response(resp.content, query, max_n)
        raise ProviderError(query, f"Datamuse failed after {self.max_retries} retries: {last_error}")


def fetch_datamuse(query: str, max_n: int, client: Optional[DatamuseClient] = None) -> List[Suggestion]:
    return (client or DatamuseClient()).fetch(query, max_n)
