"""AND-of-OR Boolean queries: formulation, rendering, parsing and matching.

Rendered form::

    ('t1' OR 't2') AND ('t3')

Terms are single-quoted phrases (or bare words on input). Groups are OR-ed
term lists joined by AND. NOT and NEAR are not supported.
"""

import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .clustering import Grouping, cluster_score
from .errors import QueryParseError
from .vector_model import normalize_token

_WORD_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> List[str]:
    """Lowercased maximal runs of letters and digits."""
    return _WORD_RE.findall(text.lower())


@dataclass(frozen=True)
class QueryAst:
    groups: Tuple[Tuple[str, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(g) for g in self.groups)
        if not groups:
            raise ValueError("query needs at least one group")
        for g in groups:
            if not g:
                raise ValueError("every group needs at least one term")
            if any(not t for t in g):
                raise ValueError("terms must be non-empty")
        object.__setattr__(self, "groups", groups)

    @property
    def terms(self) -> List[str]:
        return [t for g in self.groups for t in g]


def normalize(ast: QueryAst) -> QueryAst:
    """Lowercase terms and drop duplicates within each group (first kept)."""
    groups = []
    for g in ast.groups:
        seen: List[str] = []
        for t in g:
            n = normalize_token(t)
            if n and n not in seen:
                seen.append(n)
        groups.append(tuple(seen))
    return QueryAst(tuple(groups))


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    text: str
    _cache: Dict[bool, tuple] = field(default_factory=dict, repr=False, compare=False)

    def token_index(self, include_title: bool = True):
        """(tokens, token -> positions) for this document, built once."""
        cached = self._cache.get(include_title)
        if cached is None:
            body = f"{self.title}\n{self.text}" if include_title and self.title else self.text
            tokens = tokenize(body)
            positions: Dict[str, List[int]] = {}
            for pos, tok in enumerate(tokens):
                positions.setdefault(tok, []).append(pos)
            cached = (tokens, positions)
            self._cache[include_title] = cached
        return cached


def formulate(grouping: Grouping) -> QueryAst:
    """One OR group per cluster, groups joined by AND.

    Groups are ordered by descending cluster score and terms by ascending
    distance to their cluster's mean vector; ties fall back to term order.
    """
    keyed = []
    for idx, cluster in enumerate(grouping.clusters):
        rows = np.stack([w.components for w in cluster.members])
        centre = rows.mean(axis=0)
        dists = np.linalg.norm(rows - centre, axis=1)
        order = sorted(range(len(rows)), key=lambda k: (dists[k], cluster.members[k].token))
        terms: List[str] = []
        for k in order:
            tok = cluster.members[k].token
            if tok not in terms:
                terms.append(tok)
        keyed.append((-cluster_score(cluster), idx, tuple(terms)))
    keyed.sort()
    return QueryAst(tuple(t for _, _, t in keyed))


def render(ast: QueryAst) -> str:
    parts = []
    for g in ast.groups:
        for t in g:
            if "'" in t:
                raise ValueError(f"term contains a single quote: {t!r}")
        parts.append("(" + " OR ".join(f"'{t}'" for t in g) + ")")
    return " AND ".join(parts)


_KEYWORDS = {"AND", "OR"}
_UNSUPPORTED = {"NOT", "NEAR"}


def _lex(text: str):
    """Yield (kind, value, char_offset) with kind in ( ) TERM AND OR."""
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            yield ch, ch, i
            i += 1
        elif ch == "'":
            end = text.find("'", i + 1)
            if end < 0:
                raise _Err("unterminated quote", i)
            phrase = normalize_token(text[i + 1:end])
            if not phrase:
                raise _Err("empty term", i)
            yield "TERM", phrase, i
            i = end + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()'":
                j += 1
            word = text[i:j]
            upper = word.upper()
            if upper in _KEYWORDS:
                yield upper, upper, i
            elif upper in _UNSUPPORTED:
                raise _Err(f"unsupported operator {word!r}", i)
            else:
                yield "TERM", normalize_token(word), i
            i = j


class _Err(Exception):
    def __init__(self, message, char_offset):
        self.message = message
        self.char_offset = char_offset


def parse(text: str) -> QueryAst:
    """Parse an AND-of-OR query string into a normalized QueryAst.

    Raises:
        QueryParseError: carrying the UTF-8 byte offset of the problem.
    """
    try:
        return _parse(text)
    except _Err as err:
        offset = len(text[:err.char_offset].encode("utf-8"))
        raise QueryParseError(err.message, offset) from None


def _parse(text: str) -> QueryAst:
    tokens = list(_lex(text))
    end = len(text)
    pos = 0
    groups: List[Tuple[str, ...]] = []

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None, end)

    def parse_group():
        nonlocal pos
        kind, value, off = peek()
        if kind == "TERM":
            pos += 1
            return (value,)
        if kind != "(":
            raise _Err("unexpected token" if kind else "unexpected end of input", off)
        open_off = off
        pos += 1
        terms: List[str] = []
        expect_term = True
        while True:
            kind, value, off = peek()
            if kind is None:
                raise _Err("unbalanced parentheses", open_off)
            if expect_term:
                if kind == ")" and not terms:
                    raise _Err("empty group", open_off)
                if kind != "TERM":
                    raise _Err("unexpected token", off)
                if value not in terms:
                    terms.append(value)
                expect_term = False
                pos += 1
            elif kind == ")":
                pos += 1
                return tuple(terms)
            elif kind == "OR":
                expect_term = True
                pos += 1
            elif kind == "AND":
                raise _Err("ambiguous mixed operators", off)
            else:
                raise _Err("unexpected token", off)

    groups.append(parse_group())
    while pos < len(tokens):
        kind, value, off = peek()
        if kind == "AND":
            pos += 1
            groups.append(parse_group())
        elif kind == "OR":
            raise _Err("ambiguous mixed operators" if len(groups) > 1 or _has_and(tokens, pos)
                       else "OR outside parentheses", off)
        elif kind == ")":
            raise _Err("unbalanced parentheses", off)
        else:
            raise _Err("unexpected token", off)
    return QueryAst(tuple(groups))


def _has_and(tokens, start):
    depth = 0
    for kind, _, _ in tokens[start:]:
        if kind == "(":
            depth += 1
        elif kind == ")":
            depth -= 1
        elif kind == "AND" and depth == 0:
            return True
    return False


def term_matches(term: str, doc: Document, include_title: bool = True) -> bool:
    words = tokenize(term)
    if not words:
        return False
    tokens, positions = doc.token_index(include_title)
    starts = positions.get(words[0])
    if not starts:
        return False
    if len(words) == 1:
        return True
    k = len(words)
    return any(tokens[p:p + k] == words for p in starts)


def matches(ast: QueryAst, doc: Document, include_title: bool = True) -> bool:
    """True iff every group has at least one term occurring in the document."""
    return all(any(term_matches(t, doc, include_title) for t in g) for g in ast.groups)


def flat_or(terms: Sequence[str]) -> QueryAst:
    """Single OR group of the given terms (the unoptimized expansion)."""
    seen: List[str] = []
    for t in terms:
        n = normalize_token(t)
        if n and n not in seen:
            seen.append(n)
    return QueryAst((tuple(seen),))
