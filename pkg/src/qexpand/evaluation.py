"""Relative evaluation of expansion techniques against human baselines.

Each technique's query is run over a fixed-order corpus, giving a boolean
scoring vector. Generated vectors are compared with the baseline vector:

* TP rate   = 100 * |other & base| / |base|
* FP rate   = 100 * |other & ~base| / |~base|
* accuracy  = (tp + tn) / (tp + tn + fp + fn)
"""

import csv
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Union

import numpy as np

from .boolean_query import Document, QueryAst, matches, parse, render
from .errors import CorpusError, QueryExpansionError, UndefinedRateError
from .pipeline import Expander, query_seed

logger = logging.getLogger(__name__)

TECHNIQUES = ("base", "datamuse", "xu")

csv.field_size_limit(min(sys.maxsize, 2**31 - 1))


@dataclass(frozen=True)
class ScoringVector:
    bits: tuple

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    def __len__(self):
        return len(self.bits)

    def count(self) -> int:
        return sum(self.bits)


@dataclass
class EvalMetrics:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    tp_rate: Optional[float] = None
    fp_rate: Optional[float] = None
    elapsed: float = 0.0


@dataclass(frozen=True)
class QueryRecord:
    raw_query: str
    baseline_expansion: Optional[str] = None


@dataclass
class Corpus:
    """Documents in file order plus the number of malformed rows skipped."""

    documents: List[Document]
    skipped: int = 0

    def __len__(self):
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, i):
        return self.documents[i]


def load_corpus(path: Union[str, Path], text_column: str = "content", id_column: Optional[str] = None,
                title_column: Optional[str] = None) -> Corpus:
    """Read a CSV corpus. Rows whose field count disagrees with the header are skipped."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot open corpus {path}: {exc}") from exc
    docs: List[Document] = []
    skipped = 0
    seen_ids = set()
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CorpusError(f"corpus {path} is empty")
        wanted = [c for c in (text_column, id_column, title_column) if c]
        missing = [c for c in wanted if c not in header]
        if missing:
            raise CorpusError(f"corpus {path} lacks column(s): {', '.join(missing)}")
        ti = header.index(text_column)
        ii = header.index(id_column) if id_column else None
        hi = header.index(title_column) if title_column else None
        while True:
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as exc:
                skipped += 1
                logger.warning("skipping malformed record at row %d: %s", reader.line_num, exc)
                continue
            if not row:
                continue
            if len(row) != len(header):
                skipped += 1
                logger.warning("skipping malformed record at row %d: %d fields, expected %d",
                               reader.line_num, len(row), len(header))
                continue
            doc_id = row[ii] if ii is not None else str(len(docs))
            if doc_id in seen_ids:
                raise CorpusError(f"duplicate document id {doc_id!r} at row {reader.line_num}")
            seen_ids.add(doc_id)
            docs.append(Document(doc_id, row[hi] if hi is not None else "", row[ti]))
    return Corpus(docs, skipped)


def load_queries(path: Union[str, Path]) -> List[QueryRecord]:
    """Read a ``query,expansion`` CSV; the expansion column is optional."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot open query file {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or "query" not in reader.fieldnames:
            raise CorpusError(f"query file {path} needs a 'query' column")
        records = []
        for row in reader:
            q = (row.get("query") or "").strip()
            if not q:
                continue
            exp = (row.get("expansion") or "").strip() or None
            records.append(QueryRecord(q, exp))
    return records


def score_corpus(ast: QueryAst, corpus: Sequence[Document], include_title: bool = True,
                 workers: int = 1) -> ScoringVector:
    docs = list(corpus)
    if workers <= 1 or len(docs) < 2:
        return ScoringVector(tuple(matches(ast, d, include_title) for d in docs))
    size = -(-len(docs) // workers)
    chunks = [docs[k:k + size] for k in range(0, len(docs), size)]
    with ThreadPoolExecutor(workers) as pool:
        parts = pool.map(lambda ch: [matches(ast, d, include_title) for d in ch], chunks)
        return ScoringVector(tuple(b for part in parts for b in part))


def _check(other: ScoringVector, base: ScoringVector):
    if len(other) != len(base):
        raise ValueError(f"scoring vectors differ in length: {len(other)} != {len(base)}")


def true_positive_rate(other: ScoringVector, base: ScoringVector) -> float:
    _check(other, base)
    selected = base.count()
    if selected == 0:
        raise UndefinedRateError("baseline selects no document; TP rate undefined")
    hit = sum(o and b for o, b in zip(other.bits, base.bits))
    return 100.0 * hit / selected


def false_positive_rate(other: ScoringVector, base: ScoringVector) -> float:
    _check(other, base)
    rejected = len(base) - base.count()
    if rejected == 0:
        raise UndefinedRateError("baseline selects every document; FP rate undefined")
    false_hit = sum(o and not b for o, b in zip(other.bits, base.bits))
    return 100.0 * false_hit / rejected


def confusion_and_accuracy(other: ScoringVector, base: ScoringVector) -> EvalMetrics:
    _check(other, base)
    if not len(base):
        raise UndefinedRateError("empty corpus; accuracy undefined")
    tp = fp = fn = tn = 0
    for o, b in zip(other.bits, base.bits):
        if o and b:
            tp += 1
        elif o:
            fp += 1
        elif b:
            fn += 1
        else:
            tn += 1
    metrics = EvalMetrics(tp, tn, fp, fn, (tp + tn) / (tp + tn + fp + fn))
    if tp + fn:
        metrics.tp_rate = 100.0 * tp / (tp + fn)
    if fp + tn:
        metrics.fp_rate = 100.0 * fp / (fp + tn)
    return metrics


def five_number(values: Sequence[float]) -> Optional[Dict[str, float]]:
    """min, quartiles (linear interpolation) and max; None for no data."""
    if not values:
        return None
    q = np.percentile(np.asarray(values, dtype=float), [0, 25, 50, 75, 100])
    return dict(zip(("min", "q1", "median", "q3", "max"), (float(x) for x in q)))


@dataclass
class QueryResult:
    index: int
    query: str
    baseline: Optional[str]
    expansions: Dict[str, str] = field(default_factory=dict)
    metrics: Dict[str, EvalMetrics] = field(default_factory=dict)
    error: Optional[str] = None


@dataclass
class EvalReport:
    corpus_size: int
    records: int
    results: List[QueryResult]
    settings: Dict[str, object] = field(default_factory=dict)

    @property
    def evaluated(self) -> List[QueryResult]:
        return [r for r in self.results if r.error is None and r.metrics]

    def aggregate(self) -> Dict[str, dict]:
        out = {}
        done = self.evaluated
        for tech in TECHNIQUES:
            ms = [r.metrics[tech] for r in done]
            tps = [m.tp_rate for m in ms if m.tp_rate is not None]
            fps = [m.fp_rate for m in ms if m.fp_rate is not None]
            out[tech] = {
                "queries": len(ms),
                "mean_accuracy": float(np.mean([m.accuracy for m in ms])) if ms else None,
                "mean_elapsed_s": float(np.mean([m.elapsed for m in ms])) if ms else None,
                "tp_rate": five_number(tps),
                "fp_rate": five_number(fps),
                "tp_rate_undefined": len(ms) - len(tps),
                "fp_rate_undefined": len(ms) - len(fps),
            }
        return out

    def to_dict(self) -> dict:
        rows = []
        for r in self.results:
            rows.append({
                "index": r.index,
                "query": r.query,
                "baseline": r.baseline,
                "expansions": r.expansions,
                "metrics": {k: _metrics_dict(m) for k, m in r.metrics.items()},
                "error": r.error,
            })
        return {
            "settings": self.settings,
            "corpus_size": self.corpus_size,
            "records": self.records,
            "evaluated": len(self.evaluated),
            "aggregate": self.aggregate(),
            "queries": rows,
            "errors": [{"index": r.index, "query": r.query, "error": r.error}
                       for r in self.results if r.error is not None],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def write_csv(self, path: Union[str, Path]):
        cols = ["index", "query", "technique", "tp", "tn", "fp", "fn",
                "tp_rate", "fp_rate", "accuracy", "elapsed_s", "error"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for r in self.results:
                if r.error is not None:
                    w.writerow([r.index, r.query, "", "", "", "", "", "", "", "", "", r.error])
                    continue
                for tech, m in r.metrics.items():
                    w.writerow([r.index, r.query, tech, m.tp, m.tn, m.fp, m.fn,
                                m.tp_rate, m.fp_rate, m.accuracy, m.elapsed, ""])


def _metrics_dict(m: EvalMetrics) -> dict:
    d = asdict(m)
    d["elapsed_s"] = d.pop("elapsed")
    return d


def evaluate_record(index: int, record: QueryRecord, corpus: Sequence[Document], expander: Expander,
                    seed: int, include_title: bool = True) -> QueryResult:
    """Score the baseline, the flat suggestion OR and the optimized expansion."""
    result = QueryResult(index, record.raw_query, record.baseline_expansion)
    try:
        base_ast = parse(record.baseline_expansion)
        base = score_corpus(base_ast, corpus, include_title)

        t0 = time.perf_counter()
        suggestions = expander.suggest(record.raw_query)
        fetch = time.perf_counter() - t0

        t0 = time.perf_counter()
        flat_ast = expander.flat_expansion(record.raw_query, suggestions)
        flat = score_corpus(flat_ast, corpus, include_title)
        flat_elapsed = fetch + time.perf_counter() - t0

        t0 = time.perf_counter()
        expansion = expander.expand(record.raw_query, query_seed(seed, index), suggestions)
        xu = score_corpus(expansion.ast, corpus, include_title)
        xu_elapsed = fetch + time.perf_counter() - t0
    except QueryExpansionError as exc:
        result.error = f"{type(exc).__name__}: {exc}"
        return result

    result.expansions = {"base": render(base_ast), "datamuse": render(flat_ast), "xu": expansion.text}
    for tech, vec, elapsed in (("base", base, 0.0), ("datamuse", flat, flat_elapsed), ("xu", xu, xu_elapsed)):
        m = confusion_and_accuracy(vec, base)
        m.elapsed = elapsed
        result.metrics[tech] = m
    return result


def evaluate_batch(records: Sequence[QueryRecord], corpus: Sequence[Document], expander: Expander,
                   seed: int = 0, threads: int = 1, include_title: bool = True) -> EvalReport:
    """Evaluate every record that has a baseline; failures are collected, not raised.

    Results come back in input order whatever the completion order.
    """
    indexed = [(i, r) for i, r in enumerate(records) if r.baseline_expansion]
    if not indexed:
        raise CorpusError("no query record has a baseline expansion")

    def run(item):
        i, rec = item
        return evaluate_record(i, rec, corpus, expander, seed, include_title)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, indexed))
    else:
        results = [run(item) for item in indexed]

    cfg = expander.config
    settings = {
        "provider": cfg.provider,
        "max_suggestions": cfg.max_suggestions,
        "top_n": cfg.top_n,
        "clusters": cfg.clusters,
        "iterations": cfg.iterations,
        "seed": seed,
        "include_title": include_title,
    }
    return EvalReport(len(corpus), len(records), results, settings)
