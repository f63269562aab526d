"""Runtime sweeps over iteration count and word count."""

import csv
import io
import statistics
import time
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

from .pipeline import Expander

DEFAULT_ITERATIONS = (5_000, 10_000, 20_000)
DEFAULT_WORDCOUNTS = (10, 25, 50)


@dataclass
class BenchRow:
    mode: str
    value: int
    vectors: int
    iterations: int
    mean_ms: float
    stddev_ms: float
    trials: int

    @property
    def per_iteration_us(self) -> float:
        return 1000.0 * self.mean_ms / self.iterations if self.iterations else float("nan")


def _time_expansion(expander: Expander, query: str, suggestions, seed: int, trials: int):
    expander.expand(query, seed, suggestions)  # warm-up, not recorded
    samples = []
    vectors = 0
    for _ in range(trials):
        t0 = time.perf_counter()
        exp = expander.expand(query, seed, suggestions)
        samples.append(1000.0 * (time.perf_counter() - t0))
        vectors = sum(len(c) for c in exp.grouping.clusters)
    sd = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return statistics.fmean(samples), sd, vectors


def run_bench(expander: Expander, query: str, mode: str, values: Optional[Sequence[int]] = None,
              trials: int = 3) -> List[BenchRow]:
    """Time the expansion of ``query`` across a sweep.

    ``iterations`` varies the optimizer iteration count at the configured
    word count; ``wordcount`` varies the number of suggestions kept (both
    fetched and selected) at the configured iteration count. Suggestions are
    fetched once per sweep point so provider latency stays out of the
    timings; model loading is never timed.
    """
    if mode not in ("iterations", "wordcount"):
        raise ValueError(f"unknown bench mode {mode!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    base_cfg = expander.config
    if values is None:
        values = DEFAULT_ITERATIONS if mode == "iterations" else DEFAULT_WORDCOUNTS
    rows = []
    for value in values:
        if mode == "iterations":
            cfg = replace(base_cfg, iterations=value)
        else:
            cfg = replace(base_cfg, top_n=value, max_suggestions=value)
        point = Expander(expander.model, expander.provider, cfg.validate())
        suggestions = point.suggest(query)
        mean, sd, vectors = _time_expansion(point, query, suggestions, cfg.seed, trials)
        rows.append(BenchRow(mode, value, vectors, cfg.iterations, mean, sd, trials))
    return rows


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    label = "iterations" if rows and rows[0].mode == "iterations" else "word_count"
    w.writerow([label, "vectors", "iterations_run", "mean_ms", "stddev_ms", "per_iteration_us", "trials"])
    for r in rows:
        w.writerow([r.value, r.vectors, r.iterations, f"{r.mean_ms:.4f}", f"{r.stddev_ms:.4f}",
                    f"{r.per_iteration_us:.6f}", r.trials])
    return buf.getvalue()
