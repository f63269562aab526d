"""Cluster scoring and partition search over word vectors.

A cluster scores ``|sum(c_i)| / sum(|c_i|)``: 1 for vectors pointing the
same way, 0 for vectors that cancel. A grouping scores the sum of its
cluster scores, and the search looks for the m-way partition maximizing it.
"""

import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ClusteringError
from .vector_model import WordVector

BRUTE_FORCE_CAP = 10**6
# Ratios this close to 1 are rounding error on colinear members.
_SNAP_TO_ONE = 1e-14
_CHUNK = 1 << 16


@dataclass(frozen=True)
class Cluster:
    members: Tuple[WordVector, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ClusteringError("cluster must be non-empty")

    @property
    def tokens(self) -> List[str]:
        return [w.token for w in self.members]

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class Grouping:
    """A partition of word vectors into clusters plus its cached group score.

    ``trace`` holds the best score seen after each improvement when the
    grouping came out of :func:`optimize_grouping`.
    """

    clusters: Tuple[Cluster, ...]
    score: float
    trace: Tuple[float, ...] = field(default=(), repr=False, compare=False)

    @property
    def m(self) -> int:
        return len(self.clusters)


def _rows_score(rows: np.ndarray) -> float:
    num = float(np.linalg.norm(rows.sum(axis=0)))
    den = math.fsum(np.linalg.norm(rows, axis=1).tolist())
    if den == 0.0:
        raise ClusteringError("zero-norm member in cluster")
    ratio = num / den
    if ratio > 1.0 - _SNAP_TO_ONE:
        return 1.0
    return ratio


def cluster_score(c: Cluster) -> float:
    """Score in [0, 1] measuring how well the members point the same way."""
    rows = np.stack([w.components for w in c.members])
    if not np.all(np.any(rows, axis=1)):
        raise ClusteringError("zero-norm member in cluster")
    return _rows_score(rows)


def group_score(g: Grouping) -> float:
    return math.fsum(cluster_score(c) for c in g.clusters)


def _canonical(vectors: Sequence[WordVector], labels: Sequence[int], m: int) -> Grouping:
    # Clusters ordered by their lowest input index, members by input index, so
    # identical partitions always produce bit-identical scores.
    buckets: List[List[int]] = [[] for _ in range(m)]
    for idx, lab in enumerate(labels):
        buckets[lab].append(idx)
    buckets = sorted((b for b in buckets if b), key=lambda b: b[0])
    clusters = tuple(Cluster(tuple(vectors[i] for i in b)) for b in buckets)
    g = Grouping(clusters, 0.0)
    return Grouping(clusters, group_score(g))


def _validate(vectors: Sequence[WordVector], m: int) -> np.ndarray:
    if m < 1:
        raise ClusteringError(f"number of clusters must be >= 1, got {m}")
    if not vectors:
        raise ClusteringError("no vectors to cluster")
    if m > len(vectors):
        raise ClusteringError(f"cannot form {m} clusters from {len(vectors)} vectors")
    dims = {v.dimension for v in vectors}
    if len(dims) != 1:
        raise ClusteringError(f"mixed vector dimensions: {sorted(dims)}")
    arr = np.stack([v.components for v in vectors])
    if not np.all(np.any(arr, axis=1)):
        raise ClusteringError("zero-norm vector in clustering input")
    return arr


def default_patience(n: int, m: int) -> int:
    """Non-improving proposals tolerated before a restart."""
    return max(32, 6 * n * m)


def optimize_grouping(vectors: Sequence[WordVector], m: int, iterations: int, seed: int,
                      patience: Optional[int] = None) -> Grouping:
    """Seeded hill-climbing search for the highest-scoring m-way partition.

    The start state deals a seeded shuffle of the vectors round-robin over
    the clusters. Each iteration proposes moving one random vector to a
    different random cluster and accepts the move only if the total score
    strictly rises and no cluster is left empty. After ``patience``
    consecutive rejections the climb restarts from a fresh deal; the best
    partition seen is returned.

    A proposal is scored from a precomputed Gram matrix by summing dot
    products over the two affected clusters, so one iteration costs time
    proportional to their combined size.
    """
    arr = _validate(vectors, m)
    if iterations < 0:
        raise ClusteringError("iterations must be >= 0")
    if seed < 0:
        raise ClusteringError("seed must be non-negative")
    n = len(vectors)
    if patience is None:
        patience = default_patience(n, m)

    gram_np = arr @ arr.T
    gram = gram_np.tolist()
    diag = np.diag(gram_np).tolist()
    norms = np.sqrt(np.diag(gram_np)).tolist()
    rng = np.random.default_rng(seed)

    def deal():
        labels = [0] * n
        for k, i in enumerate(rng.permutation(n).tolist()):
            labels[i] = k % m
        members = [[i for i in range(n) if labels[i] == c] for c in range(m)]
        sq = [math.fsum(gram[i][j] for i in ms for j in ms) for ms in members]
        nsum = [math.fsum(norms[i] for i in ms) for ms in members]
        scores = [math.sqrt(max(sq[c], 0.0)) / nsum[c] for c in range(m)]
        return labels, members, sq, nsum, scores

    labels, members, sq, nsum, scores = deal()
    current = math.fsum(scores)
    best, best_labels = current, labels[:]
    trace = [best]
    stall = 0

    done = 0
    while done < iterations:
        chunk = min(_CHUNK, iterations - done)
        picks = rng.integers(0, n, size=chunk).tolist()
        shifts = rng.integers(1, m, size=chunk).tolist() if m > 1 else [0] * chunk
        done += chunk
        for i, shift in zip(picks, shifts):
            src = labels[i]
            src_members = members[src]
            if m == 1 or len(src_members) == 1:
                stall += 1
            else:
                dst = (src + shift) % m
                gi = gram[i]
                g_ii = diag[i]
                # |sum_src - v_i|^2 and |sum_dst + v_i|^2 via dot products with v_i
                src_sq = sq[src] - 2.0 * sum([gi[j] for j in src_members]) + g_ii
                dst_sq = sq[dst] + 2.0 * sum([gi[j] for j in members[dst]]) + g_ii
                src_score = math.sqrt(src_sq if src_sq > 0.0 else 0.0) / (nsum[src] - norms[i])
                dst_score = math.sqrt(dst_sq) / (nsum[dst] + norms[i])
                delta = src_score + dst_score - scores[src] - scores[dst]
                if delta > 0.0:
                    labels[i] = dst
                    src_members.remove(i)
                    members[dst].append(i)
                    sq[src], sq[dst] = src_sq, dst_sq
                    nsum[src] -= norms[i]
                    nsum[dst] += norms[i]
                    scores[src], scores[dst] = src_score, dst_score
                    current += delta
                    stall = 0
                    if current > best:
                        best, best_labels = current, labels[:]
                        trace.append(best)
                    continue
                stall += 1
            if stall >= patience:
                labels, members, sq, nsum, scores = deal()
                current = math.fsum(scores)
                stall = 0
                if current > best:
                    best, best_labels = current, labels[:]
                    trace.append(best)

    result = _canonical(vectors, best_labels, m)
    return Grouping(result.clusters, result.score, tuple(trace))


def stirling2(n: int, k: int) -> int:
    """Number of partitions of n items into k non-empty blocks."""
    if k < 0 or n < 0:
        return 0
    row = [1] + [0] * k
    for i in range(1, n + 1):
        new = [0] * (k + 1)
        for j in range(1, min(i, k) + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return row[k]


def set_partitions(n: int, m: int) -> Iterator[List[int]]:
    """Restricted-growth label strings of every partition of n items into m blocks."""
    labels = [0] * n

    def rec(i: int, used: int):
        if n - i < m - used:
            return
        if i == n:
            if used == m:
                yield labels[:]
            return
        for lab in range(min(used + 1, m)):
            labels[i] = lab
            yield from rec(i + 1, used + (lab == used))

    if n == 0:
        return
    labels[0] = 0
    yield from rec(1, 1)


def brute_force_grouping(vectors: Sequence[WordVector], m: int, cap: int = BRUTE_FORCE_CAP) -> Grouping:
    """Exact optimum by enumerating every partition into m non-empty clusters."""
    arr = _validate(vectors, m)
    count = stirling2(len(vectors), m)
    if count > cap:
        raise ClusteringError(f"{count} partitions exceeds enumeration cap {cap}")
    best_score, best_labels = -1.0, None
    for labels in set_partitions(len(vectors), m):
        total = math.fsum(
            _rows_score(arr[[i for i, lab in enumerate(labels) if lab == c]]) for c in range(m)
        )
        if total > best_score:
            best_score, best_labels = total, labels
    return _canonical(vectors, best_labels, m)
