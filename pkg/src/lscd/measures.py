"""Change scores derived from clustered usage graphs.

Each cluster of the full graph is read as one sense.  Counting the uses per
cluster separately for the two epochs yields two sense frequency
distributions, from which the binary change label (a sense attested at most k
times in one corpus but at least n times in the other) and the graded change
score (Jensen-Shannon distance between the normalized distributions, log base
2) follow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import Clustering
from .graph import UseNode, UsageGraph


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class SenseFrequencyDistribution:
    """Per-cluster use counts for the two epochs; shared index space."""

    counts_c1: tuple[int, ...]
    counts_c2: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts_c1) != len(self.counts_c2):
            raise MeasureError("distributions must share index space")


@dataclass(frozen=True)
class ChangeScores:
    word: str
    binary: int
    graded: float
    k: int
    n: int


def sfd_from_clustering(graph: UsageGraph, clustering: Clustering
                        ) -> SenseFrequencyDistribution:
    """Count C1/C2 uses per cluster; sense-definition nodes are not counted."""
    labels = sorted(set(clustering.assignment.values()))
    pos = {c: i for i, c in enumerate(labels)}
    c1 = [0] * len(labels)
    c2 = [0] * len(labels)
    for nid, c in clustering.assignment.items():
        node = graph.nodes.get(nid)
        if not isinstance(node, UseNode):
            continue
        if node.corpus == "C1":
            c1[pos[c]] += 1
        else:
            c2[pos[c]] += 1
    return SenseFrequencyDistribution(tuple(c1), tuple(c2))


def thresholds_for_sample_size(size: int) -> tuple[int, int]:
    """Frequency thresholds (k, n) for the binary change test, by sample size."""
    if size < 1:
        raise MeasureError("sample size must be >= 1")
    return (0, 1) if size <= 30 else (2, 5)


def binary_change(d, e, k: int, n: int) -> int:
    """1 iff some sense is attested <= k times in one corpus and >= n in the other."""
    if len(d) != len(e):
        raise MeasureError("distributions must share index space")
    if k >= n:
        raise MeasureError("k must be smaller than n")
    for di, ei in zip(d, e):
        if (di <= k and ei >= n) or (ei <= k and di >= n):
            return 1
    return 0


def graded_change(d, e) -> float:
    """Jensen-Shannon distance between the normalized distributions (base 2)."""
    if len(d) != len(e):
        raise MeasureError("distributions must share index space")
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    keep = (d > 0) | (e > 0)
    d, e = d[keep], e[keep]
    if d.sum() == 0 or e.sum() == 0:
        raise MeasureError("empty distribution")
    p = d / d.sum()
    q = e / e.sum()
    m = (p + q) / 2.0

    def kl(a: np.ndarray, b: np.ndarray) -> float:
        mask = a > 0
        return float(np.sum(a[mask] * np.log2(a[mask] / b[mask])))

    jsd_sq = 0.5 * kl(p, m) + 0.5 * kl(q, m)
    return float(np.sqrt(max(jsd_sq, 0.0)))


def change_scores(graph: UsageGraph, clustering: Clustering, word: str | None = None
                  ) -> ChangeScores:
    """Full derivation: SFD, thresholds by the larger epoch sample, B and G."""
    sfd = sfd_from_clustering(graph, clustering)
    size = max(sum(sfd.counts_c1), sum(sfd.counts_c2))
    k, n = thresholds_for_sample_size(size)
    return ChangeScores(
        word=word or graph.word,
        binary=binary_change(sfd.counts_c1, sfd.counts_c2, k, n),
        graded=graded_change(sfd.counts_c1, sfd.counts_c2),
        k=k,
        n=n,
    )
