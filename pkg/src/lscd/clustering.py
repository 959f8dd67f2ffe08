"""Correlation clustering of usage graphs.

The conflict loss of a clustering is the sum of positive shifted edge weights
across clusters plus absolute negative shifted weights within clusters.
Minimizing it is NP-hard, but usage graphs are small (<= 200 nodes), so a
seeded simulated-annealing search with a greedy polish finds the optimum in
practice; an exhaustive partition search serves as oracle for small graphs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .graph import GraphError, UsageGraph

INITIAL_STATES = ("random", "singletons", "positive-components")


class ClusteringError(ValueError):
    pass


@dataclass(frozen=True)
class Clustering:
    """A partition of node ids into clusters, stored as id -> cluster index."""

    assignment: dict[str, int]

    @property
    def clusters(self) -> list[frozenset[str]]:
        by_label: dict[int, set[str]] = {}
        for nid, c in self.assignment.items():
            by_label.setdefault(c, set()).add(nid)
        return [frozenset(by_label[c]) for c in sorted(by_label)]

    def multi_clusters(self) -> list[frozenset[str]]:
        return [c for c in self.clusters if len(c) >= 2]

    def label_of(self, node_id: str) -> int:
        return self.assignment[node_id]

    def relabeled(self) -> "Clustering":
        """Canonical labels: clusters numbered by first appearance in sorted id order."""
        mapping: dict[int, int] = {}
        assignment = {}
        for nid in sorted(self.assignment):
            old = self.assignment[nid]
            if old not in mapping:
                mapping[old] = len(mapping)
            assignment[nid] = mapping[old]
        return Clustering(assignment)


@dataclass(frozen=True)
class ClusterConfig:
    max_clusters_values: tuple[int, ...] = (10,)
    restarts: int = 5
    initial_states: tuple[str, ...] = INITIAL_STATES
    sa_initial_temp: float = 1.0
    sa_decay: float = 0.99
    sa_iterations: int = 20_000
    seed: int = 0

    def __post_init__(self):
        if any(m < 1 for m in self.max_clusters_values):
            raise ClusteringError("max_clusters values must be >= 1")
        if self.restarts < 1:
            raise ClusteringError("restarts must be >= 1")
        if not (0.0 < self.sa_decay < 1.0):
            raise ClusteringError("sa_decay must be in (0, 1)")
        if self.sa_iterations < 1:
            raise ClusteringError("sa_iterations must be >= 1")
        for s in self.initial_states:
            if s not in INITIAL_STATES:
                raise ClusteringError(f"unknown initial state {s!r}")


# ---------------------------------------------------------------------------
# loss and conflicts


def _edge_list(graph: UsageGraph) -> list[tuple[str, str, float]]:
    out = []
    for (a, b), e in graph.weighted_edges().items():
        out.append((a, b, e.shifted_weight))
    return out


def loss(graph: UsageGraph, c: Clustering) -> float:
    """Positive weight across clusters plus |negative| weight within clusters."""
    total = 0.0
    for a, b, w in _edge_list(graph):
        if a not in c.assignment or b not in c.assignment:
            missing = a if a not in c.assignment else b
            raise ClusteringError(f"node missing from assignment: {missing!r}")
        same = c.assignment[a] == c.assignment[b]
        if w >= 0 and not same:
            total += w
        elif w < 0 and same:
            total += -w
    return total


def normalized_loss(graph: UsageGraph, c: Clustering) -> float:
    """Loss divided by the sum of absolute shifted weights (the conflict ceiling)."""
    denom = sum(abs(w) for _, _, w in _edge_list(graph))
    if denom == 0.0:
        raise ClusteringError("graph has no weighted edges")
    return loss(graph, c) / denom


def conflicts(graph: UsageGraph, c: Clustering
              ) -> tuple[set[tuple[str, str]], set[tuple[str, str]]]:
    """Conflicting edges: (positive across clusters, negative within clusters)."""
    across_positive: set[tuple[str, str]] = set()
    within_negative: set[tuple[str, str]] = set()
    for a, b, w in _edge_list(graph):
        same = c.assignment[a] == c.assignment[b]
        if w >= 0 and not same:
            across_positive.add((a, b) if a < b else (b, a))
        elif w < 0 and same:
            within_negative.add((a, b) if a < b else (b, a))
    return across_positive, within_negative


# ---------------------------------------------------------------------------
# optimization


class _Problem:
    """Array view of the weighted component of a usage graph."""

    def __init__(self, graph: UsageGraph):
        weighted = sorted(graph.weighted_node_ids())
        self.ids = weighted
        self.index = {nid: i for i, nid in enumerate(weighted)}
        self.n = len(weighted)
        self.adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        self.edges: list[tuple[int, int, float]] = []
        for a, b, w in _edge_list(graph):
            i, j = self.index[a], self.index[b]
            self.edges.append((i, j, w))
            self.adj[i].append((j, w))
            self.adj[j].append((i, w))

    def loss_of(self, labels: Sequence[int]) -> float:
        total = 0.0
        for i, j, w in self.edges:
            same = labels[i] == labels[j]
            if w >= 0 and not same:
                total += w
            elif w < 0 and same:
                total += -w
        return total

    def move_delta(self, labels: Sequence[int], u: int, target: int) -> float:
        cur = labels[u]
        delta = 0.0
        for v, w in self.adj[u]:
            lv = labels[v]
            # cost of this edge before/after the move
            before = (-w if (w < 0 and lv == cur) else (w if (w >= 0 and lv != cur) else 0.0))
            after = (-w if (w < 0 and lv == target) else (w if (w >= 0 and lv != target) else 0.0))
            delta += after - before
        return delta


def _initial_labels(problem: _Problem, state: str, m: int, rng: random.Random) -> list[int]:
    n = problem.n
    if state == "random":
        return [rng.randrange(min(m, n)) for _ in range(n)]
    if state == "singletons":
        return list(range(n))
    if state == "positive-components":
        # connected components of the positive-edge subgraph
        labels = [-1] * n
        comp = 0
        for start in range(n):
            if labels[start] != -1:
                continue
            stack = [start]
            labels[start] = comp
            while stack:
                u = stack.pop()
                for v, w in problem.adj[u]:
                    if w >= 0 and labels[v] == -1:
                        labels[v] = comp
                        stack.append(v)
            comp += 1
        return labels
    raise ClusteringError(f"unknown initial state {state!r}")


def _free_label(labels: Sequence[int]) -> int:
    used = set(labels)
    c = 0
    while c in used:
        c += 1
    return c


def _anneal(problem: _Problem, labels: list[int], m: int, rng: random.Random,
            temp: float, decay: float, iterations: int) -> tuple[list[int], float]:
    """Single-node reassignment moves: to an adjacent cluster, or a fresh one
    while the non-empty cluster count is below the cap."""
    labels = list(labels)
    cur = problem.loss_of(labels)
    best = list(labels)
    best_loss = cur
    n = problem.n
    t = temp
    for _ in range(iterations):
        u = rng.randrange(n)
        targets = sorted({labels[v] for v, _ in problem.adj[u]} - {labels[u]})
        n_clusters = len(set(labels))
        if n_clusters < m and sum(1 for l in labels if l == labels[u]) > 1:
            targets.append(_free_label(labels))
        if not targets:
            t *= decay
            continue
        target = targets[rng.randrange(len(targets))]
        delta = problem.move_delta(labels, u, target)
        if delta <= 0 or (t > 1e-12 and rng.random() < math.exp(-delta / t)):
            labels[u] = target
            cur += delta
            if cur < best_loss - 1e-12:
                best_loss = cur
                best = list(labels)
        t *= decay
    return best, best_loss


def _move_sweeps(problem: _Problem, labels: list[int], m: int,
                 max_sweeps: int = 100) -> bool:
    """Greedy best-single-move descent; returns whether anything moved."""
    moved = False
    for _ in range(max_sweeps):
        improved = False
        for u in range(problem.n):
            cur = labels[u]
            targets = sorted({labels[v] for v, _ in problem.adj[u]} - {cur})
            if (len(set(labels)) < m
                    and sum(1 for l in labels if l == cur) > 1):
                targets.append(_free_label(labels))
            best_c = cur
            best_delta = 0.0
            for c in targets:
                d = problem.move_delta(labels, u, c)
                if d < best_delta - 1e-12:
                    best_delta = d
                    best_c = c
            if best_c != cur:
                labels[u] = best_c
                improved = True
                moved = True
        if not improved:
            break
    return moved


def _best_merge(problem: _Problem, labels: list[int]) -> Optional[tuple[int, int, float]]:
    """Most loss-reducing pair-of-clusters merge, if any.

    Merging clusters a and b turns their positive cross edges from cut cost
    into nothing and their negative cross edges into within-cluster cost.
    """
    between: dict[tuple[int, int], float] = {}
    for i, j, w in problem.edges:
        a, b = labels[i], labels[j]
        if a == b:
            continue
        key = (a, b) if a < b else (b, a)
        # negative edges become within-cost (+|w|), positives stop being cut (-w)
        between[key] = between.get(key, 0.0) - w
    if not between:
        return None
    (a, b), delta = min(between.items(), key=lambda kv: (kv[1], kv[0]))
    if delta < -1e-12:
        return a, b, delta
    return None


def _hill_climb(problem: _Problem, labels: list[int], m: int) -> tuple[list[int], float]:
    """Local search alternating single-node moves with whole-cluster merges."""
    labels = list(labels)
    while True:
        _move_sweeps(problem, labels, m)
        merge = _best_merge(problem, labels)
        if merge is None:
            break
        a, b, _ = merge
        for u in range(problem.n):
            if labels[u] == b:
                labels[u] = a
    _enforce_cap(problem, labels, m)
    return labels, problem.loss_of(labels)


def _enforce_cap(problem: _Problem, labels: list[int], m: int) -> None:
    """Merge the cheapest cluster pairs until at most m clusters remain."""
    while len(set(labels)) > m:
        present = sorted(set(labels))
        between: dict[tuple[int, int], float] = {(a, b): 0.0
                                                 for i, a in enumerate(present)
                                                 for b in present[i + 1:]}
        for i, j, w in problem.edges:
            a, b = labels[i], labels[j]
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            # positive cross edges stop costing w, negative ones start costing |w|
            between[key] += -w
        (a, b), _ = min(between.items(), key=lambda kv: (kv[1], kv[0]))
        for u in range(problem.n):
            if labels[u] == b:
                labels[u] = a


def _candidate_key(labels: Sequence[int]) -> tuple:
    # canonical relabeling by first appearance
    mapping: dict[int, int] = {}
    canon = []
    for l in labels:
        if l not in mapping:
            mapping[l] = len(mapping)
        canon.append(mapping[l])
    return (len(mapping), tuple(canon))


def cluster(graph: UsageGraph, cfg: ClusterConfig = ClusterConfig()) -> Clustering:
    """Minimize the conflict loss; deterministic for a fixed (graph, cfg)."""
    if not graph.nodes:
        return Clustering({})
    problem = _Problem(graph)
    isolated = sorted(set(graph.nodes) - set(problem.ids))
    if problem.n == 0:
        return Clustering({nid: i for i, nid in enumerate(isolated)})

    n = problem.n
    candidates: list[tuple[float, tuple, list[int]]] = []

    def add_candidate(labels: Sequence[int], l: Optional[float] = None) -> None:
        if l is None:
            l = problem.loss_of(labels)
        nclusters, canon = _candidate_key(labels)
        candidates.append((l, (nclusters, canon), list(canon)))

    # trivial bounds: all-singletons and one-cluster are always dominated
    add_candidate(list(range(n)))
    add_candidate([0] * n)

    for mi, m in enumerate(cfg.max_clusters_values):
        m_eff = min(m, n)
        for si, state in enumerate(cfg.initial_states):
            for r in range(cfg.restarts):
                seed = (cfg.seed * 1_000_003 + mi * 10_007 + si * 101 + r) & 0x7FFFFFFF
                rng = random.Random(seed)
                labels = _initial_labels(problem, state, m_eff, rng)
                labels, _ = _anneal(problem, labels, m_eff, rng,
                                    cfg.sa_initial_temp, cfg.sa_decay, cfg.sa_iterations)
                labels, l = _hill_climb(problem, labels, m_eff)
                add_candidate(labels, l)

    best_loss, best_key, best_canon = min(candidates, key=lambda c: (c[0], c[1]))
    assignment = {nid: best_canon[i] for i, nid in enumerate(problem.ids)}
    next_label = max(assignment.values(), default=-1) + 1
    for nid in isolated:
        assignment[nid] = next_label
        next_label += 1
    return Clustering(assignment).relabeled()


# ---------------------------------------------------------------------------
# exhaustive oracle


def _partitions(n: int) -> Iterable[list[int]]:
    """All set partitions of range(n) as restricted growth strings."""
    labels = [0] * n
    maxes = [0] * n

    def rec(i: int):
        if i == n:
            yield list(labels)
            return
        cap = maxes[i - 1] + 1 if i > 0 else 0
        for c in range(cap + 1):
            labels[i] = c
            maxes[i] = max(maxes[i - 1], c) if i > 0 else c
            yield from rec(i + 1)

    yield from rec(0)


def brute_force_cluster(graph: UsageGraph, max_nodes: int = 12) -> Clustering:
    """Global minimizer of the conflict loss over all partitions (small graphs)."""
    problem = _Problem(graph)
    isolated = sorted(set(graph.nodes) - set(problem.ids))
    n = problem.n
    if n > max_nodes:
        raise ClusteringError(f"brute force limited to {max_nodes} nodes, got {n}")
    if n == 0:
        return Clustering({nid: i for i, nid in enumerate(isolated)})
    all_labels = np.array(list(_partitions(n)), dtype=np.int64)
    if problem.edges:
        i_idx = np.array([i for i, _, _ in problem.edges])
        j_idx = np.array([j for _, j, _ in problem.edges])
        w = np.array([w for _, _, w in problem.edges])
        same = all_labels[:, i_idx] == all_labels[:, j_idx]
        pos = np.where(w >= 0, w, 0.0)
        neg = np.where(w < 0, -w, 0.0)
        losses = (~same) @ pos + same @ neg
    else:
        losses = np.zeros(len(all_labels))
    nclusters = all_labels.max(axis=1) + 1
    best = None
    best_key = None
    min_loss = losses.min()
    for idx in np.flatnonzero(losses <= min_loss + 1e-12):
        labels = all_labels[idx]
        key = (int(nclusters[idx]), tuple(int(x) for x in labels))
        if best_key is None or key < best_key:
            best_key = key
            best = labels
    assignment = {nid: int(best[i]) for i, nid in enumerate(problem.ids)}
    next_label = max(assignment.values(), default=-1) + 1
    for nid in isolated:
        assignment[nid] = next_label
        next_label += 1
    return Clustering(assignment).relabeled()
