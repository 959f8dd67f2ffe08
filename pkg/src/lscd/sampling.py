"""Round-based active sampling of the pairs to annotate next.

Round 1 explores a small node sample with a spanning random walk.  Later
rounds combine four sources: combination pairs (each unassigned use against
every multi-cluster it has not met), exploration walks over the
non-assignable uses, redistribution of annotator disagreements, confirmation
pairs, and fresh pairs around clustering conflicts.  Sampling stops once
every pair of clusters shares at least one annotated edge.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

from .clustering import Clustering, conflicts
from .graph import UsageGraph, pair_key

REASONS = ("combine", "explore", "disagree", "conflict", "confirm")


class SamplingError(ValueError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    node_fraction: float = 0.10
    edge_fraction: float = 0.30
    min_round_one_nodes: int = 5
    confirm_fraction: float = 0.02
    multi_annotation_rate: float = 0.5
    roster: tuple[str, ...] = ()
    max_rounds: int = 5
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.node_fraction <= 1.0) or not (0.0 < self.edge_fraction <= 1.0):
            raise SamplingError("fractions must be in (0, 1]")
        if not (0.0 <= self.multi_annotation_rate <= 1.0):
            raise SamplingError("multi_annotation_rate must be in [0, 1]")


@dataclass(frozen=True)
class RoundPlan:
    round: int
    pairs: tuple[tuple[str, str], ...]
    assignments: dict[tuple[str, str], tuple[str, ...]] = field(default_factory=dict)
    reasons: dict[tuple[str, str], str] = field(default_factory=dict)
    redistributions: frozenset[tuple[str, str]] = frozenset()


@dataclass(frozen=True)
class Done:
    """Terminal sampler outcome; no more pairs to annotate."""

    reason: str = "converged"


@dataclass(frozen=True)
class SamplerState:
    graph: UsageGraph
    clustering: Clustering
    round: int
    config: SamplerConfig


def _pair_budget(n: int, fraction: float) -> int:
    return math.ceil(fraction * n * (n - 1) / 2)


def _walk_pairs(nodes: Sequence[str], rng: random.Random) -> list[tuple[str, str]]:
    """Spanning random-walk path: adjacent pairs of a random permutation."""
    order = list(nodes)
    rng.shuffle(order)
    return [pair_key(a, b) for a, b in zip(order, order[1:])]


def round_one(nodes, cfg: SamplerConfig, seed: int) -> RoundPlan:
    """Initial plan: 10% node sample, spanning walk plus random fill pairs."""
    ids = sorted(nodes)
    if len(ids) < 2:
        raise SamplingError("need at least 2 nodes")
    rng = random.Random(seed)
    m = min(len(ids), max(cfg.min_round_one_nodes,
                          math.ceil(cfg.node_fraction * len(ids))))
    sample = sorted(rng.sample(ids, m))
    budget = _pair_budget(m, cfg.edge_fraction)
    pairs = _walk_pairs(sample, rng)
    chosen = set(pairs)
    # fill with random extra pairs up to the budget (walk may already exceed it)
    all_pairs = [pair_key(a, b) for i, a in enumerate(sample) for b in sample[i + 1:]]
    rng.shuffle(all_pairs)
    for p in all_pairs:
        if len(pairs) >= budget:
            break
        if p not in chosen:
            chosen.add(p)
            pairs.append(p)
    return RoundPlan(round=1, pairs=tuple(pairs),
                     reasons={p: "explore" for p in pairs})


def _has_edge_into(graph: UsageGraph, node: str, cluster: frozenset[str]) -> bool:
    judged = graph.judged_pairs()
    return any(pair_key(node, other) in judged for other in cluster if other != node)


def combination_step(graph: UsageGraph, clustering: Clustering,
                     seed: int = 0) -> list[tuple[str, str]]:
    """Pair every use outside the multi-clusters with each multi-cluster it has not met."""
    rng = random.Random(seed)
    multi = sorted(clustering.multi_clusters(), key=lambda c: min(c))
    if not multi:
        return []
    in_multi = set().union(*multi)
    singles = sorted(n for n in clustering.assignment if n not in in_multi)
    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for u in singles:
        for mc in multi:
            if _has_edge_into(graph, u, mc):
                continue
            partner = rng.choice(sorted(mc))
            p = pair_key(u, partner)
            if p not in seen:
                seen.add(p)
                pairs.append(p)
    return pairs


def non_assignable_uses(graph: UsageGraph, clustering: Clustering) -> list[str]:
    """Uses compared to every multi-cluster yet not a member of any."""
    multi = clustering.multi_clusters()
    in_multi = set().union(*multi) if multi else set()
    out = []
    for n in sorted(clustering.assignment):
        if n in in_multi:
            continue
        if all(_has_edge_into(graph, n, mc) for mc in multi):
            out.append(n)
    return out


def exploration_step(graph: UsageGraph, clustering: Clustering,
                     seed: int = 0) -> list[tuple[str, str]]:
    """Random-walk plan over the non-assignable uses, 30% pair budget."""
    rng = random.Random(seed)
    s = non_assignable_uses(graph, clustering)
    if len(s) < 2:
        return []
    judged = graph.judged_pairs()
    budget = _pair_budget(len(s), 0.30)
    walk = [p for p in _walk_pairs(s, rng) if p not in judged]
    pairs = list(walk)
    chosen = set(pairs)
    all_pairs = [pair_key(a, b) for i, a in enumerate(s) for b in s[i + 1:]]
    rng.shuffle(all_pairs)
    for p in all_pairs:
        if len(pairs) >= budget:
            break
        if p not in chosen and p not in judged:
            chosen.add(p)
            pairs.append(p)
    if clustering.multi_clusters() and len(pairs) > budget:
        # existing edges into the multi-clusters keep S connected; trim to budget
        pairs = pairs[:budget]
    return pairs


def disagreement_pairs(graph: UsageGraph) -> list[tuple[str, str]]:
    """Pairs whose judgments disagree by >= 2 or whose median sits on the 2.5 boundary."""
    out = []
    for p in sorted(graph.edges):
        e = graph.edges[p]
        values = e.nonzero_values
        if not values:
            continue
        if max(values) - min(values) >= 2 or e.weight == 2.5:
            out.append(p)
    return out


def conflict_pairs(graph: UsageGraph, clustering: Clustering,
                   seed: int = 0) -> list[tuple[str, str]]:
    """One fresh pair per node touched by a clustering conflict edge."""
    rng = random.Random(seed)
    across, within = conflicts(graph, clustering)
    nodes = sorted({n for p in across | within for n in p})
    judged = graph.judged_pairs()
    all_ids = sorted(graph.nodes)
    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for u in nodes:
        taken = graph.neighbors(u)
        candidates = [v for v in all_ids if v != u and v not in taken]
        if not candidates:
            continue
        p = pair_key(u, rng.choice(candidates))
        if p not in seen and p not in judged:
            seen.add(p)
            pairs.append(p)
    return pairs


def confirmation_pairs(graph: UsageGraph, clustering: Clustering,
                       cfg: SamplerConfig, seed: int = 0) -> list[tuple[str, str]]:
    """Low-rate random pairs plus a second edge between weakly linked multi-clusters."""
    rng = random.Random(seed)
    judged = graph.judged_pairs()
    all_ids = sorted(graph.nodes)
    unjudged = [pair_key(a, b)
                for i, a in enumerate(all_ids) for b in all_ids[i + 1:]
                if pair_key(a, b) not in judged]
    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    if unjudged:
        n_random = max(1, math.ceil(cfg.confirm_fraction * len(judged)))
        for p in rng.sample(unjudged, min(n_random, len(unjudged))):
            if p not in seen:
                seen.add(p)
                pairs.append(p)
    multi = sorted(clustering.multi_clusters(), key=lambda c: min(c))
    for i, ca in enumerate(multi):
        for cb in multi[i + 1:]:
            linking = [p for p in judged
                       if (p[0] in ca and p[1] in cb) or (p[0] in cb and p[1] in ca)]
            if len(linking) >= 2:
                continue
            cross = [pair_key(a, b) for a in sorted(ca) for b in sorted(cb)
                     if pair_key(a, b) not in judged]
            cross = [p for p in cross if p not in seen]
            if cross:
                p = rng.choice(cross)
                seen.add(p)
                pairs.append(p)
    return pairs


def assign_annotators(pairs, roster, rate: float, seed: int,
                      exclude: Optional[dict[tuple[str, str], set[str]]] = None
                      ) -> dict[tuple[str, str], tuple[str, ...]]:
    """One annotator per pair, a second distinct one for roughly `rate` of them."""
    roster = tuple(roster)
    if not roster:
        raise SamplingError("roster is empty")
    if rate > 0 and len(roster) < 2:
        raise SamplingError("multi-annotation requires at least 2 annotators")
    exclude = exclude or {}
    rng = random.Random(seed)
    out: dict[tuple[str, str], tuple[str, ...]] = {}
    for p in pairs:
        eligible = [a for a in roster if a not in exclude.get(p, set())]
        if not eligible:
            eligible = list(roster)
        first = rng.choice(eligible)
        annotators = [first]
        if rate > 0 and rng.random() < rate:
            others = [a for a in eligible if a != first]
            if others:
                annotators.append(rng.choice(others))
        out[p] = tuple(annotators)
    return out


def _cluster_pairs_connected(graph: UsageGraph, clustering: Clustering) -> bool:
    clusters = clustering.clusters
    judged = graph.judged_pairs()
    linked: set[tuple[int, int]] = set()
    label = clustering.assignment
    for a, b in judged:
        if a in label and b in label and label[a] != label[b]:
            linked.add((min(label[a], label[b]), max(label[a], label[b])))
    labels = sorted({label[n] for n in label})
    for i, la in enumerate(labels):
        for lb in labels[i + 1:]:
            if (la, lb) not in linked:
                return False
    return True


def next_round(state: SamplerState) -> Union[RoundPlan, Done]:
    """Plan the next round, or Done once the clusters are pairwise compared."""
    cfg = state.config
    if state.round >= cfg.max_rounds:
        return Done(reason="max_rounds")
    if _cluster_pairs_connected(state.graph, state.clustering):
        return Done(reason="converged")
    base = cfg.seed * 7_368_787 + state.round
    sources = [
        ("combine", combination_step(state.graph, state.clustering, base + 1)),
        ("explore", exploration_step(state.graph, state.clustering, base + 2)),
        ("disagree", disagreement_pairs(state.graph)),
        ("conflict", conflict_pairs(state.graph, state.clustering, base + 3)),
        ("confirm", confirmation_pairs(state.graph, state.clustering, cfg, base + 4)),
    ]
    judged = state.graph.judged_pairs()
    pairs: list[tuple[str, str]] = []
    reasons: dict[tuple[str, str], str] = {}
    redistributions: set[tuple[str, str]] = set()
    for reason, plist in sources:
        for p in plist:
            if p in reasons:
                continue
            if reason != "disagree" and p in judged:
                continue
            reasons[p] = reason
            pairs.append(p)
            if reason == "disagree":
                redistributions.add(p)
    if not pairs:
        return Done(reason="exhausted")
    exclude: dict[tuple[str, str], set[str]] = {}
    for p in redistributions:
        edge = state.graph.edges.get(p)
        if edge:
            exclude[p] = {j.annotator for j in edge.judgments}
    assignments = assign_annotators(pairs, cfg.roster, cfg.multi_annotation_rate,
                                    base + 5, exclude=exclude)
    return RoundPlan(round=state.round + 1, pairs=tuple(pairs),
                     assignments=assignments, reasons=reasons,
                     redistributions=frozenset(redistributions))
