"""Simulated annotation campaigns against known ground truth.

Ground-truth usage graphs get zipfian sense frequency distributions; change
is introduced by zeroing a non-dominant sense in one corpus.  Noisy
annotators judge sampled pairs (4 for same sense, 1 for different, plus
normal noise), the sample/judge/cluster loop runs until the sampler stops,
and recovery is scored with the adjusted Rand index against the true senses.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Optional

from .clustering import Clustering, ClusterConfig, cluster
from .graph import Judgment, UseNode, UsageGraph
from .sampling import (Done, RoundPlan, SamplerConfig, SamplerState,
                       assign_annotators, next_round, round_one)
from .util import stable_seed as _stable_seed


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class GroundTruth:
    word: str
    nodes: tuple[UseNode, ...]
    labels: dict[str, int]          # node id -> true sense index
    true_d1: tuple[int, ...]
    true_d2: tuple[int, ...]
    changed: bool


@dataclass(frozen=True)
class AnnotatorModel:
    sigma: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise SimulationError("sigma must be >= 0")


# simulation-scale clustering: light annealing polished by greedy descent;
# effectively uncapped cluster count (sparse mid-campaign graphs need many
# singleton clusters)
DEFAULT_SIM_CLUSTERING = ClusterConfig(
    max_clusters_values=(1000,),
    restarts=1,
    sa_iterations=1500,
)


@dataclass(frozen=True)
class SimulationConfig:
    n_words: int = 40
    freq_range: tuple[int, int] = (50, 1000)
    zipf_exponent: float = 1.0
    senses_range: tuple[int, int] = (1, 5)
    change_share: float = 0.5
    sigma: float = 0.5
    n_annotators: int = 4
    sampler: SamplerConfig = SamplerConfig(max_rounds=8)
    clustering: ClusterConfig = DEFAULT_SIM_CLUSTERING
    seed: int = 0

    def __post_init__(self):
        if self.freq_range[0] < 2 or self.freq_range[0] > self.freq_range[1]:
            raise SimulationError("invalid freq_range")
        if not (0.0 <= self.change_share <= 1.0):
            raise SimulationError("change_share must be in [0, 1]")
        if self.n_words < 1 or self.n_annotators < 1:
            raise SimulationError("n_words and n_annotators must be >= 1")


@dataclass(frozen=True)
class WordResult:
    word: str
    ari: float
    rounds: int
    judgments: int
    done_reason: str
    changed: bool


@dataclass(frozen=True)
class SimulationReport:
    results: tuple[WordResult, ...]
    n_annotators: int

    @property
    def mean_ari(self) -> float:
        return sum(r.ari for r in self.results) / len(self.results)

    @property
    def total_judgments(self) -> int:
        return sum(r.judgments for r in self.results)

    @property
    def judgments_per_annotator(self) -> float:
        return self.total_judgments / self.n_annotators


# ---------------------------------------------------------------------------
# ground truth


def zipf_split(total: int, k: int, exponent: float) -> tuple[int, ...]:
    """Split `total` across k ranks proportional to 1/rank^exponent (largest remainder)."""
    weights = [1.0 / (r ** exponent) for r in range(1, k + 1)]
    h = sum(weights)
    raw = [total * w / h for w in weights]
    base = [math.floor(x) for x in raw]
    short = total - sum(base)
    order = sorted(range(k), key=lambda i: (-(raw[i] - base[i]), i))
    for i in order[:short]:
        base[i] += 1
    return tuple(base)


def generate_ground_truth(cfg: SimulationConfig, seed: int) -> list[GroundTruth]:
    rng = random.Random(seed)
    n_changed = math.ceil(cfg.change_share * cfg.n_words)
    changed_idx = set(rng.sample(range(cfg.n_words), n_changed))
    out = []
    for wi in range(cfg.n_words):
        word = f"w{wi:03d}"
        changed = wi in changed_idx
        lo, hi = cfg.senses_range
        if changed:
            lo = max(lo, 2)   # a one-sense word cannot lose or gain a sense
            if hi < lo:
                raise SimulationError("senses_range too narrow for change")
        k = rng.randint(lo, hi)
        d1 = list(zipf_split(rng.randint(*cfg.freq_range), k, cfg.zipf_exponent))
        d2 = list(zipf_split(rng.randint(*cfg.freq_range), k, cfg.zipf_exponent))
        if changed:
            sense = rng.randrange(1, k)          # non-dominant rank
            corpus = rng.choice((0, 1))
            (d1 if corpus == 0 else d2)[sense] = 0
        nodes = []
        labels = {}
        idx = 0
        for tag, dist in (("C1", d1), ("C2", d2)):
            for sense, freq in enumerate(dist):
                for _ in range(freq):
                    nid = f"{word}-{tag.lower()}-{idx:04d}"
                    nodes.append(UseNode(nid, tag, (word,), 0, word))
                    labels[nid] = sense
                    idx += 1
        out.append(GroundTruth(word, tuple(nodes), labels,
                               tuple(d1), tuple(d2), changed))
    return out


# ---------------------------------------------------------------------------
# noisy annotator


def simulate_judgment(model: AnnotatorModel, sense_u: int, sense_v: int,
                      seed: int) -> int:
    """Base relatedness 4 (same sense) or 1 (different), normal noise, clipped."""
    base = 4.0 if sense_u == sense_v else 1.0
    noisy = base + random.Random(seed).gauss(0.0, model.sigma) if model.sigma > 0 else base
    clipped = min(4.0, max(1.0, noisy))
    return int(math.floor(clipped + 0.5))


# ---------------------------------------------------------------------------
# adjusted Rand index


def _comb2(x: int) -> int:
    return x * (x - 1) // 2


def adjusted_rand_index(a: Clustering, b: Clustering) -> float:
    if set(a.assignment) != set(b.assignment):
        raise SimulationError("clusterings cover different node sets")
    ids = sorted(a.assignment)
    n = len(ids)
    table: dict[tuple[int, int], int] = {}
    rows: dict[int, int] = {}
    cols: dict[int, int] = {}
    for nid in ids:
        la, lb = a.assignment[nid], b.assignment[nid]
        table[(la, lb)] = table.get((la, lb), 0) + 1
        rows[la] = rows.get(la, 0) + 1
        cols[lb] = cols.get(lb, 0) + 1
    index = sum(_comb2(v) for v in table.values())
    sum_a = sum(_comb2(v) for v in rows.values())
    sum_b = sum(_comb2(v) for v in cols.values())
    total = _comb2(n)
    expected = sum_a * sum_b / total if total else 0.0
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0 if index == max_index else 0.0
    return (index - expected) / (max_index - expected)


# ---------------------------------------------------------------------------
# campaign loop


def _judge_plan(graph: UsageGraph, gt: GroundTruth, model: AnnotatorModel,
                pairs, assignments, rnd: int, seed: int) -> tuple[UsageGraph, int]:
    count = 0
    judgments = []
    for p in pairs:
        for annotator in assignments[p]:
            value = simulate_judgment(model, gt.labels[p[0]], gt.labels[p[1]],
                                      _stable_seed(seed, p, annotator, rnd))
            judgments.append(Judgment(p, annotator, value, rnd))
            count += 1
    return graph.with_judgments(judgments), count


def simulate_word(gt: GroundTruth, cfg: SimulationConfig, word_seed: int) -> WordResult:
    model = AnnotatorModel(cfg.sigma)
    roster = tuple(f"ann{i}" for i in range(cfg.n_annotators))
    scfg = replace(cfg.sampler, roster=roster, seed=word_seed)
    graph = UsageGraph.build(gt.word, gt.nodes)

    plan = round_one([n.id for n in gt.nodes], scfg, word_seed)
    assignments = assign_annotators(plan.pairs, roster, scfg.multi_annotation_rate,
                                    _stable_seed(word_seed, "assign", 1))
    graph, judgments = _judge_plan(graph, gt, model, plan.pairs, assignments,
                                   1, word_seed)
    rnd = 1
    done_reason = "max_rounds"
    clustering: Optional[Clustering] = None
    while True:
        pruned = graph.remove_undecidable_nodes()
        ccfg = replace(cfg.clustering, seed=_stable_seed(word_seed, "cluster"))
        clustering = cluster(pruned, ccfg)
        state = SamplerState(pruned, clustering, rnd, scfg)
        outcome = next_round(state)
        if isinstance(outcome, Done):
            done_reason = outcome.reason
            break
        graph, spent = _judge_plan(graph, gt, model, outcome.pairs,
                                   outcome.assignments, outcome.round, word_seed)
        judgments += spent
        rnd = outcome.round

    truth = Clustering({nid: gt.labels[nid] for nid in clustering.assignment})
    ari = adjusted_rand_index(clustering, truth)
    return WordResult(gt.word, ari, rnd, judgments, done_reason, gt.changed)


def run_simulation(cfg: SimulationConfig) -> SimulationReport:
    words = generate_ground_truth(cfg, cfg.seed)
    results = []
    for wi, gt in enumerate(words):
        results.append(simulate_word(gt, cfg, _stable_seed(cfg.seed, "word", wi)))
    return SimulationReport(tuple(results), cfg.n_annotators)
