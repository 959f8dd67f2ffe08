"""Shared-task scoring: accuracy, tie-corrected Spearman, P/R/F1, baselines
and the bias/difficulty analyses.

Undefined metric values (constant gold ranking, zero denominators, zero
context vectors) are signaled explicitly, never silently coerced to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .corpus import Corpus


class EvaluationError(ValueError):
    pass


class UndefinedMetricError(EvaluationError):
    """The requested metric has no defined value on these inputs."""


@dataclass(frozen=True)
class AnswerSet:
    subtask: int
    entries: dict[str, float]

    def __post_init__(self):
        if self.subtask not in (1, 2):
            raise EvaluationError("subtask must be 1 or 2")
        if self.subtask == 1:
            for w, v in self.entries.items():
                if v not in (0, 1):
                    raise EvaluationError(f"subtask-1 label for {w!r} must be 0 or 1")

    def words(self) -> set[str]:
        return set(self.entries)


def _check_same_words(pred: AnswerSet, gold: AnswerSet) -> list[str]:
    if pred.words() != gold.words():
        missing = gold.words() ^ pred.words()
        raise EvaluationError(f"word sets differ on {sorted(missing)[:5]}")
    return sorted(gold.entries)


def accuracy(pred: AnswerSet, gold: AnswerSet) -> float:
    words = _check_same_words(pred, gold)
    if pred.subtask != 1 or gold.subtask != 1:
        raise EvaluationError("accuracy is a subtask-1 metric")
    hits = sum(1 for w in words if pred.entries[w] == gold.entries[w])
    return hits / len(words)


def average_ranks(values: Sequence[float]) -> list[float]:
    """Ranks 1..n with ties assigned the average of their rank positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(pred: AnswerSet, gold: AnswerSet) -> float:
    """Pearson correlation of average-tie-corrected rank vectors."""
    words = _check_same_words(pred, gold)
    if len(words) < 3:
        raise EvaluationError("need at least 3 words")
    gv = [gold.entries[w] for w in words]
    pv = [pred.entries[w] for w in words]
    if len(set(gv)) == 1:
        raise UndefinedMetricError("gold scores are constant; rank correlation undefined")
    if len(set(pv)) == 1:
        raise UndefinedMetricError("predicted scores are constant; rank correlation undefined")
    rg = np.array(average_ranks(gv))
    rp = np.array(average_ranks(pv))
    rg = rg - rg.mean()
    rp = rp - rp.mean()
    return float((rg @ rp) / math.sqrt((rg @ rg) * (rp @ rp)))


@dataclass(frozen=True)
class PrecisionRecallF1:
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]


def precision_recall_f1(pred: AnswerSet, gold: AnswerSet,
                        positive: int = 1) -> PrecisionRecallF1:
    """Standard P/R/F1; a component with a zero denominator is None."""
    words = _check_same_words(pred, gold)
    tp = sum(1 for w in words if pred.entries[w] == positive and gold.entries[w] == positive)
    fp = sum(1 for w in words if pred.entries[w] == positive and gold.entries[w] != positive)
    fn = sum(1 for w in words if pred.entries[w] != positive and gold.entries[w] == positive)
    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    recall = tp / (tp + fn) if (tp + fn) > 0 else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return PrecisionRecallF1(precision, recall, f1)


# ---------------------------------------------------------------------------
# baselines


def freq_baseline(corpus1: Corpus, corpus2: Corpus, targets: Sequence[str]) -> AnswerSet:
    """Absolute difference of corpus-normalized target frequencies."""
    scores = {}
    for corpus in (corpus1, corpus2):
        if corpus.token_count() == 0:
            raise EvaluationError("empty corpus")
    f1 = corpus1.frequency_profile()
    f2 = corpus2.frequency_profile()
    n1 = corpus1.token_count()
    n2 = corpus2.token_count()
    for w in targets:
        scores[w] = abs(f1.get(w, 0) / n1 - f2.get(w, 0) / n2)
    return AnswerSet(2, scores)


def _cooccurrence(corpus: Corpus, target: str, window: int) -> dict[str, int]:
    counts: dict[str, int] = {}
    for sent in corpus.sentences:
        for i, tok in enumerate(sent):
            if tok != target:
                continue
            lo = max(0, i - window)
            hi = min(len(sent), i + window + 1)
            for j in range(lo, hi):
                if j == i:
                    continue
                counts[sent[j]] = counts.get(sent[j], 0) + 1
    return counts


def count_baseline(corpus1: Corpus, corpus2: Corpus, targets: Sequence[str],
                   window: int = 4) -> tuple[AnswerSet, dict[str, str]]:
    """Cosine distance of column-intersected co-occurrence count vectors.

    Returns the scores plus a per-word map of undefined cases (zero vector
    after intersection); undefined words carry no score.
    """
    if window < 1:
        raise EvaluationError("window must be >= 1")
    scores: dict[str, float] = {}
    undefined: dict[str, str] = {}
    for w in targets:
        c1 = _cooccurrence(corpus1, w, window)
        c2 = _cooccurrence(corpus2, w, window)
        shared = sorted(set(c1) & set(c2))
        v1 = np.array([c1[t] for t in shared], dtype=float)
        v2 = np.array([c2[t] for t in shared], dtype=float)
        if not shared or not v1.any() or not v2.any():
            undefined[w] = "zero vector after column intersection"
            continue
        cos = float(v1 @ v2 / (np.linalg.norm(v1) * np.linalg.norm(v2)))
        scores[w] = 1.0 - cos
    return AnswerSet(2, scores), undefined


def majority_baseline(targets: Sequence[str]) -> AnswerSet:
    return AnswerSet(1, {w: 0 for w in targets})


def binarize_scores(scores: AnswerSet) -> AnswerSet:
    """Label 1 for scores strictly above the mean score."""
    if scores.subtask != 2:
        raise EvaluationError("binarize expects subtask-2 scores")
    values = list(scores.entries.values())
    mean = sum(values) / len(values)
    return AnswerSet(1, {w: (1 if v > mean else 0) for w, v in scores.entries.items()})


# ---------------------------------------------------------------------------
# analyses


@dataclass(frozen=True)
class WordStats:
    """Per-word statistics: normalized frequencies in C1/C2 and sense counts."""

    freq1: float
    freq2: float
    senses1: int
    senses2: int


def bias_correlations(scores: AnswerSet, stats: dict[str, WordStats]
                      ) -> tuple[dict[str, float], list[str]]:
    """Spearman of change scores against frequency/polysemy statistics.

    Words absent from a corpus (zero frequency) are excluded and reported.
    """
    excluded = [w for w in scores.entries
                if w not in stats or stats[w].freq1 <= 0 or stats[w].freq2 <= 0]
    words = sorted(w for w in scores.entries if w not in excluded)
    if len(words) < 3:
        raise EvaluationError("need at least 3 usable words")
    sset = AnswerSet(2, {w: scores.entries[w] for w in words})
    frq_d = {w: abs(math.log(stats[w].freq1) - math.log(stats[w].freq2)) for w in words}
    frq_m = {w: min(math.log(stats[w].freq1), math.log(stats[w].freq2)) for w in words}
    ply_m = {w: float(min(stats[w].senses1, stats[w].senses2)) for w in words}
    out = {}
    for name, stat in (("frq_d", frq_d), ("frq_m", frq_m), ("ply_m", ply_m)):
        out[name] = spearman(sset, AnswerSet(2, stat))
    return out, excluded


def expected_rank_error(rank: float, n: int) -> float:
    """Mean absolute rank distance of a fixed rank to a uniform random rank."""
    return sum(abs(rank - j) for j in range(1, n + 1)) / n


def prediction_difficulty(answers: Sequence[AnswerSet], gold: AnswerSet,
                          subtask: int) -> dict[str, float]:
    """Mean prediction error per word; rank errors are expectation-normalized."""
    if not answers:
        raise EvaluationError("need at least one answer set")
    words = sorted(gold.entries)
    for a in answers:
        _check_same_words(a, gold)
    if subtask == 1:
        return {
            w: sum(abs(a.entries[w] - gold.entries[w]) for a in answers) / len(answers)
            for w in words
        }
    gold_ranks = dict(zip(words, average_ranks([gold.entries[w] for w in words])))
    n = len(words)
    out = {}
    rank_sets = [dict(zip(words, average_ranks([a.entries[w] for w in words])))
                 for a in answers]
    for w in words:
        err = sum(abs(r[w] - gold_ranks[w]) for r in rank_sets) / len(answers)
        out[w] = err / expected_rank_error(gold_ranks[w], n)
    return out


# ---------------------------------------------------------------------------
# answer files


def load_answers(path, subtask: int) -> AnswerSet:
    """One `word<TAB>value` per line, UTF-8."""
    entries: dict[str, float] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            word, value = line.split("\t")
            entries[word] = int(value) if subtask == 1 else float(value)
    return AnswerSet(subtask, entries)


def dump_answers(answers: AnswerSet, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for w in sorted(answers.entries):
            v = answers.entries[w]
            f.write(f"{w}\t{int(v) if answers.subtask == 1 else v}\n")
