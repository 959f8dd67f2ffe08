"""Corpus ingestion and preprocessing: one sentence per line, whitespace
tokens.  Covers sentence filtering, matched downsampling, use sampling for
annotation and frequency-matched control-word selection."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .graph import UseNode


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[tuple[str, ...], ...]
    epoch: str = "C1"

    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)

    def type_count(self) -> int:
        return len({t for s in self.sentences for t in s})

    def frequency_profile(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.sentences:
            for t in s:
                counts[t] = counts.get(t, 0) + 1
        return counts


def load_corpus(path, epoch: str = "C1") -> Corpus:
    sentences = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            toks = tuple(line.split())
            if toks:
                sentences.append(toks)
    return Corpus(tuple(sentences), epoch)


def dump_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in corpus.sentences:
            f.write(" ".join(s) + "\n")


def filter_sentences(corpus: Corpus, min_tokens: int) -> Corpus:
    if min_tokens < 1:
        raise CorpusError("min_tokens must be >= 1")
    kept = tuple(s for s in corpus.sentences if len(s) >= min_tokens)
    return Corpus(kept, corpus.epoch)


def sample_uses(corpus: Corpus, target: str, n: int, seed: int) -> list[UseNode]:
    """Uniform sample over occurrence positions; all occurrences if fewer than n."""
    if n < 1:
        raise CorpusError("n must be >= 1")
    occurrences = [
        (si, ti)
        for si, sent in enumerate(corpus.sentences)
        for ti, tok in enumerate(sent)
        if tok == target
    ]
    rng = random.Random(seed)
    chosen = occurrences if len(occurrences) <= n else sorted(rng.sample(occurrences, n))
    return [
        UseNode(
            id=f"{target}-{corpus.epoch.lower()}-{si}-{ti}",
            corpus=corpus.epoch,
            tokens=corpus.sentences[si],
            target_index=ti,
            word=target,
        )
        for si, ti in chosen
    ]


def downsample_matched(corpus_a: Corpus, corpus_b: Corpus, targets: Sequence[str],
                       seed: int) -> tuple[Corpus, Corpus]:
    """Shrink the larger corpus to the smaller's size, keeping target sentences."""
    if len(corpus_a.sentences) == len(corpus_b.sentences):
        return corpus_a, corpus_b
    bigger, smaller = ((corpus_a, corpus_b)
                       if len(corpus_a.sentences) > len(corpus_b.sentences)
                       else (corpus_b, corpus_a))
    quota = len(smaller.sentences)
    tset = set(targets)
    with_target = [s for s in bigger.sentences if tset & set(s)]
    without = [s for s in bigger.sentences if not (tset & set(s))]
    if len(with_target) > quota:
        raise CorpusError(
            f"target sentences ({len(with_target)}) exceed the downsampling quota ({quota})"
        )
    rng = random.Random(seed)
    fill = rng.sample(without, quota - len(with_target))
    reduced = Corpus(tuple(with_target + fill), bigger.epoch)
    if bigger is corpus_a:
        return reduced, corpus_b
    return corpus_a, reduced


def ttr(corpus: Corpus) -> float:
    """Types per thousand tokens."""
    tokens = corpus.token_count()
    if tokens == 0:
        raise CorpusError("empty corpus")
    return corpus.type_count() / tokens * 1000.0


def ttr_from_counts(tokens: float, types: float) -> float:
    if tokens <= 0:
        raise CorpusError("token count must be positive")
    return types / tokens * 1000.0


def select_control(changed: tuple[float, float],
                   candidates: Sequence[tuple[str, float, float, str]],
                   pos: str, p_min: float = 0.03, p_max: float = 0.15,
                   step: float = 0.01, seed: int = 0
                   ) -> Optional[tuple[str, float]]:
    """Smallest tolerance p at which a same-POS, frequency-matched control exists.

    The tolerance interval half-width is p times the changed word's frequency
    in the respective corpus.  Returns (word, p), or None if no candidate
    qualifies at p_max.
    """
    if p_min > p_max or step <= 0:
        raise CorpusError("need p_min <= p_max and step > 0")
    f1, f2 = changed
    rng = random.Random(seed)
    steps = int(math.floor((p_max - p_min) / step + 1e-9)) + 1
    for i in range(steps):
        p = p_min + i * step
        ok = [
            c for c in candidates
            if c[3] == pos
            and f1 - p * f1 <= c[1] <= f1 + p * f1
            and f2 - p * f2 <= c[2] <= f2 + p * f2
        ]
        if ok:
            return (rng.choice(sorted(ok))[0], p)
    return None
