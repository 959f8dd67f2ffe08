import random

import pytest

from lscd.graph import Judgment, UseNode, UsageGraph


def make_nodes(n: int, word: str = "w") -> list[UseNode]:
    out = []
    for i in range(n):
        corpus = "C1" if i < (n + 1) // 2 else "C2"
        out.append(UseNode(f"{word}-n{i:03d}", corpus, ("the", word, "here"), 1, word))
    return out


def random_judged_graph(n: int, seed: int, annotators=("a1", "a2"),
                        density: float = 0.6, zero_rate: float = 0.0) -> UsageGraph:
    """Random graph with judgments over the full value scale."""
    rng = random.Random(seed)
    nodes = make_nodes(n)
    g = UsageGraph.build("w", nodes)
    judgments = []
    ids = [node.id for node in nodes]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                value = 0 if rng.random() < zero_rate else rng.randint(1, 4)
                judgments.append(Judgment((ids[i], ids[j]),
                                          rng.choice(annotators), value))
    return g.with_judgments(judgments)


@pytest.fixture
def small_graph():
    return random_judged_graph(8, seed=11)
