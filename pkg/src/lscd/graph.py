"""Usage graphs: word uses, relatedness judgments and median-weighted edges.

A usage graph collects the uses of one target word from two time-specific
corpora (tagged C1 and C2) plus, optionally, sense-definition nodes.  Edges
aggregate the judgments of one or more annotators on a four-point relatedness
scale (4 identical .. 1 unrelated, 0 = cannot decide).  The edge weight is the
median of the non-zero judgment values; weights are shifted by -2.5 so that
edges split into positive (same sense likely) and negative ones.

Graphs are immutable: every mutating operation returns a new graph, so
snapshots can be shared freely across threads.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union

EPOCHS = ("C1", "C2")
VALID_JUDGMENT_VALUES = (0, 1, 2, 3, 4)
SHIFT = 2.5

FORMAT_VERSION = 1


class GraphError(ValueError):
    """Raised on structurally invalid graph operations."""


def pair_key(a: str, b: str) -> tuple[str, str]:
    """Canonical unordered pair of two distinct node ids."""
    if a == b:
        raise GraphError(f"self-loop pair ({a!r}, {b!r})")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class UseNode:
    id: str
    corpus: str
    tokens: tuple[str, ...]
    target_index: int
    word: str

    def __post_init__(self):
        if self.corpus not in EPOCHS:
            raise GraphError(f"corpus must be one of {EPOCHS}, got {self.corpus!r}")
        if not (0 <= self.target_index < len(self.tokens)):
            raise GraphError(
                f"target_index {self.target_index} out of bounds for {len(self.tokens)} tokens"
            )

    @property
    def context(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class SenseDefNode:
    """Dictionary sense definition used as an extra graph node (Latin mode)."""

    id: str
    gloss: str
    word: str

    def __post_init__(self):
        if not self.gloss:
            raise GraphError("gloss must be non-empty")


Node = Union[UseNode, SenseDefNode]


@dataclass(frozen=True)
class Judgment:
    pair: tuple[str, str]
    annotator: str
    value: int
    round: int = 1

    def __post_init__(self):
        object.__setattr__(self, "pair", pair_key(*self.pair))
        if self.value not in VALID_JUDGMENT_VALUES:
            raise GraphError(f"judgment value must be in {VALID_JUDGMENT_VALUES}, got {self.value}")
        if self.round < 1:
            raise GraphError("round must be >= 1")


@dataclass(frozen=True)
class Edge:
    pair: tuple[str, str]
    judgments: tuple[Judgment, ...]

    @property
    def nonzero_values(self) -> tuple[int, ...]:
        return tuple(j.value for j in self.judgments if j.value != 0)

    @property
    def weight(self) -> Optional[float]:
        """Median of the non-zero judgment values; None if all are 0."""
        values = self.nonzero_values
        if not values:
            return None
        return float(statistics.median(values))

    @property
    def shifted_weight(self) -> Optional[float]:
        w = self.weight
        return None if w is None else w - SHIFT

    @property
    def is_positive(self) -> Optional[bool]:
        sw = self.shifted_weight
        return None if sw is None else sw >= 0


@dataclass(frozen=True)
class UsageGraph:
    word: str
    nodes: Mapping[str, Node] = field(default_factory=dict)
    edges: Mapping[tuple[str, str], Edge] = field(default_factory=dict)

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, word: str, nodes: Iterable[Node] = (),
              judgments: Iterable[Judgment] = ()) -> "UsageGraph":
        g = cls(word=word)
        for n in nodes:
            g = g.with_node(n)
        for j in judgments:
            g = g.with_judgment(j)
        return g

    def with_node(self, node: Node) -> "UsageGraph":
        if node.id in self.nodes:
            raise GraphError(f"duplicate node id {node.id!r}")
        nodes = dict(self.nodes)
        nodes[node.id] = node
        return UsageGraph(self.word, nodes, self.edges)

    def with_judgment(self, j: Judgment) -> "UsageGraph":
        """Record a judgment; the pair's edge weight is recomputed."""
        for nid in j.pair:
            if nid not in self.nodes:
                raise GraphError(f"unknown node id {nid!r}")
        edges = dict(self.edges)
        old = edges.get(j.pair)
        judgments = (old.judgments + (j,)) if old else (j,)
        edges[j.pair] = Edge(j.pair, judgments)
        return UsageGraph(self.word, self.nodes, edges)

    def with_judgments(self, judgments: Iterable[Judgment]) -> "UsageGraph":
        g = self
        for j in judgments:
            g = g.with_judgment(j)
        return g

    # -- queries -----------------------------------------------------------

    def use_nodes(self) -> list[UseNode]:
        return [n for n in self.nodes.values() if isinstance(n, UseNode)]

    def weighted_edges(self) -> dict[tuple[str, str], Edge]:
        return {p: e for p, e in self.edges.items() if e.weight is not None}

    def weighted_node_ids(self) -> set[str]:
        ids: set[str] = set()
        for p in self.weighted_edges():
            ids.update(p)
        return ids

    def judged_pairs(self) -> set[tuple[str, str]]:
        return set(self.edges)

    def neighbors(self, node_id: str) -> set[str]:
        out = set()
        for (a, b) in self.edges:
            if a == node_id:
                out.add(b)
            elif b == node_id:
                out.add(a)
        return out

    # -- operations --------------------------------------------------------

    def subgraph(self, corpus: str) -> "UsageGraph":
        """Induced subgraph on uses of the given epoch; sense nodes drop out."""
        if corpus not in EPOCHS:
            raise GraphError(f"corpus must be one of {EPOCHS}")
        nodes = {
            nid: n for nid, n in self.nodes.items()
            if isinstance(n, UseNode) and n.corpus == corpus
        }
        edges = {
            p: e for p, e in self.edges.items()
            if p[0] in nodes and p[1] in nodes
        }
        return UsageGraph(self.word, nodes, edges)

    def remove_undecidable_nodes(self) -> "UsageGraph":
        """Drop nodes whose 0-judgments are a strict majority of those touching them."""
        zero: dict[str, int] = {}
        total: dict[str, int] = {}
        for e in self.edges.values():
            for j in e.judgments:
                for nid in j.pair:
                    total[nid] = total.get(nid, 0) + 1
                    if j.value == 0:
                        zero[nid] = zero.get(nid, 0) + 1
        doomed = {nid for nid in total if zero.get(nid, 0) * 2 > total[nid]}
        if not doomed:
            return self
        nodes = {nid: n for nid, n in self.nodes.items() if nid not in doomed}
        edges = {
            p: e for p, e in self.edges.items()
            if p[0] in nodes and p[1] in nodes
        }
        return UsageGraph(self.word, nodes, edges)

    # -- serialization -----------------------------------------------------

    def dumps(self) -> str:
        """Line-delimited record serialization; canonical and round-trip exact."""
        lines = [_record({"kind": "header", "word": self.word, "version": FORMAT_VERSION})]
        for nid in sorted(self.nodes):
            n = self.nodes[nid]
            if isinstance(n, UseNode):
                lines.append(_record({
                    "kind": "node", "id": n.id, "corpus": n.corpus, "word": n.word,
                    "tokens": list(n.tokens), "target_index": n.target_index,
                }))
            else:
                lines.append(_record({
                    "kind": "sense", "id": n.id, "gloss": n.gloss, "word": n.word,
                }))
        judgments = []
        for p in sorted(self.edges):
            judgments.extend(self.edges[p].judgments)
        for j in judgments:
            lines.append(_record({
                "kind": "judgment", "pair": list(j.pair), "annotator": j.annotator,
                "value": j.value, "round": j.round,
            }))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "UsageGraph":
        word = None
        nodes: list[Node] = []
        judgments: list[Judgment] = []
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.get("kind")
            if kind == "header":
                if rec.get("version") != FORMAT_VERSION:
                    raise GraphError(f"unsupported format version {rec.get('version')}")
                word = rec["word"]
            elif kind == "node":
                nodes.append(UseNode(rec["id"], rec["corpus"], tuple(rec["tokens"]),
                                     rec["target_index"], rec["word"]))
            elif kind == "sense":
                nodes.append(SenseDefNode(rec["id"], rec["gloss"], rec["word"]))
            elif kind == "judgment":
                judgments.append(Judgment(tuple(rec["pair"]), rec["annotator"],
                                          rec["value"], rec["round"]))
            else:
                raise GraphError(f"unknown record kind {kind!r}")
        if word is None:
            raise GraphError("missing header record")
        return cls.build(word, nodes, judgments)

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.dumps())

    @classmethod
    def load(cls, path) -> "UsageGraph":
        with open(path, encoding="utf-8") as f:
            return cls.loads(f.read())


def _record(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def add_judgment(graph: UsageGraph, j: Judgment) -> UsageGraph:
    return graph.with_judgment(j)


def subgraph(graph: UsageGraph, corpus: str) -> UsageGraph:
    return graph.subgraph(corpus)


def remove_undecidable_nodes(graph: UsageGraph) -> UsageGraph:
    return graph.remove_undecidable_nodes()
