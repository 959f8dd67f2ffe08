"""Durable campaign state.

Each campaign lives in its own directory: a campaign.json spec, an
append-only events.jsonl log (judgments, round advances, reassignments) and
per-round graph/clustering snapshot files.  Replaying the log over the spec
reconstructs the exact in-memory state, so the log is the single source of
truth; snapshots are derived artifacts rewritten identically on replay.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

from ..clustering import Clustering, ClusterConfig, cluster
from ..graph import Judgment, SenseDefNode, UseNode, UsageGraph, pair_key
from ..measures import ChangeScores, MeasureError, change_scores
from ..sampling import (Done, RoundPlan, SamplerConfig, SamplerState,
                        assign_annotators, next_round, round_one)
from ..util import stable_seed


class ServiceError(ValueError):
    def __init__(self, message: str, status: int = 400):
        super().__init__(message)
        self.status = status


@dataclass
class WordState:
    word: str
    seed: int
    graph: UsageGraph
    round: int
    plan: RoundPlan
    status: str = "collecting"          # collecting | round-complete | done
    clustering: Optional[Clustering] = None
    scores: Optional[ChangeScores] = None
    done_reason: Optional[str] = None
    judged: set = field(default_factory=set)   # (pair, annotator, round)

    def pending(self) -> list[tuple[tuple[str, str], str]]:
        out = []
        for p in self.plan.pairs:
            for ann in self.plan.assignments.get(p, ()):
                if (p, ann, self.plan.round) not in self.judged:
                    out.append((p, ann))
        return out

    def assigned_count(self) -> int:
        return sum(len(a) for a in self.plan.assignments.values())

    def judged_count(self) -> int:
        return sum(1 for k in self.judged if k[2] == self.plan.round)


@dataclass
class Campaign:
    id: str
    spec: dict
    words: dict[str, WordState]
    roster: dict[str, str]              # annotator id -> token
    sampler: SamplerConfig
    clustering_cfg: ClusterConfig
    seed: int

    def node_word(self, node_id: str) -> Optional[str]:
        for w, ws in self.words.items():
            if node_id in ws.graph.nodes:
                return w
        return None


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _word_seed(spec_word: dict, campaign_seed: int, index: int) -> int:
    if spec_word.get("seed") is not None:
        return int(spec_word["seed"])
    return stable_seed(campaign_seed, "word", index)


class CampaignStore:
    """All writes to one campaign serialize through its lock; reads hit the
    same in-memory state, which is immutable below the WordState level."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._campaigns: dict[str, Campaign] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._master = threading.Lock()

    # -- paths -------------------------------------------------------------

    def _dir(self, cid: str) -> Path:
        return self.root / cid

    def _events_path(self, cid: str) -> Path:
        return self._dir(cid) / "events.jsonl"

    def _lock(self, cid: str) -> threading.Lock:
        with self._master:
            return self._locks.setdefault(cid, threading.Lock())

    # -- campaign lifecycle ------------------------------------------------

    def create_campaign(self, spec: dict) -> Campaign:
        cid = spec.get("id") or uuid.uuid4().hex[:12]
        if not spec.get("words"):
            raise ServiceError("campaign needs at least one word")
        if not spec.get("roster"):
            raise ServiceError("roster must be non-empty")
        with self._lock(cid):
            if cid in self._campaigns or self._dir(cid).exists():
                raise ServiceError(f"campaign {cid!r} already exists", status=409)
            camp = self._init_campaign(cid, spec)
            d = self._dir(cid)
            (d / "snapshots").mkdir(parents=True)
            with open(d / "campaign.json", "w", encoding="utf-8") as f:
                f.write(_canonical(spec) + "\n")
            self._events_path(cid).touch()
            self._campaigns[cid] = camp
        return camp

    def _init_campaign(self, cid: str, spec: dict) -> Campaign:
        roster = {a["id"]: a["token"] for a in spec["roster"]}
        if len(roster) != len(spec["roster"]):
            raise ServiceError("duplicate annotator ids in roster")
        sopts = spec.get("sampler", {})
        scfg = SamplerConfig(
            node_fraction=sopts.get("node_fraction", 0.10),
            edge_fraction=sopts.get("edge_fraction", 0.30),
            min_round_one_nodes=sopts.get("min_round_one_nodes", 5),
            confirm_fraction=sopts.get("confirm_fraction", 0.02),
            multi_annotation_rate=sopts.get("multi_annotation_rate", 0.5),
            roster=tuple(sorted(roster)),
            max_rounds=sopts.get("max_rounds", 5),
        )
        copts = spec.get("clustering", {})
        ccfg = ClusterConfig(
            max_clusters_values=tuple(copts.get("max_clusters_values", (1000,))),
            restarts=copts.get("restarts", 1),
            sa_iterations=copts.get("sa_iterations", 1500),
        )
        seed = spec.get("seed", 0)
        words: dict[str, WordState] = {}
        for wi, wspec in enumerate(spec["words"]):
            w = wspec["word"]
            if w in words:
                raise ServiceError(f"duplicate word {w!r}")
            if len(wspec.get("uses", [])) < 2:
                raise ServiceError(f"word {w!r} needs at least 2 uses")
            nodes: list = [
                UseNode(u["id"], u["corpus"], tuple(u["tokens"]),
                        u["target_index"], w)
                for u in wspec["uses"]
            ]
            nodes += [SenseDefNode(s["id"], s["gloss"], w)
                      for s in wspec.get("senses", [])]
            graph = UsageGraph.build(w, nodes)
            wseed = _word_seed(wspec, seed, wi)
            wscfg = replace(scfg, seed=wseed)
            plan = round_one(list(graph.nodes), wscfg, wseed)
            assignments = assign_annotators(
                plan.pairs, wscfg.roster, wscfg.multi_annotation_rate,
                stable_seed(wseed, "assign", 1))
            plan = replace(plan, assignments=assignments)
            words[w] = WordState(word=w, seed=wseed, graph=graph,
                                 round=1, plan=plan)
        return Campaign(id=cid, spec=spec, words=words, roster=roster,
                        sampler=scfg, clustering_cfg=ccfg, seed=seed)

    def get(self, cid: str) -> Campaign:
        camp = self._campaigns.get(cid)
        if camp is not None:
            return camp
        with self._lock(cid):
            camp = self._campaigns.get(cid)
            if camp is not None:
                return camp
            d = self._dir(cid)
            if not (d / "campaign.json").exists():
                raise ServiceError(f"unknown campaign {cid!r}", status=404)
            with open(d / "campaign.json", encoding="utf-8") as f:
                spec = json.load(f)
            camp = self._init_campaign(cid, spec)
            self._campaigns[cid] = camp
            self._replay(camp)
        return camp

    def _replay(self, camp: Campaign) -> None:
        path = self._events_path(camp.id)
        if not path.exists():
            return
        with open(path, encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                ev = json.loads(line)
                kind = ev["kind"]
                if kind == "judgment":
                    self._apply_judgment(camp, ev["annotator"],
                                         tuple(ev["pair"]), ev["value"])
                elif kind == "advance":
                    self._apply_advance(camp, ev["word"])
                elif kind == "reassign":
                    self._apply_reassign(camp, ev["word"], tuple(ev["pair"]),
                                         ev["from"], ev["to"])
                else:
                    raise ServiceError(f"unknown event kind {kind!r}", status=500)

    def _append_event(self, cid: str, ev: dict) -> None:
        with open(self._events_path(cid), "a", encoding="utf-8") as f:
            f.write(_canonical(ev) + "\n")
            f.flush()
            os.fsync(f.fileno())

    # -- auth --------------------------------------------------------------

    def authenticate(self, cid: str, annotator: str, token: str) -> None:
        camp = self.get(cid)
        if camp.roster.get(annotator) != token:
            raise ServiceError("unknown annotator or bad token", status=401)

    def annotator_for_token(self, cid: str, token: str) -> str:
        camp = self.get(cid)
        for aid, tok in camp.roster.items():
            if tok == token:
                return aid
        raise ServiceError("unknown annotator token", status=401)

    # -- judgments ---------------------------------------------------------

    def _apply_judgment(self, camp: Campaign, annotator: str,
                        pair: tuple[str, str], value: int) -> WordState:
        pair = pair_key(*pair)
        word = camp.node_word(pair[0])
        if word is None or camp.node_word(pair[1]) != word:
            raise ServiceError(f"pair {pair} does not name uses of one word", status=404)
        ws = camp.words[word]
        if ws.status == "done":
            raise ServiceError(f"word {word!r} is finished")
        if pair not in ws.plan.assignments or annotator not in ws.plan.assignments[pair]:
            raise ServiceError(
                f"pair {pair} is not assigned to {annotator!r} in round {ws.plan.round}")
        key = (pair, annotator, ws.plan.round)
        if key in ws.judged:
            raise ServiceError("duplicate judgment for this pair and round", status=409)
        ws.graph = ws.graph.with_judgment(
            Judgment(pair, annotator, value, ws.plan.round))
        ws.judged.add(key)
        if not ws.pending():
            ws.status = "round-complete"
        return ws

    def submit_judgment(self, cid: str, annotator: str, pair, value: int) -> dict:
        camp = self.get(cid)
        with self._lock(cid):
            ws = self._apply_judgment(camp, annotator, tuple(pair), value)
            self._append_event(cid, {
                "kind": "judgment", "word": ws.word, "pair": list(pair_key(*pair)),
                "annotator": annotator, "value": value, "round": ws.plan.round,
            })
            return {"word": ws.word, "pair": list(pair_key(*pair)),
                    "round": ws.plan.round}

    # -- queue -------------------------------------------------------------

    def next_item(self, cid: str, annotator: str) -> Optional[dict]:
        camp = self.get(cid)
        if annotator not in camp.roster:
            raise ServiceError(f"unknown annotator {annotator!r}", status=404)
        candidates: list[tuple[int, str, tuple[str, str]]] = []
        for w in sorted(camp.words):
            ws = camp.words[w]
            if ws.status == "done":
                continue
            for p, ann in ws.pending():
                if ann == annotator:
                    rank = stable_seed(ws.seed, "serve", annotator, ws.plan.round, p)
                    candidates.append((rank, w, p))
        if not candidates:
            return None
        _, word, pair = min(candidates)
        ws = camp.words[word]
        return {
            "campaign": cid,
            "word": word,
            "round": ws.plan.round,
            "pair": list(pair),
            "left": self._panel(ws.graph, pair[0]),
            "right": self._panel(ws.graph, pair[1]),
            "judged": ws.judged_count(),
            "assigned": ws.assigned_count(),
        }

    @staticmethod
    def _panel(graph: UsageGraph, node_id: str) -> dict:
        node = graph.nodes[node_id]
        if isinstance(node, UseNode):
            return {"kind": "use", "node_id": node.id,
                    "tokens": list(node.tokens), "target_index": node.target_index}
        return {"kind": "sense", "node_id": node.id, "gloss": node.gloss}

    # -- round advancement -------------------------------------------------

    def _apply_advance(self, camp: Campaign, word: str
                       ) -> tuple[WordState, Union[RoundPlan, Done]]:
        ws = camp.words.get(word)
        if ws is None:
            raise ServiceError(f"unknown word {word!r}", status=404)
        if ws.status == "done":
            raise ServiceError(f"word {word!r} is already finished")
        if ws.pending():
            raise ServiceError("round incomplete: assigned pairs are still unjudged")
        pruned = ws.graph.remove_undecidable_nodes()
        ccfg = replace(camp.clustering_cfg, seed=stable_seed(ws.seed, "cluster"))
        ws.clustering = cluster(pruned, ccfg)
        scfg = replace(camp.sampler, seed=ws.seed)
        completed = ws.round
        outcome = next_round(SamplerState(pruned, ws.clustering, ws.round, scfg))
        if isinstance(outcome, Done):
            ws.status = "done"
            ws.done_reason = outcome.reason
            try:
                ws.scores = change_scores(pruned, ws.clustering, word)
            except MeasureError:
                ws.scores = None
        else:
            ws.plan = outcome
            ws.round = outcome.round
            ws.status = "collecting"
        self._snapshot(camp, ws, pruned, completed)
        return ws, outcome

    def _snapshot(self, camp: Campaign, ws: WordState, pruned: UsageGraph,
                  completed_round: int) -> None:
        d = self._dir(camp.id) / "snapshots"
        stem = f"{ws.word}.round{completed_round:02d}"
        with open(d / f"{stem}.graph.jsonl", "w", encoding="utf-8") as f:
            f.write(pruned.dumps())
        assignment = {nid: ws.clustering.assignment[nid]
                      for nid in sorted(ws.clustering.assignment)}
        payload = {"word": ws.word, "round": completed_round, "status": ws.status,
                   "assignment": assignment}
        if ws.scores is not None:
            payload["scores"] = {"binary": ws.scores.binary,
                                 "graded": ws.scores.graded,
                                 "k": ws.scores.k, "n": ws.scores.n}
        with open(d / f"{stem}.clusters.json", "w", encoding="utf-8") as f:
            f.write(_canonical(payload) + "\n")

    def advance_round(self, cid: str, word: str) -> dict:
        camp = self.get(cid)
        with self._lock(cid):
            ws, outcome = self._apply_advance(camp, word)
            self._append_event(cid, {"kind": "advance", "word": word})
        if isinstance(outcome, Done):
            return {"word": word, "outcome": "done", "round": ws.round,
                    "done_reason": outcome.reason, "scores": self._scores_dict(ws)}
        return {"word": word, "outcome": "plan", "round": ws.round,
                "n_pairs": len(outcome.pairs)}

    # -- reassignment ------------------------------------------------------

    def _apply_reassign(self, camp: Campaign, word: str, pair: tuple[str, str],
                        from_annotator: str, to_annotator: str) -> None:
        ws = camp.words.get(word)
        if ws is None:
            raise ServiceError(f"unknown word {word!r}", status=404)
        pair = pair_key(*pair)
        assigned = ws.plan.assignments.get(pair)
        if assigned is None or from_annotator not in assigned:
            raise ServiceError(f"pair {pair} is not assigned to {from_annotator!r}")
        if to_annotator not in camp.roster:
            raise ServiceError(f"unknown annotator {to_annotator!r}", status=404)
        if (pair, from_annotator, ws.plan.round) in ws.judged:
            raise ServiceError("cannot reassign an already judged pair")
        if to_annotator in assigned:
            raise ServiceError(f"{to_annotator!r} already holds this pair")
        newa = tuple(to_annotator if a == from_annotator else a for a in assigned)
        assignments = dict(ws.plan.assignments)
        assignments[pair] = newa
        ws.plan = replace(ws.plan, assignments=assignments)

    def reassign(self, cid: str, word: str, pair, from_annotator: str,
                 to_annotator: str) -> dict:
        camp = self.get(cid)
        with self._lock(cid):
            self._apply_reassign(camp, word, pair_key(*pair),
                                 from_annotator, to_annotator)
            self._append_event(cid, {
                "kind": "reassign", "word": word, "pair": list(pair_key(*pair)),
                "from": from_annotator, "to": to_annotator,
            })
        return {"word": word, "pair": list(pair_key(*pair)),
                "from_annotator": from_annotator, "to_annotator": to_annotator}

    # -- views -------------------------------------------------------------

    @staticmethod
    def _scores_dict(ws: WordState) -> dict:
        out = {"word": ws.word, "status": ws.status, "done_reason": ws.done_reason}
        if ws.scores is not None:
            out.update(binary=ws.scores.binary, graded=ws.scores.graded,
                       k=ws.scores.k, n=ws.scores.n)
        return out

    def scores_view(self, cid: str, word: str) -> dict:
        camp = self.get(cid)
        ws = camp.words.get(word)
        if ws is None:
            raise ServiceError(f"unknown word {word!r}", status=404)
        return self._scores_dict(ws)

    def graph_view(self, cid: str, word: str) -> dict:
        camp = self.get(cid)
        ws = camp.words.get(word)
        if ws is None:
            raise ServiceError(f"unknown word {word!r}", status=404)
        assignment = ws.clustering.assignment if ws.clustering else {}
        nodes = []
        for nid in sorted(ws.graph.nodes):
            n = ws.graph.nodes[nid]
            nodes.append({
                "id": nid,
                "kind": "use" if isinstance(n, UseNode) else "sense",
                "corpus": n.corpus if isinstance(n, UseNode) else None,
                "cluster": assignment.get(nid),
            })
        edges = []
        for p in sorted(ws.graph.edges):
            e = ws.graph.edges[p]
            if e.weight is None:
                continue
            edges.append({"pair": list(p), "weight": e.weight,
                          "shifted_weight": e.shifted_weight,
                          "n_judgments": len(e.judgments)})
        return {"word": word, "round": ws.round, "nodes": nodes, "edges": edges}

    def word_statuses(self, cid: str) -> list[dict]:
        camp = self.get(cid)
        return [
            {"word": w, "round": ws.round, "status": ws.status,
             "assigned": ws.assigned_count(), "judged": ws.judged_count()}
            for w, ws in sorted(camp.words.items())
        ]
