"""Command-line entry points.

Batch analysis commands (cluster, simulate, score, ...) run in-process on
local files.  The `campaign` group is a thin HTTP client for the annotation
service; `serve` starts the service itself.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace

import click

from . import clustering as cl
from . import corpus as corp
from . import evaluation as ev
from . import measures as me
from . import sampling as sa
from . import simulation as sim
from .graph import UsageGraph


@click.group()
def main():
    """Usage-graph annotation, clustering and change-score toolkit."""


def _open_out(path):
    return sys.stdout if path == "-" else open(path, "w", encoding="utf-8")


# ---------------------------------------------------------------------------
# clustering


@main.command("cluster")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--max-clusters", default="10", show_default=True,
              help="Comma-separated list of cluster-count caps to try.")
@click.option("--restarts", default=5, show_default=True)
@click.option("--out", default="-", show_default=True,
              help="Assignment file (node-id TAB cluster-id); - for stdout.")
def cluster_cmd(graph_path, seed, max_clusters, restarts, out):
    """Cluster a usage graph by minimizing the edge-conflict loss."""
    graph = UsageGraph.load(graph_path)
    caps = tuple(int(x) for x in max_clusters.split(","))
    cfg = cl.ClusterConfig(max_clusters_values=caps, restarts=restarts, seed=seed)
    c = cl.cluster(graph, cfg)
    f = _open_out(out)
    try:
        for nid in sorted(c.assignment):
            f.write(f"{nid}\t{c.assignment[nid]}\n")
    finally:
        if f is not sys.stdout:
            f.close()
    n_clusters = len(c.clusters)
    click.echo(
        f"loss={cl.loss(graph, c):.6f} "
        f"normalized_loss={cl.normalized_loss(graph, c):.6f} "
        f"clusters={n_clusters}",
        err=True,
    )


# ---------------------------------------------------------------------------
# sampling


def _load_state_dir(state_dir, seed):
    """State dir layout: graph.jsonl, clustering.tsv, state.json."""
    from pathlib import Path
    d = Path(state_dir)
    graph = UsageGraph.load(d / "graph.jsonl")
    assignment = {}
    with open(d / "clustering.tsv", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                nid, label = line.rstrip("\n").split("\t")
                assignment[nid] = int(label)
    with open(d / "state.json", encoding="utf-8") as f:
        meta = json.load(f)
    cfg = sa.SamplerConfig(roster=tuple(meta.get("roster", ())),
                           seed=seed if seed is not None else meta.get("seed", 0),
                           **meta.get("sampler", {}))
    return sa.SamplerState(graph, cl.Clustering(assignment), meta["round"], cfg)


@main.command("sample-round")
@click.option("--state", "state_dir", required=True, type=click.Path(exists=True),
              help="Directory with graph.jsonl, clustering.tsv and state.json.")
@click.option("--seed", default=None, type=int)
@click.option("--out", default="-", show_default=True)
def sample_round_cmd(state_dir, seed, out):
    """Plan the next annotation round (pair TAB annotators TAB reason)."""
    state = _load_state_dir(state_dir, seed)
    outcome = sa.next_round(state)
    if isinstance(outcome, sa.Done):
        click.echo(f"done\t{outcome.reason}", err=True)
        return
    f = _open_out(out)
    try:
        for p in outcome.pairs:
            annotators = ",".join(outcome.assignments.get(p, ()))
            f.write(f"{p[0]},{p[1]}\t{annotators}\t{outcome.reasons[p]}\n")
    finally:
        if f is not sys.stdout:
            f.close()
    click.echo(f"round={outcome.round} pairs={len(outcome.pairs)}", err=True)


# ---------------------------------------------------------------------------
# simulation


@main.command("simulate")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True),
              help="JSON file overriding simulation defaults.")
@click.option("--seed", default=None, type=int)
@click.option("--report", "report_path", required=True, type=click.Path())
def simulate_cmd(config_path, seed, report_path):
    """Run a simulated annotation campaign and report per-word recovery."""
    opts = {}
    if config_path:
        with open(config_path, encoding="utf-8") as f:
            opts = json.load(f)
    sampler = (sa.SamplerConfig(**opts.pop("sampler"))
               if "sampler" in opts else sa.SamplerConfig(max_rounds=8))
    clustering_cfg = (cl.ClusterConfig(**opts.pop("clustering"))
                      if "clustering" in opts else sim.DEFAULT_SIM_CLUSTERING)
    for key in ("freq_range", "senses_range"):
        if key in opts:
            opts[key] = tuple(opts[key])
    cfg = sim.SimulationConfig(sampler=sampler, clustering=clustering_cfg, **opts)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    report = sim.run_simulation(cfg)
    with open(report_path, "w", encoding="utf-8") as f:
        f.write("word\tari\trounds\tjudgments\n")
        for r in report.results:
            f.write(f"{r.word}\t{r.ari:.6f}\t{r.rounds}\t{r.judgments}\n")
        f.write(f"# mean_ari={report.mean_ari:.6f} "
                f"total_judgments={report.total_judgments} "
                f"judgments_per_annotator={report.judgments_per_annotator:.1f}\n")
    click.echo(f"mean_ari={report.mean_ari:.6f} words={len(report.results)}")


# ---------------------------------------------------------------------------
# change scores


@main.command("score-change")
@click.option("--sfd", "sfd_path", required=True, type=click.Path(exists=True),
              help="Lines: word TAB c1-counts TAB c2-counts (comma-separated).")
def score_change_cmd(sfd_path):
    """Binary and graded change from per-word sense frequency counts."""
    with open(sfd_path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            word, c1s, c2s = line.rstrip("\n").split("\t")
            d = tuple(int(x) for x in c1s.split(","))
            e = tuple(int(x) for x in c2s.split(","))
            size = max(sum(d), sum(e))
            k, n = me.thresholds_for_sample_size(size)
            b = me.binary_change(d, e, k, n)
            g = me.graded_change(d, e)
            click.echo(f"{word}\t{b}\t{g:.6f}")


# ---------------------------------------------------------------------------
# shared-task scoring


@main.command("score")
@click.option("--subtask", type=click.Choice(["1", "2"]), required=True)
@click.option("--answers", "answers_path", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
def score_cmd(subtask, answers_path, gold_path):
    """Accuracy (subtask 1) or tie-corrected Spearman (subtask 2)."""
    st = int(subtask)
    pred = ev.load_answers(answers_path, st)
    gold = ev.load_answers(gold_path, st)
    try:
        if st == 1:
            click.echo(f"accuracy={ev.accuracy(pred, gold):.6f}")
            prf = ev.precision_recall_f1(pred, gold)
            fmt = lambda v: "-" if v is None else f"{v:.6f}"
            click.echo(f"precision={fmt(prf.precision)} recall={fmt(prf.recall)} "
                       f"f1={fmt(prf.f1)}")
        else:
            click.echo(f"spearman={ev.spearman(pred, gold):.6f}")
    except ev.UndefinedMetricError as exc:
        click.echo(f"undefined: {exc}", err=True)
        sys.exit(2)


@main.command("baseline")
@click.argument("kind", type=click.Choice(["freq", "count", "majority"]))
@click.option("--corpus1", "corpus1_path", type=click.Path(exists=True))
@click.option("--corpus2", "corpus2_path", type=click.Path(exists=True))
@click.option("--targets", "targets_path", required=True, type=click.Path(exists=True))
@click.option("--window", default=4, show_default=True)
@click.option("--out", default="-", show_default=True)
def baseline_cmd(kind, corpus1_path, corpus2_path, targets_path, window, out):
    """Frequency-difference, count-vector or majority-class baseline scores."""
    with open(targets_path, encoding="utf-8") as f:
        targets = [line.strip() for line in f if line.strip()]
    if kind == "majority":
        answers = ev.majority_baseline(targets)
    else:
        if not corpus1_path or not corpus2_path:
            raise click.UsageError("--corpus1 and --corpus2 are required")
        c1 = corp.load_corpus(corpus1_path, "C1")
        c2 = corp.load_corpus(corpus2_path, "C2")
        if kind == "freq":
            answers = ev.freq_baseline(c1, c2, targets)
        else:
            answers, undefined = ev.count_baseline(c1, c2, targets, window)
            for w, why in sorted(undefined.items()):
                click.echo(f"undefined\t{w}\t{why}", err=True)
    f = _open_out(out)
    try:
        for w in sorted(answers.entries):
            v = answers.entries[w]
            f.write(f"{w}\t{int(v) if answers.subtask == 1 else v}\n")
    finally:
        if f is not sys.stdout:
            f.close()


@main.command("analyze")
@click.option("--answers-dir", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--stats", "stats_path", required=True, type=click.Path(exists=True),
              help="Lines: word TAB freq1 TAB freq2 TAB senses1 TAB senses2.")
@click.option("--subtask", type=click.Choice(["1", "2"]), default="2", show_default=True)
def analyze_cmd(answers_dir, gold_path, stats_path, subtask):
    """Correlations of submitted answers with gold, bias statistics and
    per-word prediction difficulty."""
    from pathlib import Path
    st = int(subtask)
    gold = ev.load_answers(gold_path, st)
    stats = {}
    with open(stats_path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                w, f1, f2, s1, s2 = line.rstrip("\n").split("\t")
                stats[w] = ev.WordStats(float(f1), float(f2), int(s1), int(s2))
    answer_sets = []
    for p in sorted(Path(answers_dir).iterdir()):
        if p.is_file():
            answers = ev.load_answers(p, st)
            answer_sets.append((p.name, answers))
    click.echo("# correlation with gold")
    for name, answers in answer_sets:
        try:
            value = (ev.accuracy(answers, gold) if st == 1
                     else ev.spearman(answers, gold))
            click.echo(f"{name}\t{value:.6f}")
        except ev.UndefinedMetricError as exc:
            click.echo(f"{name}\tundefined ({exc})")
    click.echo("# gold-score bias correlations")
    try:
        bias, excluded = ev.bias_correlations(
            gold if st == 2 else ev.AnswerSet(2, dict(gold.entries)), stats)
        for name in ("frq_d", "frq_m", "ply_m"):
            click.echo(f"{name}\t{bias[name]:.6f}")
        if excluded:
            click.echo(f"# excluded: {','.join(sorted(excluded))}")
    except ev.UndefinedMetricError as exc:
        click.echo(f"bias\tundefined ({exc})")
    click.echo("# per-word difficulty")
    difficulty = ev.prediction_difficulty([a for _, a in answer_sets], gold, st)
    for w in sorted(difficulty):
        click.echo(f"{w}\t{difficulty[w]:.6f}")


# ---------------------------------------------------------------------------
# corpora


@main.command("stats")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
def stats_cmd(corpus_path):
    """Token count, type count and type-token ratio of a corpus."""
    c = corp.load_corpus(corpus_path)
    click.echo(f"tokens={c.token_count()} types={c.type_count()} "
               f"ttr={corp.ttr(c):.2f}")


@main.command("sample-uses")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--target", required=True)
@click.option("--n", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--epoch", default="C1", show_default=True)
def sample_uses_cmd(corpus_path, target, n, seed, epoch):
    """Sample target-word uses from a corpus (id TAB index TAB sentence)."""
    c = corp.load_corpus(corpus_path, epoch)
    for use in corp.sample_uses(c, target, n, seed):
        click.echo(f"{use.id}\t{use.target_index}\t{' '.join(use.tokens)}")


# ---------------------------------------------------------------------------
# service


@main.command("serve")
@click.option("--host", default=None, help="Defaults to LSCD_LISTEN or 127.0.0.1:8000.")
@click.option("--port", default=None, type=int)
def serve_cmd(host, port):
    """Run the annotation campaign HTTP service."""
    import os
    import uvicorn
    from .service import create_app
    listen = os.environ.get("LSCD_LISTEN", "127.0.0.1:8000")
    default_host, _, default_port = listen.partition(":")
    uvicorn.run(create_app(),
                host=host or default_host,
                port=port or int(default_port or 8000))


@main.group("campaign")
@click.option("--base-url", default="http://127.0.0.1:8000", show_default=True)
@click.option("--token", required=True,
              help="Operator token, or annotator token for next/judge.")
@click.pass_context
def campaign_group(ctx, base_url, token):
    """Thin HTTP client for the annotation service."""
    ctx.obj = {"base_url": base_url.rstrip("/"), "token": token}


def _client(ctx):
    import httpx
    return httpx.Client(base_url=ctx.obj["base_url"],
                        headers={"Authorization": f"Bearer {ctx.obj['token']}"})


def _show(resp):
    if resp.status_code >= 400:
        click.echo(f"error {resp.status_code}: {resp.json().get('detail')}", err=True)
        sys.exit(1)
    click.echo(json.dumps(resp.json(), indent=2, sort_keys=True))


@campaign_group.command("create")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
@click.pass_context
def campaign_create(ctx, spec_path):
    with open(spec_path, encoding="utf-8") as f:
        spec = json.load(f)
    with _client(ctx) as c:
        _show(c.post("/campaigns", json=spec))


@campaign_group.command("status")
@click.argument("campaign_id")
@click.pass_context
def campaign_status(ctx, campaign_id):
    with _client(ctx) as c:
        _show(c.get(f"/campaigns/{campaign_id}"))


@campaign_group.command("next")
@click.argument("campaign_id")
@click.option("--annotator", required=True)
@click.pass_context
def campaign_next(ctx, campaign_id, annotator):
    with _client(ctx) as c:
        _show(c.get(f"/campaigns/{campaign_id}/annotators/{annotator}/next"))


@campaign_group.command("judge")
@click.argument("campaign_id")
@click.option("--pair", required=True, help="Two node ids, comma-separated.")
@click.option("--value", required=True, type=int)
@click.pass_context
def campaign_judge(ctx, campaign_id, pair, value):
    a, b = pair.split(",")
    with _client(ctx) as c:
        _show(c.post(f"/campaigns/{campaign_id}/judgments",
                     json={"pair": [a, b], "value": value}))


@campaign_group.command("advance")
@click.argument("campaign_id")
@click.option("--word", required=True)
@click.pass_context
def campaign_advance(ctx, campaign_id, word):
    with _client(ctx) as c:
        _show(c.post(f"/campaigns/{campaign_id}/words/{word}/advance"))


@campaign_group.command("scores")
@click.argument("campaign_id")
@click.option("--word", required=True)
@click.pass_context
def campaign_scores(ctx, campaign_id, word):
    with _client(ctx) as c:
        _show(c.get(f"/campaigns/{campaign_id}/words/{word}/scores"))


@campaign_group.command("graph")
@click.argument("campaign_id")
@click.option("--word", required=True)
@click.pass_context
def campaign_graph(ctx, campaign_id, word):
    with _client(ctx) as c:
        _show(c.get(f"/campaigns/{campaign_id}/words/{word}/graph"))


@campaign_group.command("reassign")
@click.argument("campaign_id")
@click.option("--word", required=True)
@click.option("--pair", required=True, help="Two node ids, comma-separated.")
@click.option("--from", "from_annotator", required=True)
@click.option("--to", "to_annotator", required=True)
@click.pass_context
def campaign_reassign(ctx, campaign_id, word, pair, from_annotator, to_annotator):
    a, b = pair.split(",")
    with _client(ctx) as c:
        _show(c.post(f"/campaigns/{campaign_id}/reassign",
                     json={"word": word, "pair": [a, b],
                           "from_annotator": from_annotator,
                           "to_annotator": to_annotator}))


if __name__ == "__main__":
    main()
