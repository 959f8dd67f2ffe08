import json

import pytest
from click.testing import CliRunner

from lscd.cli import main
from lscd.clustering import ClusterConfig, cluster
from lscd.graph import UsageGraph

from conftest import random_judged_graph


@pytest.fixture
def runner():
    return CliRunner()


def test_cluster_command(tmp_path, runner):
    g = random_judged_graph(10, seed=3)
    gp = tmp_path / "g.jsonl"
    g.dump(gp)
    out = tmp_path / "assign.tsv"
    res = runner.invoke(main, ["cluster", "--graph", str(gp), "--seed", "1",
                               "--out", str(out)])
    assert res.exit_code == 0, res.output
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 10
    assignment = dict(line.split("\t") for line in lines)
    assert set(assignment) == set(g.nodes)
    assert "loss=" in res.stderr and "clusters=" in res.stderr


def test_sample_round_command(tmp_path, runner):
    g = random_judged_graph(14, seed=6, density=0.25)
    c = cluster(g, ClusterConfig(seed=6))
    state = tmp_path / "state"
    state.mkdir()
    g.dump(state / "graph.jsonl")
    with open(state / "clustering.tsv", "w") as f:
        for nid, lab in sorted(c.assignment.items()):
            f.write(f"{nid}\t{lab}\n")
    (state / "state.json").write_text(json.dumps(
        {"round": 1, "roster": ["a1", "a2"], "sampler": {"max_rounds": 5}}))
    res = runner.invoke(main, ["sample-round", "--state", str(state), "--seed", "2"])
    assert res.exit_code == 0, res.output
    for line in res.stdout.strip().split("\n"):
        pair, annotators, reason = line.split("\t")
        assert len(pair.split(",")) == 2
        assert annotators
        assert reason in ("explore", "combine", "disagree", "conflict", "confirm")


def test_simulate_command(tmp_path, runner):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_words": 2, "freq_range": [20, 30], "sigma": 0.0}))
    report = tmp_path / "report.tsv"
    res = runner.invoke(main, ["simulate", "--config", str(cfg), "--seed", "4",
                               "--report", str(report)])
    assert res.exit_code == 0, res.output
    lines = report.read_text().strip().split("\n")
    assert lines[0] == "word\tari\trounds\tjudgments"
    assert lines[-1].startswith("# mean_ari=")
    assert len(lines) == 4                      # header + 2 words + summary


def test_score_change_command(tmp_path, runner):
    sfd = tmp_path / "sfd.tsv"
    sfd.write_text("w1\t58,0,4,0\t52,14,5,1\nw2\t12,45,0,1\t85,6,1,1\n")
    res = runner.invoke(main, ["score-change", "--sfd", str(sfd)])
    assert res.exit_code == 0, res.output
    rows = dict()
    for line in res.stdout.strip().split("\n"):
        w, b, g = line.split("\t")
        rows[w] = (int(b), float(g))
    assert rows["w1"][0] == 1
    assert rows["w1"][1] == pytest.approx(0.34, abs=0.005)
    assert rows["w2"][0] == 0
    assert rows["w2"][1] == pytest.approx(0.66, abs=0.005)


def test_score_command_both_subtasks(tmp_path, runner):
    (tmp_path / "gold1.tsv").write_text("a\t1\nb\t0\nc\t1\n")
    (tmp_path / "ans1.tsv").write_text("a\t1\nb\t1\nc\t1\n")
    res = runner.invoke(main, ["score", "--subtask", "1",
                               "--answers", str(tmp_path / "ans1.tsv"),
                               "--gold", str(tmp_path / "gold1.tsv")])
    assert res.exit_code == 0
    assert "accuracy=0.666667" in res.stdout
    (tmp_path / "gold2.tsv").write_text("a\t0.1\nb\t0.5\nc\t0.9\n")
    (tmp_path / "ans2.tsv").write_text("a\t0.2\nb\t0.4\nc\t0.8\n")
    res = runner.invoke(main, ["score", "--subtask", "2",
                               "--answers", str(tmp_path / "ans2.tsv"),
                               "--gold", str(tmp_path / "gold2.tsv")])
    assert res.exit_code == 0
    assert "spearman=1.000000" in res.stdout


def test_score_command_signals_undefined(tmp_path, runner):
    (tmp_path / "gold.tsv").write_text("a\t0.5\nb\t0.5\nc\t0.5\n")
    (tmp_path / "ans.tsv").write_text("a\t0.2\nb\t0.4\nc\t0.8\n")
    res = runner.invoke(main, ["score", "--subtask", "2",
                               "--answers", str(tmp_path / "ans.tsv"),
                               "--gold", str(tmp_path / "gold.tsv")])
    assert res.exit_code == 2
    assert "undefined" in res.stderr


def test_baseline_commands(tmp_path, runner):
    (tmp_path / "c1.txt").write_text("the bank of the river\nmoney in the bank\n")
    (tmp_path / "c2.txt").write_text("the bank raised rates\nbank accounts pay\n")
    (tmp_path / "targets.txt").write_text("bank\n")
    for kind in ("freq", "count"):
        res = runner.invoke(main, ["baseline", kind,
                                   "--corpus1", str(tmp_path / "c1.txt"),
                                   "--corpus2", str(tmp_path / "c2.txt"),
                                   "--targets", str(tmp_path / "targets.txt")])
        assert res.exit_code == 0, res.output
        assert res.stdout.startswith("bank\t")
    res = runner.invoke(main, ["baseline", "majority",
                               "--targets", str(tmp_path / "targets.txt")])
    assert res.exit_code == 0
    assert res.stdout.strip() == "bank\t0"


def test_stats_and_sample_uses(tmp_path, runner):
    (tmp_path / "c.txt").write_text("a b a\nc a\n")
    res = runner.invoke(main, ["stats", "--corpus", str(tmp_path / "c.txt")])
    assert res.exit_code == 0
    assert "tokens=5 types=3" in res.stdout
    res = runner.invoke(main, ["sample-uses", "--corpus", str(tmp_path / "c.txt"),
                               "--target", "a", "--n", "2", "--seed", "0"])
    assert res.exit_code == 0
    assert len(res.stdout.strip().split("\n")) == 2


def test_analyze_command(tmp_path, runner):
    (tmp_path / "gold.tsv").write_text("a\t0.1\nb\t0.5\nc\t0.9\nd\t0.3\n")
    ansdir = tmp_path / "answers"
    ansdir.mkdir()
    (ansdir / "sys1.tsv").write_text("a\t0.2\nb\t0.4\nc\t0.8\nd\t0.1\n")
    (tmp_path / "stats.tsv").write_text(
        "a\t0.01\t0.02\t2\t2\nb\t0.005\t0.01\t1\t3\nc\t0.02\t0.001\t4\t2\nd\t0.03\t0.03\t2\t2\n")
    res = runner.invoke(main, ["analyze", "--answers-dir", str(ansdir),
                               "--gold", str(tmp_path / "gold.tsv"),
                               "--stats", str(tmp_path / "stats.tsv")])
    assert res.exit_code == 0, res.output
    assert "# correlation with gold" in res.stdout
    assert "frq_d" in res.stdout
    assert "# per-word difficulty" in res.stdout
