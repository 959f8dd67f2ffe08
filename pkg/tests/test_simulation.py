import math
import random

import pytest
from sklearn.metrics import adjusted_rand_score

from lscd.clustering import Clustering
from lscd.simulation import (AnnotatorModel, GroundTruth, SimulationConfig,
                             SimulationError, adjusted_rand_index,
                             generate_ground_truth, run_simulation,
                             simulate_judgment, simulate_word, zipf_split)
from lscd.util import stable_seed


def test_zipf_split_total_and_monotone():
    for total in (10, 57, 200):
        for k in (1, 3, 5):
            parts = zipf_split(total, k, 1.0)
            assert sum(parts) == total
            assert len(parts) == k
            assert all(parts[i] >= parts[i + 1] for i in range(k - 1))


def test_zipf_split_flat_exponent():
    assert zipf_split(9, 3, 0.0) == (3, 3, 3)


def test_generate_ground_truth_change_share():
    cfg = SimulationConfig(n_words=10, freq_range=(20, 30), change_share=0.5, seed=1)
    words = generate_ground_truth(cfg, seed=1)
    assert sum(1 for w in words if w.changed) == 5
    for w in words:
        zero1 = [i for i, v in enumerate(w.true_d1) if v == 0]
        zero2 = [i for i, v in enumerate(w.true_d2) if v == 0]
        if w.changed:
            # exactly one non-dominant sense vanished from exactly one corpus
            assert (len(zero1) == 1) != (len(zero2) == 1)
            gone = (zero1 or zero2)[0]
            assert gone >= 1
        else:
            assert not zero1 and not zero2


def test_ground_truth_nodes_match_distributions():
    cfg = SimulationConfig(n_words=3, freq_range=(10, 15), seed=2)
    for gt in generate_ground_truth(cfg, seed=2):
        c1 = [n for n in gt.nodes if n.corpus == "C1"]
        c2 = [n for n in gt.nodes if n.corpus == "C2"]
        assert len(c1) == sum(gt.true_d1)
        assert len(c2) == sum(gt.true_d2)
        assert set(gt.labels) == {n.id for n in gt.nodes}


def test_simulate_judgment_noise_free():
    m = AnnotatorModel(sigma=0.0)
    assert simulate_judgment(m, 1, 1, seed=0) == 4
    assert simulate_judgment(m, 1, 2, seed=0) == 1


def test_simulate_judgment_clipped_and_rounded():
    m = AnnotatorModel(sigma=3.0)
    values = {simulate_judgment(m, 0, 0, seed=s) for s in range(200)}
    assert values <= {1, 2, 3, 4}
    assert 1 in values and 4 in values   # noise reaches both ends, never 0 or 5


def test_simulate_judgment_deterministic_per_seed():
    m = AnnotatorModel(sigma=0.7)
    assert simulate_judgment(m, 0, 1, seed=42) == simulate_judgment(m, 0, 1, seed=42)


def test_negative_sigma_rejected():
    with pytest.raises(SimulationError):
        AnnotatorModel(sigma=-0.1)


def test_ari_matches_sklearn():
    rng = random.Random(0)
    for _ in range(300):
        n = rng.randint(2, 30)
        a = [rng.randint(0, 4) for _ in range(n)]
        b = [rng.randint(0, 4) for _ in range(n)]
        ids = [f"n{i}" for i in range(n)]
        ours = adjusted_rand_index(Clustering(dict(zip(ids, a))),
                                   Clustering(dict(zip(ids, b))))
        ref = adjusted_rand_score(a, b)
        assert ours == pytest.approx(ref, abs=1e-12)


def test_ari_degenerate_cases():
    ids = ["a", "b", "c"]
    same = Clustering(dict.fromkeys(ids, 0))
    assert adjusted_rand_index(same, same) == 1.0
    singletons = Clustering({n: i for i, n in enumerate(ids)})
    assert adjusted_rand_index(singletons, singletons) == 1.0
    assert adjusted_rand_index(same, singletons) == 0.0


def test_ari_requires_same_nodes():
    with pytest.raises(SimulationError):
        adjusted_rand_index(Clustering({"a": 0}), Clustering({"b": 0}))


def test_simulate_word_perfect_recovery_without_noise():
    cfg = SimulationConfig(n_words=2, freq_range=(25, 40), sigma=0.0,
                           senses_range=(2, 3), seed=3)
    gt = generate_ground_truth(cfg, seed=3)[0]
    result = simulate_word(gt, cfg, stable_seed(3, "word", 0))
    assert result.ari == 1.0
    assert result.done_reason in ("converged", "max_rounds")
    assert result.judgments > 0


def test_run_simulation_report_shape():
    cfg = SimulationConfig(n_words=3, freq_range=(20, 30), sigma=0.0, seed=5)
    report = run_simulation(cfg)
    assert len(report.results) == 3
    assert report.mean_ari == pytest.approx(
        sum(r.ari for r in report.results) / 3)
    assert report.total_judgments == sum(r.judgments for r in report.results)
    assert report.judgments_per_annotator == pytest.approx(
        report.total_judgments / cfg.n_annotators)


def test_run_simulation_deterministic():
    cfg = SimulationConfig(n_words=2, freq_range=(20, 30), sigma=0.3, seed=8)
    a, b = run_simulation(cfg), run_simulation(cfg)
    assert [(r.word, r.ari, r.judgments) for r in a.results] == \
           [(r.word, r.ari, r.judgments) for r in b.results]


def test_config_validation():
    with pytest.raises(SimulationError):
        SimulationConfig(freq_range=(10, 5))
    with pytest.raises(SimulationError):
        SimulationConfig(change_share=1.5)
    with pytest.raises(SimulationError):
        SimulationConfig(n_words=0)
