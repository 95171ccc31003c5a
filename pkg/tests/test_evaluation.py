import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import roc_auc_score

from hybridad.data import FeatureMatrix
from hybridad.errors import DegenerateSubsample, OneClassOnly
from hybridad.evaluation import (
    EvalReport,
    EvalRow,
    auc,
    evaluate_methods,
    runtime_benchmark,
    score_method,
    stability_experiment,
)
from hybridad.scoring import HybridConfig
from hybridad.synth import make_benchmark

from oracles import pair_count_auc


class TestAuc:
    def test_perfect(self):
        assert auc([0, 0, 1], [0.1, 0.2, 0.9]) == 1.0

    def test_all_ties(self):
        assert auc([0, 1, 0, 1], [0.3] * 4) == 0.5

    def test_enumerated(self):
        assert auc([0, 1, 0, 1], [0.4, 0.3, 0.1, 0.9]) == 0.75

    def test_one_class(self):
        with pytest.raises(OneClassOnly):
            auc([1, 1], [0.2, 0.3])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            auc([0, 1], [0.2])

    @settings(max_examples=100)
    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 6)), min_size=2, max_size=80))
    def test_pair_count_oracle(self, data):
        labels = [y for y, _ in data]
        if len(set(labels)) < 2:
            return
        scores = [float(s) for _, s in data]
        assert abs(auc(labels, scores) - pair_count_auc(labels, scores)) <= 1e-12

    def test_matches_sklearn(self, rng):
        y = rng.integers(0, 2, 200)
        s = np.round(rng.normal(size=200), 1)
        assert auc(y, s) == pytest.approx(roc_auc_score(y, s), abs=1e-12)

    def test_monotone_invariance(self, rng):
        y = rng.integers(0, 2, 100)
        s = rng.normal(size=100)
        assert auc(y, s) == pytest.approx(auc(y, np.exp(3 * s) + 1), abs=1e-12)

    def test_complement(self, rng):
        y = rng.integers(0, 2, 100)
        s = rng.normal(size=100)
        assert auc(y, s) + auc(y, -s) == pytest.approx(1.0, abs=1e-12)


def test_aggregate_population_std():
    report = EvalReport([EvalRow("hybrid", 0.5, 0, 0.8), EvalRow("hybrid", 0.5, 1, 0.9)])
    mean, std = report.aggregate()[("hybrid", 0.5)]
    assert mean == pytest.approx(0.85)
    assert std == pytest.approx(0.05)


@pytest.fixture(scope="module")
def small_bench():
    X, y = make_benchmark(40, 2, 6, 4, seed=0)
    return FeatureMatrix.from_array(X), y


FAST = HybridConfig(n_trees=15)


class TestStability:
    def test_full_fraction_equals_direct_scoring(self, small_bench):
        x, y = small_bench
        rep = stability_experiment(x, y, [1.0], [3], ["hybrid", "knn"], FAST)
        assert len(rep) == 2
        for row in rep.rows:
            assert row.auc == auc(y, score_method(row.method, x, 3, FAST))

    def test_structure(self, small_bench):
        x, y = small_bench
        rep = stability_experiment(x, y, [0.5], [0, 1], ["hybrid", "lof"], FAST)
        assert [(r.method, r.seed) for r in rep.rows] == [
            ("hybrid", 0), ("lof", 0), ("hybrid", 1), ("lof", 1)
        ]
        assert all(0 <= r.auc <= 1 and r.wall_time >= 0 for r in rep.rows)

    def test_rows_reproducible_alone(self, small_bench):
        x, y = small_bench
        full = stability_experiment(x, y, [0.2, 0.5], [0, 1], ["knn"], FAST)
        for row in full.rows:
            alone = stability_experiment(x, y, [row.fraction], [row.seed], [row.method], FAST)
            assert alone.rows[0].auc == row.auc

    def test_retries_until_two_classes(self):
        x = FeatureMatrix.from_array(np.arange(100.0))
        y = np.zeros(100, dtype=int)
        y[0] = 1
        rep = stability_experiment(x, y, [0.1], [0], ["knn"], FAST)
        assert len(rep) == 1

    def test_gives_up(self):
        x = FeatureMatrix.from_array(np.arange(20.0))
        with pytest.raises(DegenerateSubsample):
            stability_experiment(x, np.zeros(20, dtype=int), [0.5], [0], ["knn"], FAST)

    def test_bad_fraction(self, small_bench):
        x, y = small_bench
        with pytest.raises(ValueError):
            stability_experiment(x, y, [0.0], [0], ["knn"])


class TestRuntime:
    def test_single_repeat(self, small_bench):
        x, _ = small_bench
        rep = runtime_benchmark(x, ["knn", "lof"], repeats=1)
        assert [r.method for r in rep.rows] == ["knn", "lof"]
        assert all(r.wall_time >= 0 and r.auc is None for r in rep.rows)

    def test_median_of_repeats(self, small_bench, monkeypatch):
        import hybridad.evaluation as ev

        ticks = iter([0.0, 1.0, 10.0, 13.0, 20.0, 22.0, 30.0, 35.0, 40.0, 44.0])
        monkeypatch.setattr(ev.time, "perf_counter", lambda: next(ticks))
        x, _ = small_bench
        rep = runtime_benchmark(x, ["knn"], repeats=5)
        assert rep.rows[0].wall_time == statistics.median([1, 3, 2, 5, 4])

    def test_larger_input_takes_longer(self):
        times = []
        for n in (60, 240):
            X, _ = make_benchmark(n, 2, 0, 4, seed=0)
            rep = runtime_benchmark(FeatureMatrix.from_array(X), ["hybrid"], repeats=1, config=FAST)
            times.append(rep.rows[0].wall_time)
        assert times[1] > times[0]


def test_evaluate_methods_rows_and_outputs(small_bench, tmp_path):
    x, y = small_bench
    rep = evaluate_methods(x, y, ["hybrid", "iforest", "knn", "lof"], config=FAST)
    assert [r.method for r in rep.rows] == ["hybrid", "iforest", "knn", "lof"]
    rep.write_csv(tmp_path / "r.csv", timings=False)
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "method,fraction,seed,auc,wall_time_s"
    assert all(line.endswith(",") for line in lines[1:])
    rep.write_scores_csv(tmp_path / "s.csv")
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 1 + 4 * x.n_rows


def test_unknown_method(small_bench):
    with pytest.raises(ValueError):
        score_method("cof", small_bench[0])
