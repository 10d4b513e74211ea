import math
from fractions import Fraction

import numpy as np
import pytest

from cpbench.conformal import (
    ConformalPredictor,
    PredictionSet,
    PredictionSetBatch,
    calibrate,
    conformal_quantile,
    conformalize,
    predict_set,
    quantile_index,
)
from cpbench.data import KIND_PROBABILITIES, LogitDataset
from cpbench.errors import SchemaError
from cpbench.scores import ScoreSpec
from cpbench.synthetic import SyntheticSpec, generate


def brute_force_quantile(scores, alpha):
    """Sort-and-index reference for the calibration threshold."""
    ordered = sorted(scores)
    n = len(ordered)
    k = math.ceil(Fraction(n + 1) * (1 - Fraction(alpha)))
    if k > n:
        return math.inf
    return ordered[k - 1]


class TestCalibrate:
    def test_k_equals_n_picks_max(self):
        scores = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
        assert conformal_quantile(scores, 0.1) == pytest.approx(0.9)

    def test_mid_order_statistic(self):
        assert conformal_quantile([0.1, 0.2, 0.3, 0.4], 0.5) == pytest.approx(
            brute_force_quantile([0.1, 0.2, 0.3, 0.4], 0.5)
        ) == pytest.approx(0.3)

    def test_degenerate_small_n(self):
        assert conformal_quantile([0.1, 0.2, 0.3, 0.4], 0.1) == math.inf

    def test_exact_ceiling_arithmetic(self):
        # Float-naive ceil((9+1)*(1-0.1)) would give 10 and wrongly
        # degenerate; the exact value is 9.
        assert quantile_index(9, 0.1) == 9
        assert quantile_index(4, 0.5) == 3
        assert quantile_index(4, 0.1) == 5
        assert quantile_index(1000, 0.1) == 901

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            conformal_quantile([], 0.1)
        with pytest.raises(ValueError):
            conformal_quantile([0.5], 0.0)
        with pytest.raises(ValueError):
            conformal_quantile([0.5], 1.0)
        with pytest.raises(ValueError):
            conformal_quantile([np.nan], 0.1)

    def test_matches_brute_force_on_random_vectors(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            n = int(rng.integers(1, 51))
            scores = rng.random(n)
            alpha = float(rng.choice([0.05, 0.1, 0.3, 0.5]))
            assert conformal_quantile(scores, alpha) == brute_force_quantile(
                scores.tolist(), alpha
            )

    def test_calibrate_returns_predictor(self):
        spec = ScoreSpec(method="lac")
        predictor = calibrate([0.1, 0.9], 0.5, spec)
        assert isinstance(predictor, ConformalPredictor)
        assert predictor.n_cal == 2
        assert predictor.q_alpha == pytest.approx(0.9)
        assert not predictor.degenerate


class TestPredictSet:
    def test_lac_threshold(self):
        predictor = ConformalPredictor(ScoreSpec(method="lac"), 0.1, 0.35, 10)
        assert predict_set([0.7, 0.2, 0.1], predictor).members == (0,)

    def test_degenerate_returns_all_classes(self):
        for method in ("lac", "aps", "raps"):
            predictor = ConformalPredictor(
                ScoreSpec(method=method, u_mode="fixed", u_value=0.5),
                0.1,
                math.inf,
                1,
            )
            assert predict_set([0.2] * 5, predictor).members == (0, 1, 2, 3, 4)

    def test_aps_cumulative(self):
        spec = ScoreSpec(method="aps", u_mode="fixed", u_value=1.0)
        predictor = ConformalPredictor(spec, 0.1, 0.85, 10)
        assert predict_set([0.5, 0.3, 0.2], predictor).members == (0, 1)

    def test_empty_set_possible(self):
        spec = ScoreSpec(method="aps", u_mode="fixed", u_value=1.0)
        predictor = ConformalPredictor(spec, 0.1, 0.1, 10)
        s = predict_set([0.5, 0.3, 0.2], predictor)
        assert s.members == ()
        assert s.size == 0

    def test_uniform_mode_requires_u(self):
        predictor = ConformalPredictor(ScoreSpec(method="aps"), 0.1, 0.5, 10)
        with pytest.raises(ValueError):
            predict_set([0.5, 0.5], predictor)
        predict_set([0.5, 0.5], predictor, u=0.3)


class TestPredictionSetBatch:
    def test_accessors(self):
        batch = PredictionSetBatch(
            np.array([[True, False, True], [False, False, False]])
        )
        assert batch.n == 2
        assert batch[0].members == (0, 2)
        assert batch[1].size == 0
        np.testing.assert_array_equal(batch.sizes(), [2, 0])
        np.testing.assert_array_equal(batch.contains([0, 1]), [True, False])
        assert [s.members for s in batch.to_sets()] == [(0, 2), ()]

    def test_label_length_checked(self):
        batch = PredictionSetBatch(np.ones((2, 3), dtype=bool))
        with pytest.raises(SchemaError):
            batch.contains([0])


class TestConformalize:
    def test_single_sample_hand_trace(self):
        # n=1, alpha=0.5: k = ceil(2 * 0.5) = 1 <= 1, so q is the single
        # calibration score 1 - 1.0 = 0.0 and the test set is {0}.
        ds = LogitDataset(
            np.array([[1.0, 0.0]]), np.array([0]), KIND_PROBABILITIES
        )
        predictor, sets = conformalize(ds, ds, ScoreSpec(method="lac"), 0.5)
        assert predictor.q_alpha == pytest.approx(0.0)
        assert sets[0].members == (0,)

    def test_one_hot_classifier_full_coverage(self):
        rng = np.random.default_rng(4)
        labels = rng.integers(0, 5, 50)
        values = np.eye(5)[labels]
        ds = LogitDataset(values, labels, KIND_PROBABILITIES)
        for method in ("lac", "aps", "raps"):
            spec = ScoreSpec(method=method, u_mode="fixed", u_value=0.0)
            _, sets = conformalize(ds, ds, spec, 0.1, seed=1)
            assert np.all(sets.contains(labels))

    def test_schema_mismatch(self):
        a = LogitDataset(np.array([[0.5, 0.5]]), np.array([0]), KIND_PROBABILITIES)
        b = LogitDataset(
            np.array([[0.3, 0.3, 0.4]]), np.array([0]), KIND_PROBABILITIES
        )
        with pytest.raises(SchemaError):
            conformalize(a, b, ScoreSpec(method="lac"), 0.1)

    def test_determinism(self):
        ds = generate(SyntheticSpec(num_classes=8, n=400, seed=3))
        cal, test = ds.take(np.arange(200)), ds.take(np.arange(200, 400))
        spec = ScoreSpec(method="raps")
        p1, s1 = conformalize(cal, test, spec, 0.1, seed=5)
        p2, s2 = conformalize(cal, test, spec, 0.1, seed=5)
        assert p1.q_alpha == p2.q_alpha
        np.testing.assert_array_equal(s1.membership, s2.membership)

    def test_alpha_nesting(self):
        ds = generate(SyntheticSpec(num_classes=6, n=600, seed=8))
        cal, test = ds.take(np.arange(300)), ds.take(np.arange(300, 600))
        for method in ("lac", "aps", "raps"):
            spec = ScoreSpec(method=method)
            _, loose = conformalize(cal, test, spec, 0.05, seed=2)
            _, tight = conformalize(cal, test, spec, 0.2, seed=2)
            assert np.all(tight.membership <= loose.membership)

    def test_marginal_coverage_statistical(self):
        # Exchangeable splits: mean coverage within Monte-Carlo error of
        # [1 - alpha, 1 - alpha + 1/(n_cal + 1)].
        n_cal, alpha, trials = 200, 0.1, 60
        coverages = []
        for seed in range(trials):
            ds = generate(SyntheticSpec(num_classes=10, n=n_cal + 1000, seed=seed))
            cal = ds.take(np.arange(n_cal))
            test = ds.take(np.arange(n_cal, ds.n))
            _, sets = conformalize(cal, test, ScoreSpec(method="aps"), alpha, seed)
            coverages.append(sets.contains(test.labels).mean())
        mean = np.mean(coverages)
        se = np.std(coverages) / np.sqrt(trials)
        assert 1 - alpha - 3 * se <= mean <= 1 - alpha + 1 / (n_cal + 1) + 3 * se
