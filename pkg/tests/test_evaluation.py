import numpy as np
import pytest

from midcontrol.evaluation import ConfusionMatrix, EvalError, confusion, roc_auc


def pair_statistic(scores, labels):
    """Brute-force Mann-Whitney: concordant pairs / total, ties counted half."""
    scores = np.asarray(scores, dtype=float)
    pos = scores[np.asarray(labels) == 1]
    neg = scores[np.asarray(labels) == 0]
    total = concordant = 0.0
    for p in pos:
        for q in neg:
            total += 1
            if p > q:
                concordant += 1
            elif p == q:
                concordant += 0.5
    return concordant / total


class TestConfusion:
    def test_published_hmc_row_arithmetic(self):
        cm = ConfusionMatrix(tc=286, fp=106, tp=19494, fc=6851)
        assert cm.true_positive_rate == pytest.approx(286 / 392)
        assert round(cm.true_positive_rate, 2) == 0.73
        assert cm.true_negative_rate == pytest.approx(19494 / 26345)
        assert round(cm.true_negative_rate, 2) == 0.74

    def test_published_gaussian_row_arithmetic(self):
        cm = ConfusionMatrix(tc=278, fp=114, tp=19462, fc=6883)
        assert cm.true_positive_rate == pytest.approx(278 / 392)
        assert round(cm.true_positive_rate, 2) == 0.71

    def test_separable_case(self):
        scores = [1.0, 1.0, 0.0, 0.0]
        labels = [1, 1, 0, 0]
        cm = confusion(scores, labels, 0.5)
        assert cm.fp == 0 and cm.fc == 0
        assert cm.tc == 2 and cm.tp == 2

    def test_counts_sum_to_dataset_size_for_any_threshold(self):
        rng = np.random.default_rng(0)
        scores = rng.random(200)
        labels = (rng.random(200) < 0.3).astype(float)
        for thr in np.linspace(0, 1, 11):
            assert confusion(scores, labels, thr).total == 200

    def test_ties_classify_as_conflict(self):
        cm = confusion([0.5], [0], threshold=0.5)
        assert cm.fc == 1

    def test_length_mismatch(self):
        with pytest.raises(EvalError, match="equal-length"):
            confusion([0.1, 0.2], [1], 0.5)


class TestRocAuc:
    def test_perfect_separation(self):
        roc = roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
        assert roc.auc == pytest.approx(1.0)

    def test_identical_scores_chance_diagonal(self):
        roc = roc_auc([0.4] * 10, [1, 0] * 5)
        assert roc.auc == pytest.approx(0.5)

    def test_six_item_toy_set_matches_pair_counting(self):
        scores = [0.9, 0.7, 0.7, 0.4, 0.3, 0.1]
        labels = [1, 0, 1, 1, 0, 0]
        roc = roc_auc(scores, labels)
        assert roc.auc == pytest.approx(pair_statistic(scores, labels), abs=1e-12)

    def test_trapezoid_equals_pair_statistic_random(self):
        rng = np.random.default_rng(1)
        for trial in range(20):
            n = int(rng.integers(5, 40))
            scores = np.round(rng.random(n), 1)  # force ties
            labels = (rng.random(n) < 0.5).astype(float)
            if labels.min() == labels.max():
                continue
            roc = roc_auc(scores, labels)
            assert roc.auc == pytest.approx(pair_statistic(scores, labels), abs=1e-12)

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(2)
        scores = rng.random(60)
        labels = (rng.random(60) < 0.4).astype(float)
        base = roc_auc(scores, labels).auc
        for transform in (lambda s: s ** 3, lambda s: np.exp(2 * s), lambda s: 2 * s + 5):
            assert roc_auc(transform(scores), labels).auc == pytest.approx(base, abs=1e-12)

    def test_endpoints_and_monotonicity(self):
        rng = np.random.default_rng(3)
        scores = rng.random(50)
        labels = (rng.random(50) < 0.5).astype(float)
        roc = roc_auc(scores, labels)
        np.testing.assert_allclose(roc.points[0], [0, 0])
        np.testing.assert_allclose(roc.points[-1], [1, 1])
        assert np.all(np.diff(roc.points[:, 0]) >= 0)
        assert np.all(np.diff(roc.points[:, 1]) >= 0)

    def test_single_class_rejected(self):
        with pytest.raises(EvalError, match="single class"):
            roc_auc([0.1, 0.9], [1, 1])
