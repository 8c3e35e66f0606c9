"""Metric identities, the Pearson oracle, and group weighting checks."""

import numpy as np
import pytest

from prunelab.errors import DegenerateVariance, EmptyClass, KeyMismatch, UnknownGroupWeight
from prunelab.metrics import (
    PredictionRow,
    PredictionSet,
    correlation_density_accuracy,
    evaluate,
)


def preds_from_lists(true, pred, group=None):
    rows = []
    for i, (t, p) in enumerate(zip(true, pred)):
        rows.append(PredictionRow(i, t, p, None if group is None else group[i]))
    return PredictionSet(tuple(rows))


class TestEvaluate:
    def test_all_correct(self):
        p = preds_from_lists([0, 1, 2, 0, 1, 2], [0, 1, 2, 0, 1, 2])
        report = evaluate(p)
        assert all(v == 1.0 for v in report.recalls.values())
        assert report.worst_class == 1.0
        assert report.max_min_gap == 0.0
        assert report.recall_std == 0.0
        assert report.average == 1.0

    def test_two_class_example(self):
        # class 0 fully correct, class 1 half correct, equal sizes
        true = [0, 0, 0, 0, 1, 1, 1, 1]
        pred = [0, 0, 0, 0, 1, 1, 0, 0]
        report = evaluate(preds_from_lists(true, pred))
        assert report.recalls == {0: 1.0, 1: 0.5}
        assert report.worst_class == 0.5
        assert report.max_min_gap == 0.5
        assert report.recall_std == pytest.approx(0.25, abs=1e-15)
        assert report.average == pytest.approx(0.75, abs=1e-15)

    def test_group_weighting_matches_direct_formula(self):
        # four groups shaped like a spuriously-correlated eval split
        sizes = {0: 2255, 1: 2255, 2: 642, 3: 642}
        accs = {0: 0.98, 1: 0.92, 2: 0.60, 3: 0.75}
        rows = []
        sid = 0
        for g, n in sizes.items():
            correct = round(accs[g] * n)
            for i in range(n):
                true_cls = g % 2
                pred_cls = true_cls if i < correct else 1 - true_cls
                rows.append(PredictionRow(sid, true_cls, pred_cls, group=g))
                sid += 1
        preds = PredictionSet(tuple(rows))

        weights = {g: float(n) for g, n in sizes.items()}
        report = evaluate(preds, weights)
        group_recalls = {g: round(accs[g] * sizes[g]) / sizes[g] for g in sizes}
        mass = sum(weights.values())
        expected_weighted = sum(weights[g] / mass * group_recalls[g] for g in sizes)
        assert report.weighted_average == pytest.approx(expected_weighted, abs=1e-12)

        uniform = evaluate(preds, {g: 1.0 for g in sizes}).weighted_average
        assert uniform == pytest.approx(
            sum(group_recalls.values()) / len(group_recalls), abs=1e-12
        )
        assert abs(uniform - report.weighted_average) > 1e-3

    def test_metric_identities_on_random_sets(self):
        rng = np.random.default_rng(21)
        for _ in range(300):
            k = int(rng.integers(2, 8))
            n = int(rng.integers(k, 200))
            true = np.concatenate([np.arange(k), rng.integers(0, k, size=n)])
            pred = rng.integers(0, k, size=len(true))
            report = evaluate(preds_from_lists(true.tolist(), pred.tolist()))
            values = list(report.recalls.values())
            assert report.worst_class == min(values)
            assert report.worst_class <= sum(values) / len(values) <= max(values)
            assert report.max_min_gap >= 0
            if report.recall_std == 0:
                assert max(values) == min(values)

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(5)
        true = rng.integers(0, 3, size=50)
        true[:3] = [0, 1, 2]
        pred = rng.integers(0, 3, size=50)
        base_rows = [PredictionRow(i, int(t), int(p)) for i, (t, p) in enumerate(zip(true, pred))]
        report_a = evaluate(PredictionSet(tuple(base_rows)))
        perm = rng.permutation(50)
        report_b = evaluate(PredictionSet(tuple(base_rows[i] for i in perm)))
        assert report_a == report_b

    def test_missing_class_index_rejected(self):
        with pytest.raises(EmptyClass):
            evaluate(preds_from_lists([0, 2], [0, 2]))

    def test_unknown_group_weight_rejected(self):
        p = preds_from_lists([0, 1], [0, 1], group=[0, 5])
        with pytest.raises(UnknownGroupWeight):
            evaluate(p, {0: 1.0})
        q = preds_from_lists([0, 1], [0, 1])
        with pytest.raises(UnknownGroupWeight):
            evaluate(q, {0: 1.0})


class TestCorrelation:
    def test_perfect_correlation(self):
        vals = {0: 0.2, 1: 0.5, 2: 0.9}
        assert correlation_density_accuracy(vals, dict(vals)) == pytest.approx(1.0)

    def test_anti_correlation_signature_exact(self):
        # dyadic recalls keep every float operation exact, so the complement
        # construction yields exactly -1.0
        recalls = {k: v for k, v in enumerate([0.125, 0.25, 0.5, 0.625, 0.875])}
        densities = {k: 1.0 - v for k, v in recalls.items()}
        assert correlation_density_accuracy(densities, recalls) == -1.0

    def test_matches_covariance_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(300):
            k = int(rng.integers(3, 40))
            xs = rng.uniform(0, 1, size=k)
            ys = rng.uniform(0, 1, size=k)
            if np.std(xs) == 0 or np.std(ys) == 0:
                continue
            got = correlation_density_accuracy(
                {i: float(x) for i, x in enumerate(xs)},
                {i: float(y) for i, y in enumerate(ys)},
            )
            expected = float(np.corrcoef(xs, ys)[0, 1])
            assert got == pytest.approx(expected, abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            correlation_density_accuracy({0: 0.1, 1: 0.2}, {0: 0.3, 1: 0.4})
        with pytest.raises(KeyMismatch):
            correlation_density_accuracy({0: 0.1, 1: 0.2, 2: 0.3}, {0: 0.3, 1: 0.4, 5: 0.5})
        with pytest.raises(DegenerateVariance):
            correlation_density_accuracy(
                {0: 0.5, 1: 0.5, 2: 0.5}, {0: 0.1, 1: 0.2, 2: 0.3}
            )

    def test_uniform_group_weights_equal_macro_recall_mean(self):
        rng = np.random.default_rng(31)
        true = rng.integers(0, 2, size=40)
        true[:2] = [0, 1]
        pred = rng.integers(0, 2, size=40)
        groups = rng.integers(0, 4, size=40).tolist()
        p = preds_from_lists(true.tolist(), pred.tolist(), group=groups)
        report = evaluate(p, weights={g: 1.0 for g in set(groups)})
        per_group = {}
        for row in p.rows:
            per_group.setdefault(row.group, []).append(row.predicted_class == row.true_class)
        expected = np.mean([np.mean(v) for v in per_group.values()])
        assert report.weighted_average == pytest.approx(float(expected), abs=1e-12)
