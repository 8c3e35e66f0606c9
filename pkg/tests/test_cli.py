"""End-to-end CLI runs: exit codes, JSON summaries, file-level determinism."""

import json
import subprocess
import sys

import pytest

from prunelab import io
from prunelab.pruning import DatasetManifest
from prunelab.quotas import ClassStats


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "prunelab", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


@pytest.fixture()
def stats_file(tmp_path):
    path = str(tmp_path / "class_stats.csv")
    io.write_class_stats(path, [ClassStats(0, 100, 0.9), ClassStats(1, 100, 0.5)])
    return path


@pytest.fixture()
def manifest_file(tmp_path):
    path = str(tmp_path / "manifest.csv")
    samples = [(i, 0) for i in range(100)] + [(100 + i, 1) for i in range(100)]
    io.write_manifest(path, DatasetManifest(tuple(samples)))
    return path


class TestQuotaCommand:
    def test_hand_trace_instance(self, tmp_path, stats_file):
        out = str(tmp_path / "quotas.csv")
        proc = run_cli("quota", "--stats", stats_file, "--density", "0.5", "--out", out)
        assert proc.returncode == 0, proc.stderr
        summary = json.loads(proc.stdout)
        assert summary["command"] == "quota"
        assert summary["total_retained"] == 100
        quotas = io.read_quotas(out)
        assert quotas.target_counts == {0: 17, 1: 83}

    def test_cdbw_weights_sidecar(self, tmp_path, stats_file):
        out = str(tmp_path / "quotas.csv")
        wout = str(tmp_path / "weights.json")
        proc = run_cli(
            "quota", "--stats", stats_file, "--density", "0.5",
            "--out", out, "--cdbw-out", wout,
        )
        assert proc.returncode == 0
        weights = json.loads(open(wout).read())
        assert weights == {"0": pytest.approx(0.1), "1": pytest.approx(0.5)}

    def test_module_error_exits_one_with_payload(self, tmp_path):
        stats = str(tmp_path / "stats.csv")
        io.write_class_stats(stats, [ClassStats(0, 10, 1.0), ClassStats(1, 10, 1.0)])
        proc = run_cli("quota", "--stats", stats, "--density", "0.5", "--out", str(tmp_path / "q.csv"))
        assert proc.returncode == 1
        payload = json.loads(proc.stdout)
        assert payload["error"] == "all_perfect_recall"

    def test_bad_argument_exits_two(self, tmp_path, stats_file):
        proc = run_cli("quota", "--stats", stats_file, "--density", "1.5", "--out", str(tmp_path / "q.csv"))
        assert proc.returncode == 2


class TestPruneCommand:
    def test_random_full_density_keeps_all(self, tmp_path, manifest_file):
        out = str(tmp_path / "plan.jsonl")
        proc = run_cli(
            "prune", "--manifest", manifest_file, "--method", "random",
            "--density", "1.0", "--seed", "0", "--out", out,
        )
        assert proc.returncode == 0
        plan = io.read_plan(out)
        assert len(plan.retained) == 200

    def test_quota_pipeline_composition(self, tmp_path, stats_file, manifest_file):
        quotas = str(tmp_path / "quotas.csv")
        plan = str(tmp_path / "plan.jsonl")
        assert run_cli("quota", "--stats", stats_file, "--density", "0.5", "--out", quotas).returncode == 0
        proc = run_cli(
            "prune", "--manifest", manifest_file, "--method", "random-quota",
            "--quotas", quotas, "--seed", "3", "--out", plan,
        )
        assert proc.returncode == 0
        summary = json.loads(proc.stdout)
        assert summary["per_class"] == {"0": 17, "1": 83}

    def test_score_pruning_via_files(self, tmp_path, manifest_file):
        from prunelab.scores import ScoreTable

        scores = str(tmp_path / "scores.csv")
        io.write_scores(scores, ScoreTable({i: float(i) for i in range(200)}, "external"))
        out = str(tmp_path / "plan.jsonl")
        proc = run_cli(
            "prune", "--manifest", manifest_file, "--method", "score",
            "--scores", scores, "--density", "0.25", "--out", out,
        )
        assert proc.returncode == 0
        plan = io.read_plan(out)
        assert plan.retained == set(range(150, 200))

    def test_kcenter_pruning(self, tmp_path):
        from prunelab.scores import EmbeddingSet

        man = str(tmp_path / "m.csv")
        io.write_manifest(man, DatasetManifest(((0, 0), (1, 0), (2, 0))))
        emb = str(tmp_path / "e.csv")
        io.write_embeddings(emb, EmbeddingSet({0: [0.0], 1: [1.0], 2: [10.0]}))
        out = str(tmp_path / "plan.jsonl")
        proc = run_cli(
            "prune", "--manifest", man, "--method", "kcenter",
            "--embeddings", emb, "--density", "0.67", "--out", out,
        )
        assert proc.returncode == 0
        assert io.read_plan(out).retained == {0, 2}

    def test_byte_identical_reruns(self, tmp_path, manifest_file):
        out_a = str(tmp_path / "a.jsonl")
        out_b = str(tmp_path / "b.jsonl")
        args = ["prune", "--manifest", manifest_file, "--method", "random", "--density", "0.5", "--seed", "4"]
        assert run_cli(*args, "--out", out_a).returncode == 0
        assert run_cli(*args, "--out", out_b).returncode == 0
        assert open(out_a, "rb").read() == open(out_b, "rb").read()


class TestMetricsCommand:
    def test_report_and_correlation(self, tmp_path):
        from prunelab.metrics import PredictionRow, PredictionSet

        stats3 = str(tmp_path / "stats3.csv")
        io.write_class_stats(
            stats3,
            [ClassStats(0, 100, 0.9), ClassStats(1, 100, 0.5), ClassStats(2, 100, 0.7)],
        )
        preds = str(tmp_path / "preds.csv")
        rows = [PredictionRow(i, i % 3, 0) for i in range(12)]
        io.write_predictions(preds, PredictionSet(tuple(rows)))
        quotas = str(tmp_path / "quotas.csv")
        run_cli("quota", "--stats", stats3, "--density", "0.5", "--out", quotas)
        out = str(tmp_path / "report.json")
        proc = run_cli(
            "metrics", "--predictions", preds, "--out", out,
            "--quotas", quotas, "--stats", stats3,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        report = json.loads(open(out).read())
        assert report["recalls"] == {"0": 1.0, "1": 0.0, "2": 0.0}
        assert report["worst_class"] == 0.0
        summary = json.loads(proc.stdout)
        # quotas keep more of the lower-recall classes, so the correlation is negative
        assert summary["density_recall_correlation"] < -0.8

    def test_correlation_with_two_classes_exits_one(self, tmp_path, stats_file):
        from prunelab.metrics import PredictionRow, PredictionSet

        preds = str(tmp_path / "preds.csv")
        rows = [PredictionRow(i, i % 2, 0) for i in range(10)]
        io.write_predictions(preds, PredictionSet(tuple(rows)))
        quotas = str(tmp_path / "quotas.csv")
        run_cli("quota", "--stats", stats_file, "--density", "0.5", "--out", quotas)
        proc = run_cli(
            "metrics", "--predictions", preds, "--out", str(tmp_path / "r.json"),
            "--quotas", quotas, "--stats", stats_file,
        )
        assert proc.returncode == 1
        assert "3 classes" in json.loads(proc.stdout)["message"]


class TestGaussianCommand:
    def test_analytic_reference_rows(self, tmp_path):
        out = str(tmp_path / "analytic.csv")
        proc = run_cli(
            "gaussian", "analytic", "--mu0", "-1", "--mu1", "1",
            "--sigma0", "0.5", "--sigma1", "1", "--out", out,
        )
        assert proc.returncode == 0
        lines = open(out).read().splitlines()
        assert lines[0] == "experiment,replicate,threshold,r0,r1,avg_risk"
        worst = [l for l in lines if l.startswith("analytic_worst_class")][0].split(",")
        assert float(worst[3]) == pytest.approx(0.0912112197, abs=1e-9)
        assert float(worst[3]) == float(worst[4])

    def test_fig3_protocol_run(self, tmp_path):
        out = str(tmp_path / "fig3.csv")
        proc = run_cli(
            "gaussian", "fig3", "--mu0", "-1", "--mu1", "1", "--sigma0", "0.5",
            "--sigma1", "1", "--density", "0.5", "--replicates", "10",
            "--points", "400", "--seed", "1", "--arm", "variance_quota", "--out", out,
        )
        assert proc.returncode == 0
        summary = json.loads(proc.stdout)
        assert abs(summary["mean_threshold"] - (-1 / 3)) < 0.12
        lines = open(out).read().splitlines()
        assert len([l for l in lines if l.startswith("variance_quota,")]) == 10
        worst = [l for l in lines if l.startswith("analytic_worst_class")][0].split(",")
        assert float(worst[3]) == pytest.approx(0.091, abs=5e-4)


class TestImbalanceCommand:
    def test_two_class_factor_five(self, tmp_path, manifest_file):
        out = str(tmp_path / "imbalanced.csv")
        proc = run_cli(
            "imbalance", "--manifest", manifest_file, "--factor", "5",
            "--seed", "2", "--out", out,
        )
        assert proc.returncode == 0
        summary = json.loads(proc.stdout)
        assert summary["sizes"] == {"0": 100, "1": 20}
        man = io.read_manifest(out)
        assert man.class_sizes == {0: 100, 1: 20}

    def test_not_balanced_exits_one(self, tmp_path):
        man = str(tmp_path / "m.csv")
        io.write_manifest(man, DatasetManifest(((0, 0), (1, 0), (2, 1))))
        proc = run_cli("imbalance", "--manifest", man, "--factor", "2", "--out", str(tmp_path / "o.csv"))
        assert proc.returncode == 1
        assert json.loads(proc.stdout)["error"] == "not_balanced"


class TestScoreCommand:
    def test_el2n_from_probs_jsonl(self, tmp_path):
        probs = tmp_path / "probs.jsonl"
        probs.write_text(
            '{"id": 0, "probs": [0.7, 0.3], "label": 0}\n'
            '{"id": 1, "probs": [0.0, 1.0], "label": 1}\n'
        )
        out = str(tmp_path / "scores.csv")
        proc = run_cli("score", "--method", "el2n", "--probs", str(probs), "--out", out)
        assert proc.returncode == 0
        table = io.read_scores(out)
        assert table.method == "el2n"
        assert table.entries[1] == 0.0

    def test_forgetting_and_average_pipeline(self, tmp_path):
        from prunelab.scores import TelemetryLog, TelemetryRecord

        telemetry = str(tmp_path / "telemetry.jsonl")
        records = []
        for sid, pattern in ((0, [1, 0, 1]), (1, [1, 1, 1])):
            for epoch, c in enumerate(pattern):
                records.append(TelemetryRecord(sid, epoch, 0.5, bool(c)))
        io.write_telemetry(telemetry, TelemetryLog(tuple(records)))
        out_a = str(tmp_path / "a.csv")
        assert run_cli("score", "--method", "forgetting", "--telemetry", telemetry, "--out", out_a).returncode == 0
        assert io.read_scores(out_a).entries == {0: 1.0, 1: 0.0}
        out_avg = str(tmp_path / "avg.csv")
        proc = run_cli("score", "--method", "average", "--inputs", out_a, out_a, "--out", out_avg)
        assert proc.returncode == 0
        assert io.read_scores(out_avg).entries == {0: 1.0, 1: 0.0}

    def test_dynunc_window(self, tmp_path):
        from prunelab.scores import TelemetryLog, TelemetryRecord

        telemetry = str(tmp_path / "telemetry.jsonl")
        records = [TelemetryRecord(0, e, p, True) for e, p in enumerate([0.0, 1.0, 0.0])]
        io.write_telemetry(telemetry, TelemetryLog(tuple(records)))
        out = str(tmp_path / "d.csv")
        proc = run_cli(
            "score", "--method", "dynunc", "--telemetry", telemetry,
            "--window", "2", "--out", out,
        )
        assert proc.returncode == 0
        assert io.read_scores(out).entries[0] == pytest.approx(0.25)


class TestArgumentValidation:
    def test_missing_input_file_exits_two(self, tmp_path):
        proc = run_cli(
            "quota", "--stats", str(tmp_path / "nope.csv"), "--density", "0.5",
            "--out", str(tmp_path / "q.csv"),
        )
        assert proc.returncode == 2
        assert "not found" in proc.stderr

    def test_quota_plan_density_reconstructed_from_manifest(self, tmp_path, stats_file, manifest_file):
        quotas = str(tmp_path / "quotas.csv")
        run_cli("quota", "--stats", stats_file, "--density", "0.5", "--out", quotas)
        plan_path = str(tmp_path / "plan.jsonl")
        run_cli(
            "prune", "--manifest", manifest_file, "--method", "random-quota",
            "--quotas", quotas, "--seed", "0", "--out", plan_path,
        )
        plan = io.read_plan(plan_path)
        assert plan.density == pytest.approx(0.5, abs=1e-12)


class TestGroupWeightedMetrics:
    def test_weighted_average_appears_in_report(self, tmp_path):
        from prunelab.metrics import PredictionRow, PredictionSet

        preds = str(tmp_path / "preds.csv")
        rows = [
            PredictionRow(0, 0, 0, group=0),
            PredictionRow(1, 0, 1, group=0),
            PredictionRow(2, 1, 1, group=1),
            PredictionRow(3, 1, 1, group=1),
        ]
        io.write_predictions(preds, PredictionSet(tuple(rows)))
        weights = tmp_path / "weights.json"
        weights.write_text('{"0": 3.0, "1": 1.0}')
        out = str(tmp_path / "report.json")
        proc = run_cli(
            "metrics", "--predictions", preds, "--group-weights", str(weights), "--out", out
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        report = json.loads(open(out).read())
        assert report["weighted_average"] == pytest.approx(0.75 * 0.5 + 0.25 * 1.0)
