"""Acceptance: an exported bundle flows through quota -> prune -> metrics
with zero format errors, and the recalls produce quota allocations whose
count conservation holds exactly."""

import csv
import json
import subprocess
import sys

from score_exporter.export import export_run

DENSITY = 0.5


def run_toolkit(*args):
    return subprocess.run(
        [sys.executable, "-m", "prunelab", *args], capture_output=True, text=True
    )


def test_round_trip_acceptance(tmp_path):
    try:
        bundle = export_run(
            "blobs:classes=6,dim=5,train=40,test=30", epochs=5, seed=13, out_dir=str(tmp_path)
        )

        quotas = str(tmp_path / "quotas.csv")
        proc = run_toolkit(
            "quota", "--stats", bundle.class_stats, "--density", str(DENSITY), "--out", quotas
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr

        plan = str(tmp_path / "plan.jsonl")
        proc = run_toolkit(
            "prune", "--manifest", bundle.manifest, "--method", "random-quota",
            "--quotas", quotas, "--seed", "3", "--out", plan,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr

        report = str(tmp_path / "report.json")
        proc = run_toolkit("metrics", "--predictions", bundle.predictions, "--out", report)
        assert proc.returncode == 0, proc.stdout + proc.stderr
        data = json.loads(open(report).read())
        assert set(data) == {
            "recalls", "worst_class", "max_min_gap", "recall_std", "average", "weighted_average",
        }

        # conservation: quota counts sum to round(d * N) for the exported sizes
        with open(bundle.class_stats) as handle:
            sizes = {int(r["class_id"]): int(r["size"]) for r in csv.DictReader(handle)}
        with open(quotas) as handle:
            counts = {int(r["class_id"]): int(r["target_count"]) for r in csv.DictReader(handle)}
        assert set(counts) == set(sizes)
        assert sum(counts.values()) == round(DENSITY * sum(sizes.values()))

        plan_lines = open(plan).read().splitlines()
        assert len(plan_lines) - 1 == sum(counts.values())
        print("ACCEPTANCE exporter-round-trip: PASS")
    except BaseException:
        print("ACCEPTANCE exporter-round-trip: FAIL")
        raise
