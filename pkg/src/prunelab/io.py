"""Wire formats: CSV/JSONL readers and writers for every toolkit artifact.

All files are UTF-8 with LF line endings; writes go through a temp file and
an atomic rename.  Numeric fields are emitted at 12 significant digits.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import FormatError
from .experiments import ExperimentRow
from .metrics import EvalReport, PredictionRow, PredictionSet
from .pruning import DatasetManifest, PrunePlan
from .quotas import ClassStats, QuotaAllocation
from .scores import SCORE_METHODS, EmbeddingSet, ScoreTable, TelemetryLog, TelemetryRecord

__all__ = [
    "fmt",
    "atomic_write_text",
    "read_class_stats",
    "write_class_stats",
    "read_quotas",
    "write_quotas",
    "read_manifest",
    "write_manifest",
    "read_scores",
    "write_scores",
    "read_embeddings",
    "write_embeddings",
    "read_telemetry",
    "write_telemetry",
    "read_plan",
    "write_plan",
    "read_predictions",
    "write_predictions",
    "write_report",
    "write_experiment_rows",
    "read_group_weights",
]


def fmt(x: float) -> str:
    """12-significant-digit rendering used by every numeric column."""
    return f"{float(x):.12g}"


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return [line.rstrip("\r\n") for line in handle if line.strip()]


def _split_csv(path: str, expected_header: str) -> list[list[str]]:
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    if lines[0] != expected_header:
        raise FormatError(f"{path}: expected header {expected_header!r}, got {lines[0]!r}")
    return [line.split(",") for line in lines[1:]]


def _csv_text(header: str, rows: Iterable[Iterable[str]]) -> str:
    body = "\n".join(",".join(row) for row in rows)
    return header + ("\n" + body if body else "") + "\n"


# class_stats.csv ------------------------------------------------------------


def read_class_stats(path: str) -> list[ClassStats]:
    stats = []
    for row in _split_csv(path, "class_id,size,recall"):
        try:
            stats.append(ClassStats(int(row[0]), int(row[1]), float(row[2])))
        except (IndexError, ValueError) as exc:
            raise FormatError(f"{path}: bad class_stats row {row!r}: {exc}") from exc
    if not stats:
        raise FormatError(f"{path}: no class rows")
    return stats


def write_class_stats(path: str, stats: Iterable[ClassStats]) -> None:
    rows = [(str(s.class_id), str(s.size), fmt(s.recall)) for s in stats]
    atomic_write_text(path, _csv_text("class_id,size,recall", rows))


# quotas.csv -----------------------------------------------------------------


def read_quotas(path: str, requested_density: Optional[float] = None) -> QuotaAllocation:
    densities = {}
    counts = {}
    for row in _split_csv(path, "class_id,density,target_count"):
        try:
            cid = int(row[0])
            densities[cid] = float(row[1])
            counts[cid] = int(row[2])
        except (IndexError, ValueError) as exc:
            raise FormatError(f"{path}: bad quota row {row!r}: {exc}") from exc
    if not counts:
        raise FormatError(f"{path}: no quota rows")
    if requested_density is None:
        requested_density = min(1.0, sum(densities.values()) / len(densities))
    return QuotaAllocation(densities, counts, requested_density)


def write_quotas(path: str, quotas: QuotaAllocation) -> None:
    rows = [
        (str(cid), fmt(quotas.densities[cid]), str(quotas.target_counts[cid]))
        for cid in sorted(quotas.target_counts)
    ]
    atomic_write_text(path, _csv_text("class_id,density,target_count", rows))


# manifest.csv ---------------------------------------------------------------


def read_manifest(path: str) -> DatasetManifest:
    samples = []
    for row in _split_csv(path, "sample_id,class_id"):
        try:
            samples.append((int(row[0]), int(row[1])))
        except (IndexError, ValueError) as exc:
            raise FormatError(f"{path}: bad manifest row {row!r}: {exc}") from exc
    try:
        return DatasetManifest(tuple(samples))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_manifest(path: str, man: DatasetManifest) -> None:
    rows = [(str(sid), str(cid)) for sid, cid in man.samples]
    atomic_write_text(path, _csv_text("sample_id,class_id", rows))


# scores.csv -----------------------------------------------------------------


def read_scores(path: str) -> ScoreTable:
    entries = {}
    methods = set()
    for row in _split_csv(path, "sample_id,score,method"):
        try:
            entries[int(row[0])] = float(row[1])
            methods.add(row[2])
        except (IndexError, ValueError) as exc:
            raise FormatError(f"{path}: bad score row {row!r}: {exc}") from exc
    if not entries:
        raise FormatError(f"{path}: no score rows")
    if len(methods) != 1:
        raise FormatError(f"{path}: mixed method tags {sorted(methods)}")
    method = methods.pop()
    if method not in SCORE_METHODS:
        raise FormatError(f"{path}: unknown method tag {method!r}")
    return ScoreTable(entries, method)


def write_scores(path: str, table: ScoreTable) -> None:
    rows = [(str(sid), fmt(table.entries[sid]), table.method) for sid in sorted(table.entries)]
    atomic_write_text(path, _csv_text("sample_id,score,method", rows))


# embeddings.csv -------------------------------------------------------------


def read_embeddings(path: str) -> EmbeddingSet:
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[0] != "sample_id" or len(header) < 2 or any(
        col != f"e{i}" for i, col in enumerate(header[1:])
    ):
        raise FormatError(f"{path}: expected header sample_id,e0,e1,...")
    vectors = {}
    for line in lines[1:]:
        row = line.split(",")
        if len(row) != len(header):
            raise FormatError(f"{path}: row width {len(row)} != header width {len(header)}")
        try:
            vectors[int(row[0])] = np.array([float(v) for v in row[1:]])
        except ValueError as exc:
            raise FormatError(f"{path}: bad embedding row {row!r}: {exc}") from exc
    if not vectors:
        raise FormatError(f"{path}: no embedding rows")
    return EmbeddingSet(vectors)


def write_embeddings(path: str, emb: EmbeddingSet) -> None:
    dim = len(next(iter(emb.vectors.values())))
    header = "sample_id," + ",".join(f"e{i}" for i in range(dim))
    rows = [
        [str(sid)] + [fmt(v) for v in emb.vectors[sid]] for sid in sorted(emb.vectors)
    ]
    atomic_write_text(path, _csv_text(header, rows))


# telemetry.jsonl ------------------------------------------------------------


def read_telemetry(path: str) -> TelemetryLog:
    records = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        try:
            obj = json.loads(line)
            records.append(
                TelemetryRecord(
                    sample_id=int(obj["id"]),
                    epoch=int(obj["epoch"]),
                    p_target=float(obj["p_target"]),
                    correct=bool(obj["correct"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}:{lineno}: bad telemetry record: {exc}") from exc
    try:
        return TelemetryLog(tuple(records))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_telemetry(path: str, log: TelemetryLog) -> None:
    lines = [
        json.dumps(
            {
                "id": rec.sample_id,
                "epoch": rec.epoch,
                "p_target": float(fmt(rec.p_target)),
                "correct": rec.correct,
            }
        )
        for rec in log.records
    ]
    atomic_write_text(path, "\n".join(lines) + "\n")


# plan.jsonl -----------------------------------------------------------------


def read_plan(path: str) -> PrunePlan:
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path}: empty plan")
    try:
        header = json.loads(lines[0])
        method = str(header["method"])
        density = float(header["density"])
        seed = header["seed"]
        seed = None if seed is None else int(seed)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad plan header: {exc}") from exc
    retained = set()
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            retained.add(int(json.loads(line)["id"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}:{lineno}: bad plan row: {exc}") from exc
    return PrunePlan(frozenset(retained), method, density, seed)


def write_plan(path: str, plan: PrunePlan) -> None:
    header = json.dumps(
        {"method": plan.method, "density": float(fmt(plan.density)), "seed": plan.seed}
    )
    lines = [header] + [json.dumps({"id": sid}) for sid in sorted(plan.retained)]
    atomic_write_text(path, "\n".join(lines) + "\n")


# predictions.csv ------------------------------------------------------------


def read_predictions(path: str) -> PredictionSet:
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    if lines[0] == "sample_id,true_class,pred_class":
        has_group = False
    elif lines[0] == "sample_id,true_class,pred_class,group":
        has_group = True
    else:
        raise FormatError(f"{path}: expected predictions header, got {lines[0]!r}")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        try:
            rows.append(
                PredictionRow(
                    sample_id=int(parts[0]),
                    true_class=int(parts[1]),
                    predicted_class=int(parts[2]),
                    group=int(parts[3]) if has_group else None,
                )
            )
        except (IndexError, ValueError) as exc:
            raise FormatError(f"{path}: bad prediction row {parts!r}: {exc}") from exc
    try:
        return PredictionSet(tuple(rows))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_predictions(path: str, preds: PredictionSet) -> None:
    has_group = any(r.group is not None for r in preds.rows)
    header = "sample_id,true_class,pred_class" + (",group" if has_group else "")
    rows = []
    for r in preds.rows:
        row = [str(r.sample_id), str(r.true_class), str(r.predicted_class)]
        if has_group:
            row.append(str(r.group if r.group is not None else 0))
        rows.append(row)
    atomic_write_text(path, _csv_text(header, rows))


# report.json ----------------------------------------------------------------


def write_report(path: str, report: EvalReport) -> None:
    data = report.as_dict()
    data["recalls"] = {k: float(fmt(v)) for k, v in data["recalls"].items()}
    for key in ("worst_class", "max_min_gap", "recall_std", "average"):
        data[key] = float(fmt(data[key]))
    if data["weighted_average"] is not None:
        data["weighted_average"] = float(fmt(data["weighted_average"]))
    atomic_write_text(path, json.dumps(data, indent=2, sort_keys=False) + "\n")


# experiment.csv -------------------------------------------------------------


def write_experiment_rows(path: str, rows: Iterable[ExperimentRow]) -> None:
    out = [
        (row.experiment, str(row.replicate), fmt(row.threshold), fmt(row.r0), fmt(row.r1), fmt(row.avg_risk))
        for row in rows
    ]
    atomic_write_text(path, _csv_text("experiment,replicate,threshold,r0,r1,avg_risk", out))


# group weights --------------------------------------------------------------


def read_group_weights(path: str) -> Mapping[int, float]:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise FormatError(f"{path}: expected an object of group -> weight")
    try:
        return {int(k): float(v) for k, v in raw.items()}
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad group weight entry: {exc}") from exc
