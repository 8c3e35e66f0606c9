"""Per-sample utility scores from training telemetry and embeddings.

Three telemetry-driven scores (output-error norm, forget counts, sliding
uncertainty) plus greedy k-center selection over embeddings.  All scores are
"higher = harder / more valuable"; pruning keeps the top-scored samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyEmbeddingSet,
    KeyMismatch,
    NotAProbability,
    WindowTooLarge,
)

__all__ = [
    "TelemetryRecord",
    "TelemetryLog",
    "ScoreTable",
    "EmbeddingSet",
    "SCORE_METHODS",
    "el2n_scores",
    "forgetting_scores",
    "dynunc_scores",
    "kcenter_select",
    "average_scores",
]

SCORE_METHODS = ("el2n", "grand", "forgetting", "dynunc", "external")

_PROB_SUM_TOL = 1e-6


@dataclass(frozen=True)
class TelemetryRecord:
    sample_id: int
    epoch: int
    p_target: float
    correct: bool


@dataclass(frozen=True)
class TelemetryLog:
    """Per-epoch, per-sample prediction telemetry.

    Each sample must appear at exactly the epochs 0..E-1 for a single E
    shared by the whole log.
    """

    records: tuple[TelemetryRecord, ...]
    epochs: int = field(init=False)
    samples: int = field(init=False)

    def __post_init__(self):
        records = tuple(self.records)
        if not records:
            raise ValueError("telemetry log is empty")
        per_sample: dict[int, dict[int, TelemetryRecord]] = {}
        for rec in records:
            if not 0.0 <= rec.p_target <= 1.0:
                raise ValueError(f"sample {rec.sample_id}: p_target outside [0, 1]")
            if rec.epoch < 0:
                raise ValueError(f"sample {rec.sample_id}: negative epoch")
            epochs = per_sample.setdefault(rec.sample_id, {})
            if rec.epoch in epochs:
                raise ValueError(f"sample {rec.sample_id}: duplicate epoch {rec.epoch}")
            epochs[rec.epoch] = rec
        lengths = {len(v) for v in per_sample.values()}
        if len(lengths) != 1:
            raise ValueError("samples disagree on epoch count")
        n_epochs = lengths.pop()
        for sid, epochs in per_sample.items():
            if set(epochs) != set(range(n_epochs)):
                raise ValueError(f"sample {sid}: epochs are not contiguous 0..{n_epochs - 1}")
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "epochs", n_epochs)
        object.__setattr__(self, "samples", len(per_sample))

    def trajectories(self) -> dict[int, tuple[np.ndarray, np.ndarray]]:
        """Per sample: (p_target over epochs, correctness over epochs)."""
        out: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        probs = {sid: np.empty(self.epochs) for sid in {r.sample_id for r in self.records}}
        corrects = {sid: np.empty(self.epochs, dtype=bool) for sid in probs}
        for rec in self.records:
            probs[rec.sample_id][rec.epoch] = rec.p_target
            corrects[rec.sample_id][rec.epoch] = rec.correct
        for sid in probs:
            out[sid] = (probs[sid], corrects[sid])
        return out


@dataclass(frozen=True)
class ScoreTable:
    """Finite per-sample scores under one scoring method tag."""

    entries: dict[int, float]
    method: str

    def __post_init__(self):
        if self.method not in SCORE_METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        for sid, score in self.entries.items():
            if not np.isfinite(score):
                raise ValueError(f"sample {sid}: score must be finite")


@dataclass(frozen=True)
class EmbeddingSet:
    """Fixed-dimension embedding vectors keyed by sample id."""

    vectors: dict[int, np.ndarray]

    def __post_init__(self):
        if not self.vectors:
            raise EmptyEmbeddingSet("no embedding vectors")
        dims = {np.asarray(v).shape for v in self.vectors.values()}
        if len(dims) != 1 or len(next(iter(dims))) != 1 or next(iter(dims))[0] < 1:
            raise ValueError("vectors must share one dimensionality >= 1")
        object.__setattr__(
            self,
            "vectors",
            {sid: np.asarray(v, dtype=float) for sid, v in self.vectors.items()},
        )


def el2n_scores(
    probs: Mapping[int, Sequence[float]], labels: Mapping[int, int]
) -> ScoreTable:
    """Euclidean norm of (predicted class probabilities - one-hot label)."""
    if set(probs) != set(labels):
        raise KeyMismatch("probs and labels cover different sample ids")
    dims = {len(p) for p in probs.values()}
    if len(dims) > 1:
        raise DimensionMismatch(f"probability vectors of mixed lengths {sorted(dims)}")
    entries = {}
    for sid in probs:
        p = np.asarray(probs[sid], dtype=float)
        if np.any(p < 0.0) or abs(float(p.sum()) - 1.0) > _PROB_SUM_TOL:
            raise NotAProbability(f"sample {sid}: vector is not a probability distribution")
        label = labels[sid]
        if not 0 <= label < len(p):
            raise DimensionMismatch(f"sample {sid}: label {label} outside 0..{len(p) - 1}")
        diff = p.copy()
        diff[label] -= 1.0
        entries[sid] = float(np.linalg.norm(diff))
    return ScoreTable(entries, "el2n")


def forgetting_scores(log: TelemetryLog) -> ScoreTable:
    """Count of correct-then-incorrect transitions across epochs.

    Samples never predicted correctly are the hardest of all and score one
    above the largest finite count, keeping file round-trips lossless.
    """
    finite: dict[int, int] = {}
    never_correct: list[int] = []
    for sid, (_, correct) in log.trajectories().items():
        if not correct.any():
            never_correct.append(sid)
            continue
        finite[sid] = int(np.sum(correct[:-1] & ~correct[1:]))
    sentinel = max(finite.values(), default=0) + 1
    entries = {sid: float(v) for sid, v in finite.items()}
    entries.update({sid: float(sentinel) for sid in never_correct})
    return ScoreTable(entries, "forgetting")


def dynunc_scores(log: TelemetryLog, window: int) -> ScoreTable:
    """Mean sliding-window variance of the target-class probability.

    For each epoch k >= window-1, take the population variance of p_target
    over the ``window`` epochs ending at k; the score averages those.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    if window > log.epochs:
        raise WindowTooLarge(f"window {window} exceeds {log.epochs} logged epochs")
    entries = {}
    for sid, (p, _) in log.trajectories().items():
        windows = np.lib.stride_tricks.sliding_window_view(p, window)
        entries[sid] = float(np.mean(np.var(windows, axis=1)))
    return ScoreTable(entries, "dynunc")


def _distances(matrix: np.ndarray, center: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        return np.linalg.norm(matrix - center, axis=1)
    if metric == "cosine":
        norms = np.linalg.norm(matrix, axis=1) * np.linalg.norm(center)
        with np.errstate(invalid="ignore", divide="ignore"):
            sims = (matrix @ center) / norms
        return 1.0 - np.nan_to_num(sims, nan=0.0)
    raise ValueError(f"unknown metric {metric!r}")


def kcenter_select(
    emb: EmbeddingSet,
    keep: int,
    start_rule: str = "farthest_from_mean",
    metric: str = "euclidean",
) -> list[int]:
    """Greedy k-center selection; returns sample ids in selection order.

    Seeds with the sample farthest from the dataset mean, then repeatedly
    adds the sample farthest from its nearest selected center.  All ties go
    to the lowest sample id, so the output is deterministic, and a longer
    selection always extends a shorter one.
    """
    if start_rule != "farthest_from_mean":
        raise ValueError(f"unknown start rule {start_rule!r}")
    ids = sorted(emb.vectors)
    if not 1 <= keep <= len(ids):
        raise ValueError(f"keep must lie in 1..{len(ids)}")
    matrix = np.stack([emb.vectors[sid] for sid in ids])

    # argmax takes the first maximum, i.e. the lowest sample id on ties
    pick = int(np.argmax(_distances(matrix, matrix.mean(axis=0), metric)))
    order = [ids[pick]]
    dist = _distances(matrix, matrix[pick], metric)
    dist[pick] = -1.0  # exclude selected points even among duplicates
    for _ in range(keep - 1):
        pick = int(np.argmax(dist))
        order.append(ids[pick])
        dist = np.minimum(dist, _distances(matrix, matrix[pick], metric))
        dist[pick] = -1.0
    return order


def average_scores(tables: Sequence[ScoreTable]) -> ScoreTable:
    """Elementwise mean of score tables sharing ids and method tag."""
    if not tables:
        raise ValueError("no tables to average")
    ids = set(tables[0].entries)
    method = tables[0].method
    for table in tables[1:]:
        if set(table.entries) != ids:
            raise KeyMismatch("tables cover different sample ids")
        if table.method != method:
            raise KeyMismatch(f"method tags differ: {table.method!r} vs {method!r}")
    entries = {
        sid: float(np.mean([table.entries[sid] for table in tables])) for sid in ids
    }
    return ScoreTable(entries, method)
