"""Classification-bias metrics over prediction files.

From per-class recalls r_k the report derives the three bias measures:
worst-class accuracy min_k r_k, the max-min recall gap, and the population
standard deviation of recalls.  Average accuracy defaults to the overall
fraction correct; an optional group weighting recomputes it as a weighted sum
of per-group accuracies (weights normalized to sum 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

from .errors import DegenerateVariance, EmptyClass, KeyMismatch, UnknownGroupWeight

__all__ = [
    "PredictionRow",
    "PredictionSet",
    "EvalReport",
    "evaluate",
    "correlation_density_accuracy",
]


@dataclass(frozen=True)
class PredictionRow:
    sample_id: int
    true_class: int
    predicted_class: int
    group: Optional[int] = None


@dataclass(frozen=True)
class PredictionSet:
    rows: tuple[PredictionRow, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        if not rows:
            raise ValueError("no prediction rows")
        ids = [r.sample_id for r in rows]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate sample ids")
        for r in rows:
            if r.true_class < 0:
                raise ValueError(f"sample {r.sample_id}: negative true class")
        object.__setattr__(self, "rows", rows)


@dataclass(frozen=True)
class EvalReport:
    recalls: dict[int, float]
    worst_class: float
    max_min_gap: float
    recall_std: float
    average: float
    weighted_average: Optional[float]

    def as_dict(self) -> dict:
        return {
            "recalls": {str(k): v for k, v in self.recalls.items()},
            "worst_class": self.worst_class,
            "max_min_gap": self.max_min_gap,
            "recall_std": self.recall_std,
            "average": self.average,
            "weighted_average": self.weighted_average,
        }


def evaluate(
    preds: PredictionSet, weights: Optional[Mapping[int, float]] = None
) -> EvalReport:
    """Per-class recalls plus derived bias metrics.

    Classes are 0..K-1 with K = 1 + max true class; every index in that
    range must occur as a true class.  When ``weights`` is given, every row
    needs a group id with a weight, and the weighted average is the
    weight-normalized sum of per-group accuracies.
    """
    n_classes = max(r.true_class for r in preds.rows) + 1
    totals = [0] * n_classes
    hits = [0] * n_classes
    for r in preds.rows:
        totals[r.true_class] += 1
        hits[r.true_class] += int(r.predicted_class == r.true_class)
    missing = [k for k in range(n_classes) if totals[k] == 0]
    if missing:
        raise EmptyClass(f"classes {missing} have no prediction rows")

    recalls = {k: hits[k] / totals[k] for k in range(n_classes)}
    values = list(recalls.values())
    mean_recall = sum(values) / len(values)
    std = math.sqrt(sum((v - mean_recall) ** 2 for v in values) / len(values))
    average = sum(hits) / len(preds.rows)

    weighted = None
    if weights is not None:
        group_totals: dict[int, int] = {}
        group_hits: dict[int, int] = {}
        for r in preds.rows:
            if r.group is None:
                raise UnknownGroupWeight(f"sample {r.sample_id} has no group id")
            if r.group not in weights:
                raise UnknownGroupWeight(f"no weight for group {r.group}")
            group_totals[r.group] = group_totals.get(r.group, 0) + 1
            group_hits[r.group] = group_hits.get(r.group, 0) + int(
                r.predicted_class == r.true_class
            )
        mass = sum(weights[g] for g in group_totals)
        if mass <= 0:
            raise UnknownGroupWeight("group weights sum to zero over present groups")
        weighted = sum(
            weights[g] / mass * (group_hits[g] / group_totals[g]) for g in group_totals
        )

    return EvalReport(
        recalls=recalls,
        worst_class=min(values),
        max_min_gap=max(values) - min(values),
        recall_std=std,
        average=average,
        weighted_average=weighted,
    )


def correlation_density_accuracy(
    densities: Mapping[int, float], base_recalls: Mapping[int, float]
) -> float:
    """Pearson correlation of class retention density vs. baseline recall.

    Strongly negative values are the signature of error-proportional quotas
    (hard classes kept, easy classes pruned).
    """
    if set(densities) != set(base_recalls):
        raise KeyMismatch("densities and recalls cover different classes")
    keys = sorted(densities)
    if len(keys) < 3:
        raise ValueError("need at least 3 classes")
    xs = [densities[k] for k in keys]
    ys = [base_recalls[k] for k in keys]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = sum(v * v for v in dx)
    syy = sum(v * v for v in dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateVariance("an input has zero variance across classes")
    return sum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
