"""Error-proportional class quotas (DRoP) and CDB-W class weights.

Given per-class sizes N_k, hold-out recalls r_k, and a target dataset density
d, the allocator assigns each class a retention density d_k proportional to
its error rate 1 - r_k, normalized so the total retained count is d*N.  When
a class would need d_k > 1 it saturates at 1 and the excess budget is
redistributed over the still-unsaturated classes in the same proportions,
repeating until the budget is exhausted.  Fractional densities are converted
to integer per-class counts by largest-remainder apportionment against the
exact total round(d*N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import AllPerfectRecall, InfeasibleDensity

__all__ = [
    "ClassStats",
    "QuotaAllocation",
    "CdbwWeights",
    "drop_quotas",
    "cdbw_weights",
    "largest_remainder",
]

_EPS = 1e-9


@dataclass(frozen=True)
class ClassStats:
    """Original size and hold-out recall of one class."""

    class_id: int
    size: int
    recall: float

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"class {self.class_id}: size must be >= 1")
        if not 0.0 <= self.recall <= 1.0:
            raise ValueError(f"class {self.class_id}: recall must lie in [0, 1]")


@dataclass(frozen=True)
class QuotaAllocation:
    """Per-class retention densities and integer target counts."""

    densities: dict[int, float]
    target_counts: dict[int, int]
    requested_density: float
    iterations: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CdbwWeights:
    """Per-class loss weights w_k = 1 - r_k."""

    weights: dict[int, float]


def largest_remainder(
    fractional: Mapping[int, float],
    total: int,
    capacities: Mapping[int, int],
) -> dict[int, int]:
    """Apportion ``total`` units to keys with given fractional targets.

    Each key gets floor(target); remaining units go to the largest fractional
    remainders, ties broken by lower key, never exceeding a key's capacity.
    """
    counts = {}
    remainders = []
    for key in sorted(fractional):
        value = min(fractional[key], float(capacities[key]))
        base = math.floor(value + _EPS)  # absorb float dust below integers
        base = min(base, capacities[key])
        counts[key] = base
        remainders.append((-(value - base), key))
    deficit = total - sum(counts.values())
    remainders.sort()
    while deficit > 0:
        progressed = False
        for _, key in remainders:
            if deficit == 0:
                break
            if counts[key] < capacities[key]:
                counts[key] += 1
                deficit -= 1
                progressed = True
        if not progressed:
            raise InfeasibleDensity(f"cannot place {deficit} remaining samples")
    while deficit < 0:  # float dust pushed a floor too high; trim smallest remainders
        for _, key in reversed(remainders):
            if deficit == 0:
                break
            if counts[key] > 0:
                counts[key] -= 1
                deficit += 1
    return counts


def _waterfill(
    sizes: Mapping[int, int], recalls: Mapping[int, float], budget: float
) -> tuple[dict[int, float], int]:
    """Distribute ``budget`` samples as densities proportional to 1 - r_k.

    Runs the saturating while-loop: each pass allocates the remaining excess
    over unsaturated classes proportionally to N_k*(1 - r_k), clamps any
    class that exceeds density 1, and returns its overshoot to the pool.
    Returns (densities, pass count).
    """
    densities = {k: 0.0 for k in sizes}
    unsaturated = set(sizes)
    excess = float(budget)
    tol = 1e-12 * max(1.0, budget)
    iterations = 0
    while excess > tol:
        iterations += 1
        weight_mass = sum(sizes[k] * (1.0 - recalls[k]) for k in unsaturated)
        if weight_mass <= 0.0:
            raise InfeasibleDensity(
                f"{excess:.6g} samples of budget cannot be absorbed: remaining "
                "classes are saturated or have perfect recall"
            )
        z = weight_mass / excess
        for k in sorted(unsaturated):
            share = (1.0 - recalls[k]) / z
            densities[k] += share
            excess -= sizes[k] * share
            if densities[k] > 1.0:
                excess += sizes[k] * (densities[k] - 1.0)
                densities[k] = 1.0
                unsaturated.discard(k)
        if iterations > len(sizes) + 1:
            raise RuntimeError("quota loop failed to terminate")  # pragma: no cover
    return densities, iterations


def drop_quotas(
    stats: Sequence[ClassStats], d: float, min_per_class: int = 0
) -> QuotaAllocation:
    """Allocate per-class retention quotas for target dataset density d.

    ``min_per_class`` optionally floors every class's target count at
    min(floor, N_k); the default 0 reproduces the plain proportional rule,
    under which perfect-recall classes receive density 0.
    """
    if not stats:
        raise ValueError("stats must be nonempty")
    if not 0.0 < d <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    ids = [s.class_id for s in stats]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate class ids")
    sizes = {s.class_id: s.size for s in stats}
    recalls = {s.class_id: s.recall for s in stats}
    n_total = sum(sizes.values())
    if d * n_total < 1.0:
        raise ValueError("d*N must be at least 1")
    if all(r == 1.0 for r in recalls.values()):
        raise AllPerfectRecall("every class has recall 1; no class can absorb mass")

    total = round(d * n_total)
    floors = {k: min(min_per_class, sizes[k]) for k in sizes}
    perfect = {k for k in sizes if recalls[k] == 1.0}
    floor_total = sum(floors.values())
    capacity = sum(floors[k] if k in perfect else sizes[k] for k in sizes)
    if total < floor_total:
        raise InfeasibleDensity(
            f"target {total} is below the per-class floor total {floor_total}"
        )
    if total > capacity:
        raise InfeasibleDensity(
            f"target {total} exceeds the {capacity} samples the eligible classes can hold"
        )

    # Perfect-recall classes receive density 0 from the proportional rule, so
    # their floors are reserved off the top; with min_per_class == 0 this is
    # the plain algorithm on the full budget.
    reserved = sum(floors[k] for k in perfect)
    densities, iterations = _waterfill(sizes, recalls, d * n_total - reserved)
    fractional = {k: densities[k] * sizes[k] for k in sizes}
    counts = largest_remainder(fractional, total - reserved, sizes)

    # Raise floored classes to their floor and re-distribute the remaining
    # budget over the rest; at most K passes, never entered without floors.
    fixed = {k: floors[k] for k in perfect}
    pool = {k: sizes[k] for k in sizes if k not in perfect}
    while True:
        deficient = [k for k in pool if counts[k] < floors[k]]
        if not deficient:
            break
        for k in deficient:
            fixed[k] = floors[k]
            del pool[k]
        remaining = total - sum(fixed.values())
        counts = {}
        if pool:
            sub_densities, _ = _waterfill(pool, recalls, float(remaining))
            counts = largest_remainder(
                {k: sub_densities[k] * pool[k] for k in pool}, remaining, pool
            )
            densities.update(sub_densities)
        elif remaining != 0:
            raise InfeasibleDensity("floors consume more than the target total")
    counts.update(fixed)
    for k in fixed:
        densities[k] = fixed[k] / sizes[k]

    return QuotaAllocation(
        densities={k: densities[k] for k in sorted(densities)},
        target_counts={k: counts[k] for k in sorted(counts)},
        requested_density=d,
        iterations=iterations,
    )


def cdbw_weights(recalls: Mapping[int, float]) -> CdbwWeights:
    """Class weights w_k = 1 - r_k, recomputed from current recalls."""
    for k, r in recalls.items():
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"class {k}: recall must lie in [0, 1]")
    return CdbwWeights(weights={k: 1.0 - r for k, r in sorted(recalls.items())})
