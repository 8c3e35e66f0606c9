"""Replicated pruning experiments on the two-Gaussian model.

Protocol: draw ``replicates`` datasets of ``points`` samples (class split by
the priors), prune each to the target density with the chosen arm, fit the
empirical 0-1 threshold, and report the mean fitted threshold alongside the
analytic reference points.

Arms:
    variance_quota  per-class random subsampling, retained sizes proportional
                    to the class standard deviations
    error_quota     per-class random subsampling, retained sizes proportional
                    to the class risks at the average-risk optimum
    ssp             margin pruning around class means (easiest samples out)
    ssp_quota       random subsampling to the per-class sizes ssp would keep
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mixture import (
    GaussianMixture,
    SampleSet1D,
    average_risk,
    class_risks,
    fit_erm,
    optimal_class_densities,
    optimal_threshold,
    sample_mixture,
    solve_ssp_margin,
    ssp_prune_1d,
    worst_class_threshold,
)
from .quotas import largest_remainder

__all__ = [
    "ARMS",
    "ExperimentRow",
    "ExperimentResult",
    "analytic_reference_rows",
    "run_threshold_experiment",
]

ARMS = ("variance_quota", "error_quota", "ssp", "ssp_quota")

SUMMARY_REPLICATE = -1  # replicate index used by analytic / mean rows


@dataclass(frozen=True)
class ExperimentRow:
    experiment: str
    replicate: int
    threshold: float
    r0: float
    r1: float
    avg_risk: float


@dataclass(frozen=True)
class ExperimentResult:
    arm: str
    rows: tuple[ExperimentRow, ...]
    mean_threshold: float
    margin: float | None = None


def _row(name: str, replicate: int, m: GaussianMixture, t: float) -> ExperimentRow:
    r0, r1 = class_risks(m, t)
    return ExperimentRow(name, replicate, t, r0, r1, average_risk(m, t))


def analytic_reference_rows(m: GaussianMixture) -> list[ExperimentRow]:
    """Reference rows at the average-risk and worst-class-risk optima."""
    return [
        _row("analytic_avg_optimal", SUMMARY_REPLICATE, m, optimal_threshold(m)),
        _row("analytic_worst_class", SUMMARY_REPLICATE, m, worst_class_threshold(m)),
    ]


def _subsample_generator(seed: int, replicate: int) -> np.random.Generator:
    # Distinct stream from the dataset draw at the same replicate seed.
    ss = np.random.SeedSequence(entropy=seed + replicate, spawn_key=(1,))
    return np.random.Generator(np.random.PCG64(ss))


def _per_class_subsample(
    s: SampleSet1D, counts: dict[int, int], gen: np.random.Generator
) -> SampleSet1D:
    keep_idx: list[int] = []
    for cls in (0, 1):
        idx = np.flatnonzero(s.ys == cls)
        perm = gen.permutation(len(idx))
        keep_idx.extend(idx[perm[: counts[cls]]])
    keep_idx.sort()
    return SampleSet1D(s.xs[keep_idx], s.ys[keep_idx], s.seed)


def run_threshold_experiment(
    m: GaussianMixture,
    arm: str,
    density: float,
    replicates: int,
    points: int,
    seed: int,
    margin: float | None = None,
) -> ExperimentResult:
    """Run one arm and return per-replicate rows plus reference rows.

    Replicate i draws its dataset with seed ``seed + i``.  For the quota
    arms, per-class retained counts come from the arm's density rule
    apportioned against round(density * points); for ssp the margin defaults
    to the value whose expected removed mass is 1 - density.
    """
    if arm not in ARMS:
        raise ValueError(f"unknown arm {arm!r}")
    if replicates < 1 or points < 2:
        raise ValueError("need at least one replicate and two points")
    n0 = round(m.phi0 * points)
    n1 = points - n0
    if n0 < 1 or n1 < 1:
        raise ValueError("priors leave a class with no samples")

    counts: dict[int, int] | None = None
    if arm in ("variance_quota", "error_quota"):
        rule = "variance_based" if arm == "variance_quota" else "error_based"
        d0, d1 = optimal_class_densities(m, n0, n1, density, rule)
        counts = largest_remainder(
            {0: d0 * n0, 1: d1 * n1}, round(density * points), {0: n0, 1: n1}
        )
    elif margin is None:
        margin = solve_ssp_margin(m, 1.0 - density)

    rows: list[ExperimentRow] = []
    thresholds: list[float] = []
    for i in range(replicates):
        dataset = sample_mixture(m, n0, n1, seed + i)
        if counts is not None:
            pruned = _per_class_subsample(dataset, counts, _subsample_generator(seed, i))
        elif arm == "ssp":
            pruned = ssp_prune_1d(dataset, m, margin)
        else:  # ssp_quota: random membership at ssp's per-class sizes
            shaped = ssp_prune_1d(dataset, m, margin)
            kept0, kept1 = shaped.class_counts
            pruned = _per_class_subsample(
                dataset, {0: kept0, 1: kept1}, _subsample_generator(seed, i)
            )
        t_i = fit_erm(pruned)
        thresholds.append(t_i)
        rows.append(_row(arm, i, m, t_i))

    mean_t = float(np.mean(thresholds))
    rows.append(_row(f"{arm}_mean", SUMMARY_REPLICATE, m, mean_t))
    rows.extend(analytic_reference_rows(m))
    return ExperimentResult(arm=arm, rows=tuple(rows), mean_threshold=mean_t, margin=margin)
