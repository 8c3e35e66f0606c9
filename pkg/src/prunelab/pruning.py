"""Deterministic retention plans over dataset manifests.

Six protocols: global/per-class random subsampling, global/per-class
top-score retention, quota extraction from an existing plan, and exponential
imbalance injection.  Every plan is a pure function of (inputs, seed); score
ties at the retention cut always resolve toward the lower sample id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DegenerateClass, MissingScores, NotBalanced, QuotaClassMissing
from .normal import make_generator
from .quotas import QuotaAllocation
from .scores import ScoreTable

__all__ = [
    "DatasetManifest",
    "PrunePlan",
    "prune_random_global",
    "prune_random_quota",
    "prune_score_global",
    "prune_score_quota",
    "extract_quotas",
    "inject_imbalance",
]


@dataclass(frozen=True)
class DatasetManifest:
    """Inventory of (sample_id, class_id) pairs with unique sample ids."""

    samples: tuple[tuple[int, int], ...]

    def __post_init__(self):
        samples = tuple((int(s), int(c)) for s, c in self.samples)
        if not samples:
            raise ValueError("manifest is empty")
        ids = [s for s, _ in samples]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate sample ids")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def class_sizes(self) -> dict[int, int]:
        sizes: dict[int, int] = {}
        for _, cid in self.samples:
            sizes[cid] = sizes.get(cid, 0) + 1
        return dict(sorted(sizes.items()))

    def by_class(self) -> dict[int, list[int]]:
        """Sample ids per class, each list sorted ascending."""
        groups: dict[int, list[int]] = {}
        for sid, cid in self.samples:
            groups.setdefault(cid, []).append(sid)
        return {cid: sorted(groups[cid]) for cid in sorted(groups)}


@dataclass(frozen=True)
class PrunePlan:
    """The retained sample ids a pruning protocol emits."""

    retained: frozenset[int]
    method: str
    density: float
    seed: Optional[int]

    def __post_init__(self):
        object.__setattr__(self, "retained", frozenset(int(s) for s in self.retained))


def _round_count(d: float, n: int) -> int:
    return round(d * n)


def prune_random_global(man: DatasetManifest, d: float, seed: int) -> PrunePlan:
    """Uniform subset of round(d*N) samples via one seeded shuffle."""
    if not 0.0 < d <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    ids = sorted(s for s, _ in man.samples)
    gen = make_generator(seed)
    perm = gen.permutation(len(ids))
    take = _round_count(d, len(ids))
    retained = frozenset(ids[i] for i in perm[:take])
    return PrunePlan(retained, "random", d, seed)


def _check_quota_coverage(man: DatasetManifest, quotas: QuotaAllocation) -> None:
    missing = set(man.class_sizes) - set(quotas.target_counts)
    if missing:
        raise QuotaClassMissing(f"quotas missing classes {sorted(missing)}")
    for cid, size in man.class_sizes.items():
        if quotas.target_counts[cid] > size:
            raise ValueError(f"class {cid}: target exceeds class size")


def prune_random_quota(
    man: DatasetManifest, quotas: QuotaAllocation, seed: int
) -> PrunePlan:
    """Uniform subsample of each class to its quota count."""
    _check_quota_coverage(man, quotas)
    gen = make_generator(seed)
    retained: set[int] = set()
    for cid, ids in man.by_class().items():
        perm = gen.permutation(len(ids))
        retained.update(ids[i] for i in perm[: quotas.target_counts[cid]])
    return PrunePlan(frozenset(retained), "random_quota", quotas.requested_density, seed)


def _check_score_coverage(man: DatasetManifest, scores: ScoreTable) -> None:
    missing = {s for s, _ in man.samples} - set(scores.entries)
    if missing:
        raise MissingScores(f"{len(missing)} samples have no score")


def _top_by_score(ids: Sequence[int], scores: ScoreTable, take: int) -> list[int]:
    ranked = sorted(ids, key=lambda sid: (-scores.entries[sid], sid))
    return ranked[:take]


def prune_score_global(man: DatasetManifest, scores: ScoreTable, d: float) -> PrunePlan:
    """Retain the round(d*N) highest-scored samples."""
    if not 0.0 < d <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    _check_score_coverage(man, scores)
    ids = [s for s, _ in man.samples]
    retained = frozenset(_top_by_score(ids, scores, _round_count(d, len(ids))))
    return PrunePlan(retained, f"score:{scores.method}", d, None)


def prune_score_quota(
    man: DatasetManifest, scores: ScoreTable, quotas: QuotaAllocation
) -> PrunePlan:
    """Retain each class's top-scored samples up to its quota count."""
    _check_score_coverage(man, scores)
    _check_quota_coverage(man, quotas)
    retained: set[int] = set()
    for cid, ids in man.by_class().items():
        retained.update(_top_by_score(ids, scores, quotas.target_counts[cid]))
    return PrunePlan(
        frozenset(retained), f"score_quota:{scores.method}", quotas.requested_density, None
    )


def extract_quotas(plan: PrunePlan, man: DatasetManifest) -> QuotaAllocation:
    """Read the per-class densities a plan realized on a manifest."""
    unknown = plan.retained - {s for s, _ in man.samples}
    if unknown:
        raise ValueError(f"plan retains ids not in the manifest: {sorted(unknown)[:5]}")
    densities = {}
    counts = {}
    for cid, ids in man.by_class().items():
        kept = sum(1 for sid in ids if sid in plan.retained)
        counts[cid] = kept
        densities[cid] = kept / len(ids)
    return QuotaAllocation(
        densities=densities,
        target_counts=counts,
        requested_density=len(plan.retained) / len(man),
    )


def inject_imbalance(man: DatasetManifest, factor: float, seed: int) -> DatasetManifest:
    """Exponentially subsample a balanced manifest to imbalance ``factor``.

    Class k (in ascending class-id order, k = 1..K) keeps round(mu^(k-1)*N_k)
    samples with mu = factor^(-1/(K-1)), so the largest-to-smallest size
    ratio equals ``factor`` up to rounding.
    """
    if factor < 1.0:
        raise ValueError("imbalance factor must be >= 1")
    groups = man.by_class()
    if len(groups) < 2:
        raise ValueError("need at least two classes")
    sizes = {cid: len(ids) for cid, ids in groups.items()}
    if len(set(sizes.values())) != 1:
        raise NotBalanced(f"class sizes differ: {sizes}")
    mu = factor ** (-1.0 / (len(groups) - 1))
    gen = make_generator(seed)
    kept: list[tuple[int, int]] = []
    for rank, (cid, ids) in enumerate(groups.items()):
        target = round(mu**rank * len(ids))
        if target == 0:
            raise DegenerateClass(f"class {cid} would round to zero samples")
        perm = gen.permutation(len(ids))
        kept.extend((ids[i], cid) for i in sorted(perm[:target]))
    kept.sort()
    return DatasetManifest(tuple(kept))
