"""Semantic exception hierarchy for the toolkit.

Every error carries enough state for callers to diagnose parameter sweeps
without string parsing; the CLI serializes them to machine-readable JSON.
"""

from __future__ import annotations


class PruneLabError(Exception):
    """Base class for all toolkit errors."""

    code = "error"

    def payload(self) -> dict:
        return {"error": self.code, "message": str(self)}


class ExistenceViolated(PruneLabError):
    """The scaled class densities do not intersect (negative discriminant)."""

    code = "existence_violated"

    def __init__(self, message: str, discriminant: float):
        super().__init__(message)
        self.discriminant = discriminant


class NotGlobalMinimum(PruneLabError):
    """The stationary point exists but is not the global risk minimizer.

    Carries the stationary point so parameter sweeps can still inspect it.
    """

    code = "not_global_minimum"

    def __init__(self, message: str, stationary_point: float):
        super().__init__(message)
        self.stationary_point = stationary_point


class SeparationViolated(PruneLabError):
    """Class means are too close for the risk-equalizing priors to be optimal."""

    code = "separation_violated"

    def __init__(self, message: str, slack: float):
        super().__init__(message)
        self.slack = slack


class ZeroMeanVector(PruneLabError):
    code = "zero_mean_vector"


class EmptyClass(PruneLabError):
    """An operation left (or found) a class with no samples."""

    code = "empty_class"


class InfeasibleDensity(PruneLabError):
    """The requested sample budget cannot be absorbed by the eligible classes."""

    code = "infeasible_density"


class AllPerfectRecall(PruneLabError):
    """Every class has recall 1, so no class can absorb pruning mass."""

    code = "all_perfect_recall"


class DimensionMismatch(PruneLabError):
    code = "dimension_mismatch"


class NotAProbability(PruneLabError):
    code = "not_a_probability"


class WindowTooLarge(PruneLabError):
    code = "window_too_large"


class KeyMismatch(PruneLabError):
    """Sample-id sets (or method tags) disagree between tables."""

    code = "key_mismatch"


class EmptyEmbeddingSet(PruneLabError):
    code = "empty_embedding_set"


class QuotaClassMissing(PruneLabError):
    code = "quota_class_missing"


class MissingScores(PruneLabError):
    code = "missing_scores"


class NotBalanced(PruneLabError):
    code = "not_balanced"


class DegenerateClass(PruneLabError):
    """Imbalance injection rounded a class down to zero samples."""

    code = "degenerate_class"


class UnknownGroupWeight(PruneLabError):
    code = "unknown_group_weight"


class DegenerateVariance(PruneLabError):
    code = "degenerate_variance"


class FormatError(PruneLabError):
    """An input file does not conform to its wire format."""

    code = "format_error"
