"""prunelab: data-pruning toolkit.

Quota allocation from class recalls, per-sample utility scores, deterministic
retention plans, classification-bias metrics, and an analytic/Monte-Carlo lab
for linear decision rules on a two-Gaussian mixture.
"""

from . import errors
from .experiments import (
    ARMS,
    ExperimentResult,
    ExperimentRow,
    analytic_reference_rows,
    run_threshold_experiment,
)
from .metrics import (
    EvalReport,
    PredictionRow,
    PredictionSet,
    correlation_density_accuracy,
    evaluate,
)
from .mixture import (
    GaussianMixture,
    RiskPair,
    SampleSet1D,
    average_risk,
    class_risks,
    empirical_risk,
    fit_erm,
    optimal_class_densities,
    optimal_threshold,
    reduce_isotropic,
    sample_mixture,
    solve_ssp_margin,
    ssp_prune_1d,
    ssp_removed_mass,
    worst_class_optimal_priors,
    worst_class_threshold,
)
from .normal import make_generator, normal_cdf, normal_draws, normal_quantile
from .pruning import (
    DatasetManifest,
    PrunePlan,
    extract_quotas,
    inject_imbalance,
    prune_random_global,
    prune_random_quota,
    prune_score_global,
    prune_score_quota,
)
from .quotas import (
    CdbwWeights,
    ClassStats,
    QuotaAllocation,
    cdbw_weights,
    drop_quotas,
    largest_remainder,
)
from .scores import (
    EmbeddingSet,
    ScoreTable,
    TelemetryLog,
    TelemetryRecord,
    average_scores,
    dynunc_scores,
    el2n_scores,
    forgetting_scores,
    kcenter_select,
)

__version__ = "0.1.0"
