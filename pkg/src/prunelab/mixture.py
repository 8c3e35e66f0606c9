"""Two-Gaussian decision theory: class risks, optimal thresholds, 1-D pruning.

The model is a mixture of two univariate Gaussians, class 0 at N(mu0, sigma0^2)
and class 1 at N(mu1, sigma1^2) with priors (phi0, phi1), classified by linear
rules predict-1-when-x > t.  Class risks under 0-1 loss are

    r0(t) = Phi((mu0 - t) / sigma0),    r1(t) = Phi((t - mu1) / sigma1),

and everything else here is built from those two curves: the average-risk
minimizer ``optimal_threshold`` (larger root of a quadratic in t), the
worst-class minimizer ``worst_class_threshold`` (the risk-equalizing point),
the priors that make both coincide, empirical 0-1 fitting, margin-based
pruning around class means, and per-class retention densities that steer the
empirical minimizer toward the worst-class optimum.

Conventions: mu0 < mu1 and sigma0 <= sigma1 (class 0 is the "easier",
lower-variance class); thresholds are floats and may be +-inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    EmptyClass,
    ExistenceViolated,
    NotGlobalMinimum,
    SeparationViolated,
    ZeroMeanVector,
)
from .normal import make_generator, normal_cdf, normal_quantile, uniform_open

__all__ = [
    "GaussianMixture",
    "RiskPair",
    "SampleSet1D",
    "class_risks",
    "average_risk",
    "optimal_threshold",
    "worst_class_threshold",
    "worst_class_optimal_priors",
    "sample_mixture",
    "fit_erm",
    "empirical_risk",
    "ssp_prune_1d",
    "ssp_removed_mass",
    "solve_ssp_margin",
    "optimal_class_densities",
    "reduce_isotropic",
]

_PHI_SUM_TOL = 1e-12


@dataclass(frozen=True)
class GaussianMixture:
    """Two-component univariate Gaussian mixture with class priors."""

    mu0: float
    mu1: float
    sigma0: float
    sigma1: float
    phi0: float
    phi1: float

    def __post_init__(self):
        if not (self.sigma0 > 0 and self.sigma1 > 0):
            raise ValueError("sigmas must be positive")
        if not self.mu0 < self.mu1:
            raise ValueError("requires mu0 < mu1")
        if self.sigma0 > self.sigma1:
            raise ValueError("requires sigma0 <= sigma1")
        if not (0.0 < self.phi0 < 1.0 and 0.0 < self.phi1 < 1.0):
            raise ValueError("priors must lie in (0, 1)")
        if abs(self.phi0 + self.phi1 - 1.0) > _PHI_SUM_TOL:
            raise ValueError("priors must sum to 1 within 1e-12")

    def with_priors(self, phi0: float) -> "GaussianMixture":
        return GaussianMixture(self.mu0, self.mu1, self.sigma0, self.sigma1, phi0, 1.0 - phi0)


class RiskPair(NamedTuple):
    r0: float
    r1: float


@dataclass(frozen=True)
class SampleSet1D:
    """Labeled 1-D sample set; ys are 0/1 class labels."""

    xs: np.ndarray
    ys: np.ndarray
    seed: int

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=np.int64)
        if xs.shape != ys.shape or xs.ndim != 1:
            raise ValueError("xs and ys must be 1-D of equal length")
        if not np.all((ys == 0) | (ys == 1)):
            raise ValueError("ys must be 0/1")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def class_counts(self) -> tuple[int, int]:
        n1 = int(self.ys.sum())
        return len(self.ys) - n1, n1


def class_risks(m: GaussianMixture, t: float) -> RiskPair:
    """Per-class 0-1 risks of the rule predict-1-when-x > t."""
    if t == -math.inf:
        return RiskPair(1.0, 0.0)
    if t == math.inf:
        return RiskPair(0.0, 1.0)
    r0 = normal_cdf((m.mu0 - t) / m.sigma0)
    r1 = normal_cdf((t - m.mu1) / m.sigma1)
    return RiskPair(r0, r1)


def average_risk(m: GaussianMixture, t: float) -> float:
    """Prior-weighted average of the two class risks."""
    r0, r1 = class_risks(m, t)
    return m.phi0 * r0 + m.phi1 * r1


def optimal_threshold(m: GaussianMixture) -> float:
    """Average-risk minimizer over linear rules.

    With sigma0 < sigma1 this is the larger root t+ of the stationarity
    quadratic; it exists only when the discriminant

        (mu0 - mu1)^2 + 2 (sigma1^2 - sigma0^2) log(phi0 sigma1 / (phi1 sigma0))

    is nonnegative (raises ExistenceViolated otherwise), and it is the global
    minimizer only when phi0/phi1 > r1(t+)/r0-mirror ratio, i.e. the risk at
    t+ does not exceed the risk of always predicting 1 (raises
    NotGlobalMinimum carrying t+ otherwise).  With sigma0 == sigma1 the
    stationarity equation is linear, has exactly one root, and that root is
    always the global minimizer.
    """
    if m.sigma0 == m.sigma1:
        s2 = m.sigma0 * m.sigma0
        return (2.0 * s2 * math.log(m.phi0 / m.phi1) + m.mu1**2 - m.mu0**2) / (
            2.0 * (m.mu1 - m.mu0)
        )

    v0 = m.sigma0 * m.sigma0
    v1 = m.sigma1 * m.sigma1
    log_term = math.log(m.phi0 * m.sigma1 / (m.phi1 * m.sigma0))
    disc = (m.mu0 - m.mu1) ** 2 + 2.0 * (v1 - v0) * log_term
    if disc < 0.0:
        raise ExistenceViolated(
            "scaled class densities do not intersect "
            f"(discriminant {disc:.6g} < 0); existence condition fails",
            discriminant=disc,
        )
    t_plus = (m.mu0 * v1 - m.mu1 * v0 + m.sigma0 * m.sigma1 * math.sqrt(disc)) / (v1 - v0)

    # Global-minimum condition: risk at t+ must beat R(-inf) = phi0, which
    # rearranges to phi0 * Phi((t+ - mu0)/sigma0) > phi1 * Phi((t+ - mu1)/sigma1).
    lhs = m.phi0 * normal_cdf((t_plus - m.mu0) / m.sigma0)
    rhs = m.phi1 * normal_cdf((t_plus - m.mu1) / m.sigma1)
    if not lhs > rhs:
        raise NotGlobalMinimum(
            f"stationary point {t_plus:.6g} is not the global risk minimizer "
            "(always-predict-1 does at least as well)",
            stationary_point=t_plus,
        )
    return t_plus


def worst_class_threshold(m: GaussianMixture) -> float:
    """Minimizer of max(r0, r1); equalizes the two class risks."""
    return (m.mu0 * m.sigma1 + m.mu1 * m.sigma0) / (m.sigma0 + m.sigma1)


def worst_class_optimal_priors(m: GaussianMixture) -> tuple[float, float]:
    """Priors under which the average-risk minimizer is the worst-class one.

    Returns (sigma0, sigma1) / (sigma0 + sigma1).  Valid only when the means
    are separated enough:

        mu1 - mu0 > (sigma0 + sigma1) * Phi^-1(sigma1 / (sigma0 + sigma1));

    raises SeparationViolated carrying the (positive) slack otherwise.
    """
    ssum = m.sigma0 + m.sigma1
    required = ssum * normal_quantile(m.sigma1 / ssum)
    gap = m.mu1 - m.mu0
    if not gap > required:
        raise SeparationViolated(
            f"mean separation {gap:.6g} must exceed {required:.6g}",
            slack=required - gap,
        )
    return (m.sigma0 / ssum, m.sigma1 / ssum)


def sample_mixture(m: GaussianMixture, n0: int, n1: int, seed: int) -> SampleSet1D:
    """n0 class-0 and n1 class-1 draws, deterministic in the seed."""
    if n0 < 1 or n1 < 1:
        raise ValueError("need at least one sample per class")
    gen = make_generator(seed)
    x0 = m.mu0 + m.sigma0 * normal_quantile(uniform_open(gen, n0))
    x1 = m.mu1 + m.sigma1 * normal_quantile(uniform_open(gen, n1))
    xs = np.concatenate([x0, x1])
    ys = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    return SampleSet1D(xs, ys, seed)


def empirical_risk(s: SampleSet1D, t: float) -> float:
    """Fraction of samples misclassified by predict-1-when-x > t."""
    pred = s.xs > t
    return float(np.mean(pred != (s.ys == 1)))


def fit_erm(s: SampleSet1D) -> float:
    """Empirical 0-1 risk minimizer over linear rules.

    The empirical risk is piecewise constant, so it suffices to scan the
    midpoints of consecutive sorted samples plus the two infinite rules.
    Ties are broken toward the smallest threshold.
    """
    order = np.argsort(s.xs, kind="stable")
    xs = s.xs[order]
    ys = s.ys[order]
    n = len(xs)
    ones_prefix = np.concatenate([[0], np.cumsum(ys)])
    total_ones = int(ones_prefix[-1])
    total_zeros = n - total_ones

    # errors(t) = #{y=1, x <= t} + #{y=0, x > t}; with k = #{x <= t} this is
    # ones_prefix[k] + (total_zeros - (k - ones_prefix[k])).
    best_t = -math.inf
    best_err = total_zeros  # t = -inf predicts 1 everywhere
    for i in range(n - 1):
        t = 0.5 * (xs[i] + xs[i + 1])
        k = int(np.searchsorted(xs, t, side="right"))
        err = int(ones_prefix[k]) + total_zeros - (k - int(ones_prefix[k]))
        if err < best_err:
            best_err, best_t = err, t
    if total_ones < best_err:  # t = +inf predicts 0 everywhere
        best_err, best_t = total_ones, math.inf
    return best_t


def ssp_prune_1d(
    s: SampleSet1D,
    m: GaussianMixture,
    margin: float,
    mode: str = "remove_within",
    prototypes: str = "nearest",
) -> SampleSet1D:
    """Margin pruning around the class-mean prototypes.

    Sample difficulty is the distance to a prototype: with
    ``prototypes="nearest"`` (the label-agnostic clustering view) that is the
    closer of the two class means; with ``prototypes="own_class"`` it is the
    sample's own class mean, and each class then loses exactly the mass
    2*Phi(margin/sigma) - 1.  remove_within drops every sample within
    ``margin`` of its prototype (the easiest, most prototypical points);
    keep_within does the opposite.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    if mode not in ("remove_within", "keep_within"):
        raise ValueError(f"unknown mode {mode!r}")
    if prototypes == "nearest":
        dist = np.minimum(np.abs(s.xs - m.mu0), np.abs(s.xs - m.mu1))
    elif prototypes == "own_class":
        dist = np.abs(s.xs - np.where(s.ys == 0, m.mu0, m.mu1))
    else:
        raise ValueError(f"unknown prototype rule {prototypes!r}")
    within = dist <= margin
    keep = within if mode == "keep_within" else ~within
    for cls in (0, 1):
        if not np.any(keep & (s.ys == cls)):
            raise EmptyClass(f"margin pruning removed every class-{cls} sample")
    return SampleSet1D(s.xs[keep], s.ys[keep], s.seed)


def ssp_removed_mass(
    m: GaussianMixture, margin: float, prototypes: str = "nearest"
) -> tuple[float, float]:
    """Expected per-class removed probability mass under remove_within."""

    def interval_mass(mu: float, sigma: float, lo: float, hi: float) -> float:
        return normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma)

    if prototypes == "own_class":
        return (
            2.0 * normal_cdf(margin / m.sigma0) - 1.0,
            2.0 * normal_cdf(margin / m.sigma1) - 1.0,
        )
    if prototypes != "nearest":
        raise ValueError(f"unknown prototype rule {prototypes!r}")
    balls = [(m.mu0 - margin, m.mu0 + margin), (m.mu1 - margin, m.mu1 + margin)]
    if balls[0][1] >= balls[1][0]:  # overlapping balls merge
        balls = [(balls[0][0], balls[1][1])]
    out = []
    for mu, sigma in ((m.mu0, m.sigma0), (m.mu1, m.sigma1)):
        out.append(sum(interval_mass(mu, sigma, lo, hi) for lo, hi in balls))
    return (out[0], out[1])


def solve_ssp_margin(m: GaussianMixture, removal: float, prototypes: str = "nearest") -> float:
    """Margin whose expected removed mass equals ``removal`` (in (0, 1)).

    The prior-weighted removed mass is strictly increasing in the margin, so
    bisection inverts it.
    """
    if not 0.0 < removal < 1.0:
        raise ValueError("removal fraction must lie in (0, 1)")

    def removed(margin: float) -> float:
        c0, c1 = ssp_removed_mass(m, margin, prototypes)
        return m.phi0 * c0 + m.phi1 * c1

    lo, hi = 0.0, m.sigma1
    while removed(hi) < removal:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if removed(mid) < removal:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimal_class_densities(
    m: GaussianMixture,
    n0: int,
    n1: int,
    d: float,
    rule: str = "variance_based",
) -> tuple[float, float]:
    """Per-class retention densities (d0, d1) for total density d.

    variance_based solves d0*n0*sigma1 = d1*n1*sigma0 (retained class sizes
    proportional to the class spreads); error_based replaces the spreads with
    the class risks at the average-risk optimum for priors n0:n1, solving
    d0*r1 = d1*r0.  Both conserve d0*n0 + d1*n1 = d*(n0 + n1); a density
    exceeding 1 saturates there and the excess goes to the other class.
    """
    if not 0.0 < d <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    if rule == "variance_based":
        ratio = (n1 * m.sigma0) / (n0 * m.sigma1)  # d0 / d1
    elif rule == "error_based":
        mix = m.with_priors(n0 / (n0 + n1))
        r0, r1 = class_risks(mix, optimal_threshold(mix))
        ratio = r0 / r1
    else:
        raise ValueError(f"unknown rule {rule!r}")

    total = d * (n0 + n1)
    d1 = total / (ratio * n0 + n1)
    d0 = ratio * d1
    if d1 > 1.0:
        d1 = 1.0
        d0 = (total - n1) / n0
    elif d0 > 1.0:
        d0 = 1.0
        d1 = (total - n0) / n1
    return (d0, d1)


def reduce_isotropic(
    mu: Sequence[float], sigma0: float, sigma1: float, phi0: float
) -> GaussianMixture:
    """Collapse two isotropic multivariate Gaussians at -mu/+mu to 1-D.

    The best unit projection is mu/||mu||, under which the class-conditional
    laws become N(-||mu||, sigma0^2) and N(+||mu||, sigma1^2).
    """
    vec = np.asarray(mu, dtype=float)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ZeroMeanVector("mean vector must be nonzero")
    return GaussianMixture(-norm, norm, sigma0, sigma1, phi0, 1.0 - phi0)
