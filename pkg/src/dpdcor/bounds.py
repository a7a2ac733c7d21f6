"""Utility analysis of the private estimator: decomposition and tail bounds.

The gap between the private and plain projected estimators decomposes
into (a) the projected distance covariance between the injected noise
and Y, and (b) a residual cross term

    C * sum_k sum_i (sum_l |N_i - N_l|) (sum_l |v_k'(Y_i - Y_l)|),
    C = 4 c_p c_q / (K n (n-2) (n-3)).

Concentration of the row sums sum_l |N_i - N_l| (differences of iid
Gaussians, so folded-normal terms) gives a computable high-probability
bound C n^3 t1 t2 on the residual: each row sum exceeds n*t with
probability at most alpha_from_t(sigma, n, t) = min(1, 2^n
exp(-n^2 t^2 / (4 sigma^2 (n-1)))), and a union-style argument
(lemma1_bound) converts per-row tail levels into joint confidence
1 - n (alpha1 + alpha2 - alpha1 alpha2).

sigma1 plays the role of the per-row scale of the projected Y values;
callers can estimate it from data with empirical_projection_scale. The
bound is valid above the per-alpha thresholds t_threshold(sigma, n,
alpha); below them the formulas are still evaluable but not meaningful,
so error_bound enforces the thresholds unless explicitly relaxed.
"""

from __future__ import annotations

import math
import numbers
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DataError
from .estimators import (
    ProjectionSet,
    _absdiff,
    _udcov_from_distances,
    as_data_matrix,
    projection_constant,
    sample_unit_projections,
)


class VacuousBoundWarning(UserWarning):
    """Raised when a confidence level clamps to zero (the bound says nothing)."""


@dataclass(frozen=True)
class DecompositionReport:
    """Measured pieces of the private-vs-plain estimator gap.

    omega_noise_y is the projected distance covariance between the noise
    vector and Y; residual_bound_term the scaled cross term; total_gap
    the caller-measured difference between the private and plain
    estimates (0.0 when not supplied).
    """

    omega_noise_y: float
    residual_bound_term: float
    total_gap: float

    def __post_init__(self):
        for name in ("omega_noise_y", "residual_bound_term", "total_gap"):
            if not math.isfinite(getattr(self, name)):
                raise DataError(f"{name} is not finite")
        if self.residual_bound_term < 0.0:
            raise DataError("residual_bound_term must be >= 0")


@dataclass(frozen=True)
class BoundInputs:
    """Inputs of the concentration bound.

    sigma1 scales the projected-Y row sums, sigma2 the noise row sums;
    t1 and t2 are the respective tail levels, alpha the per-row tail
    probability target both thresholds are checked against. coefficient
    defaults to the univariate 4 / (k n (n-2) (n-3)).
    """

    n: int
    k: int
    sigma1: float
    sigma2: float
    alpha: float
    t1: float
    t2: float
    coefficient: float | None = None

    def __post_init__(self):
        if not (isinstance(self.n, numbers.Integral) and self.n >= 4):
            raise ConfigError(f"n must be an integer >= 4, got {self.n!r}")
        if not (isinstance(self.k, numbers.Integral) and self.k >= 1):
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        for name in ("sigma1", "sigma2"):
            v = getattr(self, name)
            if not (isinstance(v, numbers.Real) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v!r}")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        for name in ("t1", "t2"):
            v = getattr(self, name)
            if not (isinstance(v, numbers.Real) and math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be a finite non-negative number, got {v!r}")
        if self.coefficient is None:
            object.__setattr__(self, "coefficient", residual_coefficient(self.n, self.k))
        elif not (math.isfinite(self.coefficient) and self.coefficient > 0):
            raise ConfigError(f"coefficient must be positive, got {self.coefficient!r}")


class ErrorBound(NamedTuple):
    bound_value: float
    confidence: float


def residual_coefficient(n: int, k: int, p: int = 1, q: int = 1) -> float:
    """Coefficient 4 c_p c_q / (k n (n-2) (n-3)) of the residual cross term."""
    if not (isinstance(n, numbers.Integral) and n >= 4):
        raise ConfigError(f"n must be an integer >= 4, got {n!r}")
    if not (isinstance(k, numbers.Integral) and k >= 1):
        raise ConfigError(f"k must be a positive integer, got {k!r}")
    return 4.0 * projection_constant(p) * projection_constant(q) / (k * n * (n - 2) * (n - 3))


def decomposition_terms(
    noise,
    y,
    vy: ProjectionSet,
    k_count: int,
    x_dim: int = 1,
    measured_gap: float = 0.0,
) -> DecompositionReport:
    """Evaluate both decomposition terms for one noise draw by direct summation.

    noise is the vector added to one released projection; vy holds the
    direction(s) applied to y. k_count is the projection count used in
    the residual coefficient; pass vy.k to reproduce the full-session
    decomposition, or a larger count with a single direction to measure
    one projection's share. x_dim sets c_p for the Alice-side dimension
    the noise belongs to (univariate projections give x_dim=1).
    """
    N = np.asarray(noise, dtype=np.float64).ravel()
    if N.size == 0 or not np.isfinite(N).all():
        raise DataError("noise must be a non-empty finite vector")
    Y = as_data_matrix(y, "y")
    n = Y.shape[0]
    if N.shape[0] != n:
        raise DataError(f"noise has {N.shape[0]} entries but y has {n} rows")
    if n < 4:
        raise DataError(f"need at least 4 rows, got {n}")
    if vy.dim != Y.shape[1]:
        raise ConfigError(f"vy has dim {vy.dim} but y has {Y.shape[1]} columns")
    if not (isinstance(k_count, numbers.Integral) and k_count >= 1):
        raise ConfigError(f"k_count must be a positive integer, got {k_count!r}")
    cp = projection_constant(x_dim)
    cq = projection_constant(Y.shape[1])
    An = _absdiff(N)
    row_n = An.sum(axis=1)
    W = Y @ vy.directions.T
    omega_vals = np.empty(vy.k, dtype=np.float64)
    cross = 0.0
    for j in range(vy.k):
        Bw = _absdiff(W[:, j])
        omega_vals[j] = cp * cq * _udcov_from_distances(An, Bw)
        cross += float(row_n @ Bw.sum(axis=1))
    coeff = 4.0 * cp * cq / (int(k_count) * n * (n - 2) * (n - 3))
    return DecompositionReport(
        omega_noise_y=float(omega_vals.mean()),
        residual_bound_term=coeff * cross,
        total_gap=float(measured_gap),
    )


def t_threshold(sigma: float, n: int, alpha: float) -> float:
    """Smallest tail level t at which the row-sum bound reaches level alpha.

    Returns 2 sigma sqrt(((n-1)/n) (ln 2 - ln(alpha)/n)); alpha_from_t at
    this t equals alpha exactly (in exact arithmetic).
    """
    if not (isinstance(sigma, numbers.Real) and math.isfinite(sigma) and sigma >= 0):
        raise ConfigError(f"sigma must be a finite non-negative number, got {sigma!r}")
    if not (isinstance(n, numbers.Integral) and n >= 2):
        raise ConfigError(f"n must be an integer >= 2, got {n!r}")
    if not (0.0 < alpha < 1.0):
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha!r}")
    n = int(n)
    return 2.0 * float(sigma) * math.sqrt(((n - 1) / n) * (math.log(2.0) - math.log(alpha) / n))


def alpha_from_t(sigma: float, n: int, t: float) -> float:
    """Tail probability bound min(1, 2^n exp(-n^2 t^2 / (4 sigma^2 (n-1)))).

    Bounds P(sum_l |N_i - N_l| >= n t) for one row of iid N(0, sigma^2)
    noise. Evaluated in log space so large n cannot overflow.
    """
    if not (isinstance(sigma, numbers.Real) and math.isfinite(sigma) and sigma > 0):
        raise ConfigError(f"sigma must be positive, got {sigma!r}")
    if not (isinstance(n, numbers.Integral) and n >= 2):
        raise ConfigError(f"n must be an integer >= 2, got {n!r}")
    if not (isinstance(t, numbers.Real) and math.isfinite(t) and t > 0):
        raise ConfigError(f"t must be positive, got {t!r}")
    n = int(n)
    log_bound = n * math.log(2.0) - (n * n * t * t) / (4.0 * sigma * sigma * (n - 1))
    if log_bound >= 0.0:
        return 1.0
    return math.exp(log_bound)


def lemma1_bound(b: float, n: int) -> float:
    """Lower bound max(0, 1 - n (1 - b)) on P(sum of n terms < n c).

    Valid whenever each term is below c with probability more than b;
    a plain union bound over the n complements.
    """
    if not (isinstance(b, numbers.Real) and 0.0 <= b <= 1.0):
        raise ConfigError(f"b must lie in [0, 1], got {b!r}")
    if not (isinstance(n, numbers.Integral) and n >= 1):
        raise ConfigError(f"n must be a positive integer, got {n!r}")
    return max(0.0, 1.0 - int(n) * (1.0 - float(b)))


def error_bound(inputs: BoundInputs, enforce_thresholds: bool = True) -> ErrorBound:
    """High-probability bound C n^3 t1 t2 on the residual cross term.

    Returns (bound_value, confidence) with confidence
    1 - n (alpha1 + alpha2 - alpha1 alpha2) clamped to [0, 1]; a clamp to
    zero emits VacuousBoundWarning since the bound then carries no
    information. With enforce_thresholds each t must sit at or above
    t_threshold(sigma, n, alpha); relaxing this is a testing hook (for
    example t = 0 forces bound_value 0).
    """
    n = int(inputs.n)
    if enforce_thresholds:
        for name, sig, t in (("t1", inputs.sigma1, inputs.t1), ("t2", inputs.sigma2, inputs.t2)):
            thr = t_threshold(sig, n, inputs.alpha)
            if t < thr * (1.0 - 1e-12):
                raise ConfigError(f"{name}={t} is below the alpha={inputs.alpha} threshold {thr}")
    bound_value = float(inputs.coefficient) * n**3 * inputs.t1 * inputs.t2
    a1 = alpha_from_t(inputs.sigma1, n, inputs.t1) if inputs.t1 > 0 else 1.0
    a2 = alpha_from_t(inputs.sigma2, n, inputs.t2) if inputs.t2 > 0 else 1.0
    confidence = 1.0 - n * (a1 + a2 - a1 * a2)
    if confidence < 0.0:
        warnings.warn("confidence clamped to 0: the bound is vacuous at these settings", VacuousBoundWarning)
        confidence = 0.0
    return ErrorBound(bound_value=bound_value, confidence=min(1.0, confidence))


def half_normal_moments(sigma: float) -> tuple[float, float]:
    """Mean and variance (sigma sqrt(2/pi), sigma^2 (1 - 2/pi)) of |N(0, sigma^2)|."""
    if not (isinstance(sigma, numbers.Real) and math.isfinite(sigma) and sigma >= 0):
        raise ConfigError(f"sigma must be a finite non-negative number, got {sigma!r}")
    s = float(sigma)
    return (s * math.sqrt(2.0 / math.pi), s * s * (1.0 - 2.0 / math.pi))


def bob_noise_dcov_estimate(
    y,
    sigma: float,
    k: int,
    trials: int,
    seed=None,
    x_dim: int = 1,
) -> float:
    """Monte Carlo estimate of the noise bias term, computable from Y alone.

    Averages the projected distance covariance between fresh N(0,
    sigma^2) noise and y over `trials` independent draws (fresh
    directions each trial). This is the expected shift the released
    noise induces in the private estimate, usable for post-hoc
    correction. Per-trial RNG streams derive from (seed, trial), so
    results are reproducible and trials could run in parallel.
    """
    Y = as_data_matrix(y, "y")
    n = Y.shape[0]
    if n < 4:
        raise DataError(f"need at least 4 rows, got {n}")
    if not (isinstance(trials, numbers.Integral) and trials >= 1):
        raise ConfigError(f"trials must be a positive integer, got {trials!r}")
    if not (isinstance(k, numbers.Integral) and k >= 1):
        raise ConfigError(f"k must be a positive integer, got {k!r}")
    if not (isinstance(sigma, numbers.Real) and math.isfinite(sigma) and sigma >= 0):
        raise ConfigError(f"sigma must be a finite non-negative number, got {sigma!r}")
    if sigma == 0.0:
        return 0.0
    cp = projection_constant(x_dim)
    cq = projection_constant(Y.shape[1])
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    acc = 0.0
    for child in root.spawn(int(trials)):
        rng = np.random.default_rng(child)
        noise = float(sigma) * rng.standard_normal(n)
        vy = sample_unit_projections(Y.shape[1], int(k), rng)
        An = _absdiff(noise)
        W = Y @ vy.directions.T
        per_k = 0.0
        for j in range(int(k)):
            per_k += cp * cq * _udcov_from_distances(An, _absdiff(W[:, j]))
        acc += per_k / int(k)
    return acc / int(trials)


def empirical_projection_scale(y, proj: ProjectionSet) -> float:
    """Sample standard deviation of all projected values {v_k . y_i}.

    The practical stand-in for the projected-Y scale parameter of the
    concentration bound when no model for y is available.
    """
    Y = as_data_matrix(y, "y")
    if proj.dim != Y.shape[1]:
        raise ConfigError(f"proj has dim {proj.dim} but y has {Y.shape[1]} columns")
    vals = (Y @ proj.directions.T).ravel()
    if vals.size < 2:
        raise DataError("need at least two projected values")
    return float(vals.std(ddof=1))
