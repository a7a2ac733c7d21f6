"""Noise calibration and budget accounting for the private estimators.

Two mechanisms are used. Projected one-dimensional views of Alice's data
are released through the Gaussian mechanism, calibrated to the L2
sensitivity of the stacked projection matrix: one individual changing
their row moves the released vector by at most w2, the largest row norm
of the (dim, k) matrix of stacked unit directions. The scalar distance
variance release uses the Laplace mechanism with the global sensitivity
(12 n - 11) / (n - 1)^2 of the normalized-kernel distance variance.

Budgets compose additively across sequential releases; the disjoint
variant's per-block projections touch disjoint rows and therefore count
once (parallel composition).
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, ConfigError
from .estimators import EstimateRecord, ProjectionSet, as_data_matrix, unbiased_dcov

PROTOCOL_VARIANTS = ("repeated", "disjoint")


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) differential-privacy budget.

    epsilon must be positive; delta must lie in [0, 1/2). delta == 0 is a
    pure-epsilon budget (Laplace); the Gaussian mechanism needs delta > 0.
    """

    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.epsilon, numbers.Real) and math.isfinite(self.epsilon) and self.epsilon > 0):
            raise BudgetError(f"epsilon must be a positive finite number, got {self.epsilon!r}")
        if not (isinstance(self.delta, numbers.Real) and 0.0 <= self.delta < 0.5):
            raise BudgetError(f"delta must lie in [0, 1/2), got {self.delta!r}")

    def as_tuple(self) -> tuple[float, float]:
        return (float(self.epsilon), float(self.delta))


@dataclass(frozen=True)
class NoiseSpec:
    """Calibrated noise parameters for one session.

    gaussian_sigma is the per-coordinate noise applied to released
    projections, laplace_scale the scale of the distance-variance noise,
    w2 the L2 sensitivity the Gaussian noise was calibrated against, and
    budget the per-release (epsilon, delta) the calibration targets.
    """

    gaussian_sigma: float
    laplace_scale: float
    w2: float
    budget: PrivacyBudget

    def __post_init__(self):
        for name in ("gaussian_sigma", "laplace_scale", "w2"):
            v = getattr(self, name)
            if not (isinstance(v, numbers.Real) and math.isfinite(v) and v >= 0.0):
                raise ConfigError(f"{name} must be a finite non-negative number, got {v!r}")


@dataclass(frozen=True)
class BudgetLedger:
    """An append-only record of privacy spends for one protocol session.

    entries are (label, epsilon, delta) triples, one per accounted
    release; totals are their sums. variant and k record which protocol
    produced the spends.
    """

    entries: tuple[tuple[str, float, float], ...]
    variant: str
    k: int

    def __post_init__(self):
        if self.variant not in PROTOCOL_VARIANTS:
            raise ConfigError(f"variant must be one of {PROTOCOL_VARIANTS}, got {self.variant!r}")
        if not (isinstance(self.k, numbers.Integral) and self.k >= 1):
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        for label, eps, delta in self.entries:
            if not isinstance(label, str) or not label:
                raise ConfigError("ledger entry labels must be non-empty strings")
            if not (eps > 0 and math.isfinite(eps)):
                raise ConfigError(f"ledger entry {label!r} has non-positive epsilon")
            if not (0.0 <= delta < 0.5):
                raise ConfigError(f"ledger entry {label!r} has delta outside [0, 1/2)")

    def with_entry(self, label: str, epsilon: float, delta: float = 0.0) -> "BudgetLedger":
        return BudgetLedger(self.entries + ((label, float(epsilon), float(delta)),), self.variant, self.k)

    @property
    def total_epsilon(self) -> float:
        return float(sum(e for _, e, _ in self.entries))

    @property
    def total_delta(self) -> float:
        return float(sum(d for _, _, d in self.entries))


def l2_sensitivity(projections: ProjectionSet | np.ndarray) -> float:
    """L2 sensitivity of releasing all k projections of one data matrix.

    For the (dim, k) matrix whose columns are the unit directions, this
    is the largest row Euclidean norm: the worst-case displacement of the
    released values when a single row of the data changes by a unit
    vector. For dim == 1 it equals sqrt(k); in general it is at most
    sqrt(k) and at least 1.
    """
    if isinstance(projections, ProjectionSet):
        dirs = projections.directions
    else:
        dirs = np.asarray(projections, dtype=np.float64)
        if dirs.ndim != 2:
            raise ConfigError("projections must be a (k, dim) matrix or a ProjectionSet")
    stacked = dirs.T  # (dim, k)
    return float(np.linalg.norm(stacked, axis=1).max())


def gaussian_sigma(w2: float, budget: PrivacyBudget) -> float:
    """Gaussian mechanism noise level for sensitivity w2 under `budget`.

    sigma = w2 * sqrt(2 (ln(1 / (2 delta)) + epsilon)) / epsilon, valid
    for delta in (0, 1/2). Scales linearly in w2 and decreases in both
    epsilon and delta.
    """
    if not (isinstance(w2, numbers.Real) and math.isfinite(w2) and w2 >= 0.0):
        raise ConfigError(f"w2 must be a finite non-negative number, got {w2!r}")
    if budget.delta <= 0.0:
        raise BudgetError("the Gaussian mechanism requires delta > 0")
    eps = float(budget.epsilon)
    return float(w2) * math.sqrt(2.0 * (math.log(1.0 / (2.0 * budget.delta)) + eps)) / eps


def privatize_projection(values, sigma: float, seed=None) -> np.ndarray:
    """Add iid Gaussian noise of scale sigma to a released projection vector.

    sigma == 0 returns the values unchanged (a copy). Same seed, same
    output.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ConfigError("projection values must be a 1-D vector")
    if not (isinstance(sigma, numbers.Real) and math.isfinite(sigma) and sigma >= 0.0):
        raise ConfigError(f"sigma must be a finite non-negative number, got {sigma!r}")
    if sigma == 0.0:
        return v.copy()
    rng = np.random.default_rng(seed)
    return v + sigma * rng.standard_normal(v.shape[0])


def sample_laplace(scale: float, rng: np.random.Generator, size: int | None = None):
    """Draw from the Laplace distribution with the given scale via inverse CDF.

    Returns a float when size is None, else a float array of that length.
    scale == 0 yields exact zeros (useful as a noise-free hook).
    """
    if not (isinstance(scale, numbers.Real) and math.isfinite(scale) and scale >= 0.0):
        raise ConfigError(f"scale must be a finite non-negative number, got {scale!r}")
    n = 1 if size is None else int(size)
    if n < 0:
        raise ConfigError("size must be non-negative")
    u = rng.random(n)
    mask = u == 0.0
    while mask.any():  # u = 0 would map to -inf; probability ~2^-53 per draw
        u[mask] = rng.random(int(mask.sum()))
        mask = u == 0.0
    t = u - 0.5
    out = -float(scale) * np.copysign(1.0, t) * np.log1p(-2.0 * np.abs(t))
    if size is None:
        return float(out[0])
    return out


def hsic_global_sensitivity(n: int) -> float:
    """Global sensitivity (12 n - 11) / (n - 1)^2 of the variance release.

    This is the worst-case change of the normalized-kernel distance
    variance when one of n rows is replaced; it decreases roughly like
    12 / n.
    """
    if not isinstance(n, numbers.Integral) or isinstance(n, bool) or n < 2:
        raise ConfigError(f"n must be an integer >= 2, got {n!r}")
    n = int(n)
    return (12 * n - 11) / (n - 1) ** 2


def privatize_dvar(x, epsilon: float, seed=None, scale: float | None = None) -> EstimateRecord:
    """Release the distance variance of x under epsilon-DP Laplace noise.

    The base value is unbiased_dcov(x, x), so the zero-noise limit
    reproduces the non-private pipeline exactly. The default noise scale
    is hsic_global_sensitivity(n) / epsilon; pass `scale` to override it
    (scale=0.0 is a deterministic testing hook).
    """
    X = as_data_matrix(x, "x")
    if not (isinstance(epsilon, numbers.Real) and math.isfinite(epsilon) and epsilon > 0):
        raise BudgetError(f"epsilon must be a positive finite number, got {epsilon!r}")
    base = unbiased_dcov(X, X)
    b = hsic_global_sensitivity(X.shape[0]) / float(epsilon) if scale is None else float(scale)
    noise = sample_laplace(b, np.random.default_rng(seed))
    return EstimateRecord(
        value=base + noise,
        kind="private-dvar",
        k=0,
        seed=seed,
        budget=(float(epsilon), 0.0),
    )


def compose_budget(
    variant: str,
    k: int,
    eps_per_projection: float,
    eps_variance: float,
    delta_per_projection: float = 0.0,
) -> BudgetLedger:
    """Account the total budget of one session as a BudgetLedger.

    The repeated variant releases all rows k times, so the k projection
    spends compose sequentially (k entries). The disjoint variant touches
    each row in exactly one block, so its k projection releases count
    once (a single parallel entry). The variance release always adds its
    own epsilon with delta = 0.
    """
    if variant not in PROTOCOL_VARIANTS:
        raise ConfigError(f"variant must be one of {PROTOCOL_VARIANTS}, got {variant!r}")
    if not (isinstance(k, numbers.Integral) and k >= 1):
        raise ConfigError(f"k must be a positive integer, got {k!r}")
    if not (eps_per_projection > 0 and math.isfinite(eps_per_projection)):
        raise BudgetError(f"eps_per_projection must be positive, got {eps_per_projection!r}")
    if not (eps_variance > 0 and math.isfinite(eps_variance)):
        raise BudgetError(f"eps_variance must be positive, got {eps_variance!r}")
    if not (0.0 <= delta_per_projection < 0.5):
        raise BudgetError(f"delta_per_projection must lie in [0, 1/2), got {delta_per_projection!r}")
    entries: list[tuple[str, float, float]] = []
    if variant == "repeated":
        for i in range(1, int(k) + 1):
            entries.append((f"projection {i} (all rows)", float(eps_per_projection), float(delta_per_projection)))
    else:
        entries.append(
            (f"projections (parallel over {int(k)} disjoint blocks)", float(eps_per_projection), float(delta_per_projection))
        )
    entries.append(("distance variance (Laplace)", float(eps_variance), 0.0))
    return BudgetLedger(tuple(entries), variant, int(k))
