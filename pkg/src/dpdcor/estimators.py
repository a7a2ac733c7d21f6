"""Distance covariance and dependence estimators.

Implements the unbiased (U-statistic) estimator of squared distance
covariance, the random-projection average that approximates it in high
dimension, and the kernel route that reaches the same quantity through
the Hilbert-Schmidt independence criterion with distance-induced kernels.

For an n x n Euclidean distance matrix A of the X sample and B of the Y
sample (both with zero diagonals), the unbiased squared distance
covariance is

    omega = S1 / (n (n-3)) - 2 S2 / (n (n-2) (n-3)) + S3 / (n (n-1) (n-2) (n-3))

with S1 = sum_ij a_ij b_ij, S2 = sum_i (row_i(A) . row_i(B)) and
S3 = (sum A)(sum B). It is unbiased for the squared population distance
covariance and requires n >= 4. The random-projection estimator averages
c_p c_q * omega computed on one-dimensional projections u_k'X and v_k'Y,
where c_p = sqrt(pi) Gamma((p+1)/2) / Gamma(p/2) corrects for the
projection; its expectation over the projection draw equals omega of the
original pair.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, DataError

ESTIMATE_KINDS = (
    "unbiased",
    "projected",
    "hsic-equivalent",
    "private-repeated",
    "private-disjoint",
    "private-dvar",
)
_PRIVATE_KINDS = frozenset(k for k in ESTIMATE_KINDS if k.startswith("private-"))


@dataclass(frozen=True)
class EstimateRecord:
    """A point estimate plus the metadata needed to reproduce or audit it.

    budget is the (epsilon, delta) spent producing the value; it must be
    present exactly for the private estimator kinds and absent otherwise.
    k is the number of projections involved (0 when not applicable), seed
    the sampling seed or tuple of seeds (None when deterministic).
    """

    value: float
    kind: str
    k: int = 0
    seed: object = None
    budget: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in ESTIMATE_KINDS:
            raise ConfigError(f"unknown estimate kind {self.kind!r}")
        if self.kind in _PRIVATE_KINDS:
            if self.budget is None:
                raise ConfigError(f"kind {self.kind!r} requires a budget")
            eps, delta = self.budget
            if not (eps > 0) or not (0.0 <= delta < 0.5):
                raise ConfigError(f"invalid budget {self.budget!r}")
        elif self.budget is not None:
            raise ConfigError(f"non-private kind {self.kind!r} must not carry a budget")
        if self.k < 0:
            raise ConfigError("projection count k must be >= 0")

    def as_dict(self) -> dict:
        return {
            "value": float(self.value),
            "kind": self.kind,
            "k": int(self.k),
            "seed": self.seed,
            "budget": None if self.budget is None else [float(self.budget[0]), float(self.budget[1])],
        }


def as_data_matrix(x, name: str = "data") -> np.ndarray:
    """Coerce x to a float64 (n, d) matrix; 1-D input becomes one column."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DataError(f"{name} must be a vector or a 2-D matrix, got ndim={arr.ndim}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DataError(f"{name} is empty")
    if not np.isfinite(arr).all():
        raise DataError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr)


def _absdiff(v: np.ndarray) -> np.ndarray:
    # exact |v_i - v_j|, bitwise identical for v and -v
    return np.abs(v[:, None] - v[None, :])


def pairwise_distances(x) -> np.ndarray:
    """Euclidean distance matrix of the rows of x (zero diagonal, symmetric)."""
    X = as_data_matrix(x, "x")
    if X.shape[1] == 1:
        return _absdiff(X[:, 0])
    return cdist(X, X)


def _udcov_from_distances(A: np.ndarray, B: np.ndarray) -> float:
    n = A.shape[0]
    s1 = float((A * B).sum())
    s2 = float(A.sum(axis=1) @ B.sum(axis=1))
    s3 = float(A.sum()) * float(B.sum())
    return (
        s1 / (n * (n - 3))
        - 2.0 * s2 / (n * (n - 2) * (n - 3))
        + s3 / (n * (n - 1) * (n - 2) * (n - 3))
    )


def _paired_matrices(x, y) -> tuple[np.ndarray, np.ndarray]:
    X = as_data_matrix(x, "x")
    Y = as_data_matrix(y, "y")
    if X.shape[0] != Y.shape[0]:
        raise DataError(f"x and y must have the same number of rows, got {X.shape[0]} and {Y.shape[0]}")
    return X, Y


def unbiased_dcov(x, y) -> float:
    """Unbiased estimate of the squared distance covariance of paired samples.

    Requires at least 4 paired rows. unbiased_dcov(x, x) is always >= 0;
    the cross value may be negative at finite n.
    """
    X, Y = _paired_matrices(x, y)
    if X.shape[0] < 4:
        raise DataError(f"need at least 4 rows, got {X.shape[0]}")
    return _udcov_from_distances(pairwise_distances(X), pairwise_distances(Y))


def unbiased_dcorr(x, y) -> float:
    """Unbiased squared distance correlation in [-1, 1].

    Returns 0.0 when either marginal distance variance is non-positive
    (constant input), so the ratio is always defined.
    """
    X, Y = _paired_matrices(x, y)
    if X.shape[0] < 4:
        raise DataError(f"need at least 4 rows, got {X.shape[0]}")
    A = pairwise_distances(X)
    B = pairwise_distances(Y)
    num = _udcov_from_distances(A, B)
    vx = _udcov_from_distances(A, A)
    vy = _udcov_from_distances(B, B)
    prod = vx * vy
    if prod <= 0.0:
        return 0.0
    return num / math.sqrt(prod)


def projection_constant(p: int) -> float:
    """Correction constant sqrt(pi) Gamma((p+1)/2) / Gamma(p/2) for dimension p.

    Equals 1 at p = 1 and pi/2 at p = 2, and grows like sqrt(pi p / 2).
    Evaluated in log space for large p to avoid Gamma overflow.
    """
    if not isinstance(p, numbers.Integral) or isinstance(p, bool) or p < 1:
        raise ConfigError(f"dimension p must be a positive integer, got {p!r}")
    p = int(p)
    if p <= 300:
        return math.sqrt(math.pi) * math.gamma((p + 1) / 2) / math.gamma(p / 2)
    return math.exp(0.5 * math.log(math.pi) + math.lgamma((p + 1) / 2) - math.lgamma(p / 2))


@dataclass(frozen=True)
class ProjectionSet:
    """A bundle of unit-norm projection directions, one per row of `directions`.

    directions has shape (k, dim); every row must have Euclidean norm 1
    up to floating-point tolerance. seed records how the set was sampled
    (None for hand-built sets).
    """

    directions: np.ndarray
    seed: object = None

    def __post_init__(self):
        arr = np.array(self.directions, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ConfigError("directions must be a non-empty (k, dim) matrix")
        if not np.isfinite(arr).all():
            raise ConfigError("directions contain non-finite values")
        norms = np.linalg.norm(arr, axis=1)
        if not np.allclose(norms, 1.0, rtol=0.0, atol=1e-8):
            raise ConfigError("every projection direction must have unit norm")
        arr.setflags(write=False)
        object.__setattr__(self, "directions", arr)

    @property
    def k(self) -> int:
        return int(self.directions.shape[0])

    @property
    def dim(self) -> int:
        return int(self.directions.shape[1])


def sample_unit_projections(dim: int, count: int, seed=None) -> ProjectionSet:
    """Draw `count` directions uniformly on the unit sphere in R^dim.

    Normalized Gaussian draws; for dim == 1 the directions are exactly
    +1.0 or -1.0. Same seed, dim and count give identical directions.
    """
    if not isinstance(dim, numbers.Integral) or dim < 1:
        raise ConfigError(f"dim must be a positive integer, got {dim!r}")
    if not isinstance(count, numbers.Integral) or count < 1:
        raise ConfigError(f"count must be a positive integer, got {count!r}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((int(count), int(dim)))
    norms = np.linalg.norm(g, axis=1)
    while (norms == 0.0).any():  # pragma: no cover - probability zero
        bad = norms == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), int(dim)))
        norms = np.linalg.norm(g, axis=1)
    return ProjectionSet(g / norms[:, None], seed=seed)


def projected_dcov(x, y, proj_x: ProjectionSet, proj_y: ProjectionSet) -> EstimateRecord:
    """Random-projection estimate of squared distance covariance.

    Averages c_p c_q * unbiased_dcov(X u_k, Y v_k) over the K direction
    pairs. For univariate x and y this collapses to unbiased_dcov(x, y)
    because the directions are +-1 and c_1 = 1.
    """
    X, Y = _paired_matrices(x, y)
    n = X.shape[0]
    if n < 4:
        raise DataError(f"need at least 4 rows, got {n}")
    if proj_x.dim != X.shape[1]:
        raise ConfigError(f"proj_x has dim {proj_x.dim} but x has {X.shape[1]} columns")
    if proj_y.dim != Y.shape[1]:
        raise ConfigError(f"proj_y has dim {proj_y.dim} but y has {Y.shape[1]} columns")
    if proj_x.k != proj_y.k:
        raise ConfigError(f"projection counts differ: {proj_x.k} vs {proj_y.k}")
    cp = projection_constant(X.shape[1])
    cq = projection_constant(Y.shape[1])
    Z = X @ proj_x.directions.T
    W = Y @ proj_y.directions.T
    vals = np.empty(proj_x.k, dtype=np.float64)
    for k in range(proj_x.k):
        vals[k] = cp * cq * _udcov_from_distances(_absdiff(Z[:, k]), _absdiff(W[:, k]))
    seed: object = None
    if proj_x.seed is not None or proj_y.seed is not None:
        seed = (proj_x.seed, proj_y.seed)
    return EstimateRecord(value=float(vals.mean()), kind="projected", k=proj_x.k, seed=seed)


def induced_kernel(distances: np.ndarray, mode: str = "max-normalize") -> np.ndarray:
    """Turn a distance matrix into a positive-type similarity kernel.

    mode "max-subtract" returns max(D) - D (self-similarity max(D) on the
    diagonal); mode "max-normalize" returns 1 - D / max(D), with entries
    in [0, 1] and unit diagonal. The normalized mode is undefined when
    all distances are zero.
    """
    D = np.asarray(distances, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DataError("distance matrix must be square")
    if not np.isfinite(D).all():
        raise DataError("distance matrix contains non-finite values")
    scale = float(D.max(initial=0.0))
    tol = 1e-9 * max(scale, 1.0)
    if (D < -tol).any():
        raise DataError("distance matrix has negative entries")
    if np.abs(np.diag(D)).max(initial=0.0) > tol:
        raise DataError("distance matrix must have a zero diagonal")
    if np.abs(D - D.T).max(initial=0.0) > tol:
        raise DataError("distance matrix must be symmetric")
    if mode == "max-subtract":
        return scale - D
    if mode == "max-normalize":
        if scale <= 0.0:
            raise DataError("degenerate metric: all distances are zero")
        return 1.0 - D / scale
    raise ConfigError(f"unknown kernel mode {mode!r}")


def hsic(K: np.ndarray, L: np.ndarray) -> float:
    """Empirical Hilbert-Schmidt independence criterion of two kernel matrices.

    Computes trace(K H L H) / (m - 1)^2 with H the centering matrix,
    via double centering. Requires square symmetric matrices of equal
    size m >= 2.
    """
    K = np.asarray(K, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DataError("K must be square")
    if L.shape != K.shape:
        raise DataError(f"K and L shapes differ: {K.shape} vs {L.shape}")
    m = K.shape[0]
    if m < 2:
        raise DataError("need at least 2 rows for HSIC")
    if not (np.isfinite(K).all() and np.isfinite(L).all()):
        raise DataError("kernel matrices contain non-finite values")
    for M, name in ((K, "K"), (L, "L")):
        scale = max(float(np.abs(M).max(initial=0.0)), 1.0)
        if np.abs(M - M.T).max(initial=0.0) > 1e-9 * scale:
            raise DataError(f"{name} must be symmetric")
    Kc = K - K.mean(axis=0, keepdims=True) - K.mean(axis=1, keepdims=True) + K.mean()
    Lc = L - L.mean(axis=0, keepdims=True) - L.mean(axis=1, keepdims=True) + L.mean()
    return float((Kc * Lc).sum()) / float((m - 1) ** 2)


def dcov_via_hsic(x, y) -> EstimateRecord:
    """Squared distance covariance computed through the kernel route.

    Builds distance-induced kernels (max-normalize, falling back to
    max-subtract for a constant sample where normalization is undefined)
    and evaluates HSIC on them. On per-column min-max scaled data the
    value approaches unbiased_dcov(x, y) as the sample grows; both are
    estimating the same population quantity.
    """
    X, Y = _paired_matrices(x, y)
    if X.shape[0] < 2:
        raise DataError(f"need at least 2 rows, got {X.shape[0]}")
    Dx = pairwise_distances(X)
    Dy = pairwise_distances(Y)
    Kx = induced_kernel(Dx, "max-normalize" if Dx.max(initial=0.0) > 0.0 else "max-subtract")
    Ly = induced_kernel(Dy, "max-normalize" if Dy.max(initial=0.0) > 0.0 else "max-subtract")
    return EstimateRecord(value=hsic(Kx, Ly), kind="hsic-equivalent")
