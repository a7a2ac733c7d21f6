"""Brute-force reference implementations used only by the test suite.

Every function here re-derives its quantity with naive nested loops and
no shared helper code with the optimized estimators (only primitive
arithmetic and math.*), so that agreement between the two paths is
meaningful evidence of correctness. Loops are JIT-compiled with numba
when available and fall back to pure Python otherwise.

Not part of the public package surface.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DataError

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


@njit(cache=True)
def _dcov_loops(X: np.ndarray, Y: np.ndarray) -> float:
    n = X.shape[0]
    dx = X.shape[1]
    dy = Y.shape[1]
    s1 = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            qa = 0.0
            for c in range(dx):
                qa += (X[i, c] - X[j, c]) ** 2
            qb = 0.0
            for c in range(dy):
                qb += (Y[i, c] - Y[j, c]) ** 2
            s1 += math.sqrt(qa) * math.sqrt(qb)
    s2 = 0.0
    for i in range(n):
        ra = 0.0
        rb = 0.0
        for j in range(n):
            qa = 0.0
            for c in range(dx):
                qa += (X[i, c] - X[j, c]) ** 2
            qb = 0.0
            for c in range(dy):
                qb += (Y[i, c] - Y[j, c]) ** 2
            ra += math.sqrt(qa)
            rb += math.sqrt(qb)
        s2 += ra * rb
    ta = 0.0
    tb = 0.0
    for i in range(n):
        for j in range(n):
            qa = 0.0
            for c in range(dx):
                qa += (X[i, c] - X[j, c]) ** 2
            qb = 0.0
            for c in range(dy):
                qb += (Y[i, c] - Y[j, c]) ** 2
            ta += math.sqrt(qa)
            tb += math.sqrt(qb)
    return (
        s1 / (n * (n - 3))
        - 2.0 * s2 / (n * (n - 2) * (n - 3))
        + ta * tb / (n * (n - 1) * (n - 2) * (n - 3))
    )


@njit(cache=True)
def _hsic_loops(K: np.ndarray, L: np.ndarray) -> float:
    m = K.shape[0]
    inv = 1.0 / m
    total = 0.0
    for i in range(m):
        for j in range(m):
            for a in range(m):
                h_ja = (1.0 if j == a else 0.0) - inv
                for b in range(m):
                    h_bi = (1.0 if b == i else 0.0) - inv
                    total += K[i, j] * h_ja * L[a, b] * h_bi
    return total / ((m - 1) ** 2)


@njit(cache=True)
def _residual_loops(N: np.ndarray, Y: np.ndarray, v: np.ndarray) -> float:
    n = N.shape[0]
    dy = Y.shape[1]
    total = 0.0
    for i in range(n):
        sn = 0.0
        for l in range(n):
            sn += abs(N[i] - N[l])
        sy = 0.0
        for l in range(n):
            proj = 0.0
            for c in range(dy):
                proj += v[c] * (Y[i, c] - Y[l, c])
            sy += abs(proj)
        total += sn * sy
    return total


def _matrix(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.size == 0:
        raise DataError(f"{name} must be a non-empty vector or matrix")
    return np.ascontiguousarray(arr)


def oracle_dcov(x, y) -> float:
    """Unbiased squared distance covariance, evaluated by literal double loops."""
    X = _matrix(x, "x")
    Y = _matrix(y, "y")
    if X.shape[0] != Y.shape[0]:
        raise DataError("x and y must have the same number of rows")
    if X.shape[0] < 4:
        raise DataError("need at least 4 rows")
    return float(_dcov_loops(X, Y))


def oracle_hsic(K, L) -> float:
    """trace(K H L H) / (m-1)^2 expanded as an explicit four-index sum."""
    Km = np.ascontiguousarray(np.asarray(K, dtype=np.float64))
    Lm = np.ascontiguousarray(np.asarray(L, dtype=np.float64))
    if Km.ndim != 2 or Km.shape[0] != Km.shape[1]:
        raise DataError("K must be square")
    if Lm.shape != Km.shape:
        raise DataError("K and L shapes differ")
    if Km.shape[0] < 2:
        raise DataError("need at least 2 rows")
    return float(_hsic_loops(Km, Lm))


def oracle_residual_term(noise, y, v, n: int, k: int) -> float:
    """Residual cross term of the private-vs-plain estimator decomposition.

    Computes sum_i (sum_l |N_i - N_l|) (sum_l |v'(Y_i - Y_l)|) by nested
    loops and scales by 4 c_1 c_q / (k n (n-2) (n-3)), with the
    projection constants evaluated inline from Gamma functions.
    """
    N = np.ascontiguousarray(np.asarray(noise, dtype=np.float64).ravel())
    Y = _matrix(y, "y")
    vv = np.ascontiguousarray(np.asarray(v, dtype=np.float64).ravel())
    if N.shape[0] != Y.shape[0]:
        raise DataError("noise and y must have the same number of rows")
    if int(n) != N.shape[0]:
        raise DataError(f"n={n} does not match the {N.shape[0]} supplied rows")
    if vv.shape[0] != Y.shape[1]:
        raise DataError("direction length must match the number of y columns")
    if N.shape[0] < 4 or k < 1:
        raise DataError("need n >= 4 and k >= 1")
    q = Y.shape[1]
    cp = math.sqrt(math.pi) * math.gamma(1.0) / math.gamma(0.5)
    cq = math.sqrt(math.pi) * math.gamma((q + 1) / 2.0) / math.gamma(q / 2.0)
    raw = float(_residual_loops(N, Y, vv))
    return 4.0 * cp * cq * raw / (k * n * (n - 2) * (n - 3))


def warm_up() -> None:
    """Trigger JIT compilation of all oracle kernels on tiny inputs."""
    X = np.arange(8.0).reshape(4, 2)
    oracle_dcov(X, X)
    oracle_hsic(np.eye(2), np.eye(2))
    oracle_residual_term(np.arange(4.0), X, np.array([1.0, 0.0]), 4, 1)
