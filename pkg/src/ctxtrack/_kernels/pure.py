"""Pure numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or when CTXTRACK_PURE is set.
Every function here must agree with ctxtrack._kernels._core to float precision;
tests/test_kernels.py holds the two backends together.
"""

from __future__ import annotations

import math

import numpy as np


def match_count(values: np.ndarray, means: np.ndarray, eps: float) -> int:
    """Count values within ratio distance ``eps`` of at least one codeword mean.

    The distance is 1 - min(v, m)/max(v, m), taken as 0 when both are 0.
    Inputs are non-negative.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    means = np.ascontiguousarray(means, dtype=np.float64)
    if values.size == 0 or means.size == 0:
        return 0
    hi = np.maximum.outer(values, means)
    lo = np.minimum.outer(values, means)
    denom = np.where(hi > 0.0, hi, 1.0)
    dist = 1.0 - lo / denom
    dist[hi == 0.0] = 0.0
    return int(np.count_nonzero(dist.min(axis=1) < eps))


def hist_intersection(ha: np.ndarray, hb: np.ndarray) -> np.ndarray:
    """All-pairs histogram intersection: out[i, j] = sum_b min(ha[i, b], hb[j, b])."""
    ha = np.ascontiguousarray(ha, dtype=np.float64)
    hb = np.ascontiguousarray(hb, dtype=np.float64)
    return np.minimum(ha[:, None, :], hb[None, :, :]).sum(axis=2)


def _full_cov(tri: np.ndarray, reg: float) -> np.ndarray:
    """Expand (n, 6) upper-triangular rows into regularized (n, 3, 3) matrices."""
    n = tri.shape[0]
    cov = np.empty((n, 3, 3), dtype=np.float64)
    cov[:, 0, 0] = tri[:, 0] + reg
    cov[:, 0, 1] = cov[:, 1, 0] = tri[:, 1]
    cov[:, 0, 2] = cov[:, 2, 0] = tri[:, 2]
    cov[:, 1, 1] = tri[:, 3] + reg
    cov[:, 1, 2] = cov[:, 2, 1] = tri[:, 4]
    cov[:, 2, 2] = tri[:, 5] + reg
    return cov


def cov_log_distance(ca: np.ndarray, cb: np.ndarray, reg: float = 1e-6) -> np.ndarray:
    """All-pairs log-eigenvalue distance between 3x3 covariance descriptors.

    Inputs are (n, 6) and (m, 6) upper-triangular rows [c00 c01 c02 c11 c12 c22].
    out[i, j] = sqrt(sum_k ln^2 lambda_k) over the generalized eigenvalues of
    the regularized pair (A_i, B_j).
    """
    ca = np.atleast_2d(np.ascontiguousarray(ca, dtype=np.float64))
    cb = np.atleast_2d(np.ascontiguousarray(cb, dtype=np.float64))
    n, m = ca.shape[0], cb.shape[0]
    if n == 0 or m == 0:
        return np.zeros((n, m), dtype=np.float64)
    A = _full_cov(ca, reg)
    B = _full_cov(cb, reg)
    # lambda(A, B) = eig of Linv A Linv^T where B = L L^T
    L = np.linalg.cholesky(B)                      # (m, 3, 3)
    Linv = np.linalg.inv(L)
    pairs = np.einsum("mab,nbc,mdc->nmad", Linv, A, Linv)   # (n, m, 3, 3)
    lam = np.linalg.eigvalsh(pairs.reshape(n * m, 3, 3))
    lam = np.maximum(lam, 1e-300)
    rho = np.sqrt((np.log(lam) ** 2).sum(axis=1))
    return rho.reshape(n, m)


def cov_log_distance_paired(ca: np.ndarray, cb: np.ndarray, reg: float = 1e-6) -> np.ndarray:
    """Row-wise log-eigenvalue distance for aligned (n, 6) covariance rows."""
    ca = np.atleast_2d(np.ascontiguousarray(ca, dtype=np.float64))
    cb = np.atleast_2d(np.ascontiguousarray(cb, dtype=np.float64))
    n = ca.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.float64)
    A = _full_cov(ca, reg)
    B = _full_cov(cb, reg)
    L = np.linalg.cholesky(B)
    Linv = np.linalg.inv(L)
    M = np.einsum("nab,nbc,ndc->nad", Linv, A, Linv)
    lam = np.maximum(np.linalg.eigvalsh(M), 1e-300)
    return np.sqrt((np.log(lam) ** 2).sum(axis=1))


def best_stump(values_sorted: np.ndarray, y_sorted: np.ndarray,
               w_sorted: np.ndarray) -> tuple[float, float, int]:
    """Best decision stump on one feature, given samples presorted by value.

    Thresholds are the midpoints between consecutive distinct values. Polarity
    +1 predicts the positive class at or above the threshold. Returns
    (weighted error, threshold, polarity); (inf, nan, 0) when the feature is
    constant. Lower threshold wins ties, then polarity +1.
    """
    v = np.ascontiguousarray(values_sorted, dtype=np.float64)
    y = np.ascontiguousarray(y_sorted, dtype=np.float64)
    w = np.ascontiguousarray(w_sorted, dtype=np.float64)
    n = v.shape[0]
    if n < 2:
        return math.inf, math.nan, 0
    cum_pos = np.cumsum(np.where(y > 0, w, 0.0))
    cum_neg = np.cumsum(np.where(y > 0, 0.0, w))
    tot_pos = cum_pos[-1]
    tot_neg = cum_neg[-1]
    total = tot_pos + tot_neg
    cut = np.nonzero(v[1:] > v[:-1])[0]            # threshold sits after index i
    if cut.size == 0:
        return math.inf, math.nan, 0
    err_plus = cum_pos[cut] + (tot_neg - cum_neg[cut])
    errs = np.empty((cut.size, 2), dtype=np.float64)
    errs[:, 0] = err_plus
    errs[:, 1] = total - err_plus
    flat = int(np.argmin(errs))                    # first minimum: lowest cut, then +1
    idx, pol_idx = divmod(flat, 2)
    i = int(cut[idx])
    threshold = 0.5 * (v[i] + v[i + 1])
    polarity = 1 if pol_idx == 0 else -1
    return float(errs[idx, pol_idx]), float(threshold), polarity
