"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and the environment variable
``IMPSOBOL_DISABLE_NUMBA`` is unset (or ``0``). Both paths are always
importable as ``*_numpy`` / ``*_numba`` so tests and the benchmark can
compare them directly.

Kernels
-------
orthonormal_table
    Values of orthonormal polynomials of degree ``0..max_deg`` from their
    three-term (Jacobi) recurrence coefficients.
design_matrix
    Tensor-product basis evaluation: ``F[i, j] = prod_d T[d, i, alpha[j, d]]``.
conditional_ratio
    Batched conditional Sobol' ratios: for each row of a batch of
    epistemic points, group the theta-dependent coefficients by their
    aleatory multi-index and return ``sum(num) / sum(den)`` of squares.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = "IMPSOBOL_DISABLE_NUMBA"

try:  # pragma: no cover - exercised implicitly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get(_FLAG, "0").strip().lower() in ("", "0", "false", "no")


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------


def orthonormal_table_numpy(x, a, b, max_deg):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((x.shape[0], max_deg + 1))
    out[:, 0] = 1.0
    if max_deg >= 1:
        out[:, 1] = (x - a[0]) / np.sqrt(b[1])
    for k in range(1, max_deg):
        out[:, k + 1] = ((x - a[k]) * out[:, k] - np.sqrt(b[k]) * out[:, k - 1]) / np.sqrt(b[k + 1])
    return out


def design_matrix_numpy(tables, alphas):
    n_dim, n_pts, _ = tables.shape
    out = np.ones((n_pts, alphas.shape[0]))
    for d in range(n_dim):
        col = alphas[:, d]
        if np.any(col):
            out *= tables[d][:, col]
    return out


def conditional_ratio_numpy(theta_tables, coef, alpha_theta, group_of, n_groups, num_mask, den_mask):
    n_batch = theta_tables.shape[0]
    psi = np.ones((n_batch, coef.shape[0]))
    for k in range(alpha_theta.shape[1]):
        col = alpha_theta[:, k]
        if np.any(col):
            psi *= theta_tables[:, k, col]
    indicator = np.zeros((coef.shape[0], n_groups))
    indicator[np.arange(coef.shape[0]), group_of] = 1.0
    grouped = (psi * coef) @ indicator
    sq = grouped * grouped
    num = sq[:, num_mask].sum(axis=1)
    den = sq[:, den_mask].sum(axis=1)
    out = np.full(n_batch, np.nan)
    ok = den > 0.0
    out[ok] = num[ok] / den[ok]
    return out


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------


def _orthonormal_table_loop(x, a, b, max_deg):
    n = x.shape[0]
    out = np.empty((n, max_deg + 1))
    sb = np.sqrt(b)
    for i in range(n):
        xi = x[i]
        out[i, 0] = 1.0
        if max_deg >= 1:
            out[i, 1] = (xi - a[0]) / sb[1]
        for k in range(1, max_deg):
            out[i, k + 1] = ((xi - a[k]) * out[i, k] - sb[k] * out[i, k - 1]) / sb[k + 1]
    return out


def _design_matrix_loop(tables, alphas):
    n_dim, n_pts, _ = tables.shape
    n_terms = alphas.shape[0]
    out = np.empty((n_pts, n_terms))
    for i in range(n_pts):
        for j in range(n_terms):
            v = 1.0
            for d in range(n_dim):
                deg = alphas[j, d]
                if deg != 0:
                    v *= tables[d, i, deg]
            out[i, j] = v
    return out


def _conditional_ratio_loop(theta_tables, coef, alpha_theta, group_of, n_groups, num_mask, den_mask):
    n_batch = theta_tables.shape[0]
    n_terms = coef.shape[0]
    n_th = alpha_theta.shape[1]
    out = np.empty(n_batch)
    grouped = np.empty(n_groups)
    for r in range(n_batch):
        grouped[:] = 0.0
        for j in range(n_terms):
            v = coef[j]
            for k in range(n_th):
                deg = alpha_theta[j, k]
                if deg != 0:
                    v *= theta_tables[r, k, deg]
            grouped[group_of[j]] += v
        num = 0.0
        den = 0.0
        for g in range(n_groups):
            s = grouped[g] * grouped[g]
            if num_mask[g]:
                num += s
            if den_mask[g]:
                den += s
        out[r] = num / den if den > 0.0 else np.nan
    return out


if HAVE_NUMBA:
    orthonormal_table_numba = numba.njit(cache=True)(_orthonormal_table_loop)
    design_matrix_numba = numba.njit(cache=True)(_design_matrix_loop)
    conditional_ratio_numba = numba.njit(cache=True)(_conditional_ratio_loop)
else:  # pragma: no cover
    orthonormal_table_numba = orthonormal_table_numpy
    design_matrix_numba = design_matrix_numpy
    conditional_ratio_numba = conditional_ratio_numpy


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------


def orthonormal_table(x, a, b, max_deg: int) -> np.ndarray:
    """``(n, max_deg + 1)`` table of orthonormal polynomial values at ``x``.

    ``a[k]``, ``b[k]`` are the monic recurrence coefficients
    ``pi_{k+1} = (x - a_k) pi_k - b_k pi_{k-1}``; ``b[0]`` is unused.
    """
    x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if numba_enabled():
        return orthonormal_table_numba(x, a, b, int(max_deg))
    return orthonormal_table_numpy(x, a, b, int(max_deg))


def design_matrix(tables: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    tables = np.ascontiguousarray(tables, dtype=np.float64)
    alphas = np.ascontiguousarray(alphas, dtype=np.int64)
    if numba_enabled():
        return design_matrix_numba(tables, alphas)
    return design_matrix_numpy(tables, alphas)


def conditional_ratio(theta_tables, coef, alpha_theta, group_of, n_groups, num_mask, den_mask) -> np.ndarray:
    args = (
        np.ascontiguousarray(theta_tables, dtype=np.float64),
        np.ascontiguousarray(coef, dtype=np.float64),
        np.ascontiguousarray(alpha_theta, dtype=np.int64),
        np.ascontiguousarray(group_of, dtype=np.int64),
        int(n_groups),
        np.ascontiguousarray(num_mask, dtype=np.bool_),
        np.ascontiguousarray(den_mask, dtype=np.bool_),
    )
    if numba_enabled():
        return conditional_ratio_numba(*args)
    return conditional_ratio_numpy(*args)
