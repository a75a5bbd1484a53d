"""Numba ``@njit`` implementations of the simplex hot kernels.

These are the reference formulations; ``kernels._numpy`` mirrors their
semantics with vectorized code.  All kernels mutate their output arrays in
place and avoid allocation inside the loop.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# This backend solves against extracted LU triangles itself (exploiting
# sparse right-hand sides); the numpy backend defers to SuperLU instead.
HAS_TRIANGULAR = True


@njit(cache=True)
def col_dots(indptr, indices, data, col_of, y, out):
    for j in range(out.size):
        s = 0.0
        for k in range(indptr[j], indptr[j + 1]):
            s += data[k] * y[indices[k]]
        out[j] = s


@njit(cache=True)
def subtract_columns(indptr, indices, data, cols, vals, target):
    for c in range(cols.size):
        j = cols[c]
        v = vals[c]
        for k in range(indptr[j], indptr[j + 1]):
            target[indices[k]] -= data[k] * v


@njit(cache=True)
def eta_ftran(n_eta, eta_ptr, eta_rows, eta_vals, eta_piv_row, eta_piv_val, w):
    for i in range(n_eta):
        r = eta_piv_row[i]
        t = w[r] / eta_piv_val[i]
        if t != 0.0:
            for k in range(eta_ptr[i], eta_ptr[i + 1]):
                w[eta_rows[k]] -= eta_vals[k] * t
        w[r] = t


@njit(cache=True)
def eta_btran(n_eta, eta_ptr, eta_rows, eta_vals, eta_piv_row, eta_piv_val, w):
    for i in range(n_eta - 1, -1, -1):
        r = eta_piv_row[i]
        s = 0.0
        for k in range(eta_ptr[i], eta_ptr[i + 1]):
            s += eta_vals[k] * w[eta_rows[k]]
        w[r] = (w[r] - s) / eta_piv_val[i]


@njit(cache=True)
def lower_solve(ptr, idx, val, x):
    """x := L^-1 x for unit-lower-triangular CSC L (explicit unit diagonal,
    ascending rows per column).  Zero entries of x skip their column."""
    for j in range(x.size):
        xj = x[j]
        if xj != 0.0:
            for k in range(ptr[j], ptr[j + 1]):
                i = idx[k]
                if i > j:
                    x[i] -= val[k] * xj


@njit(cache=True)
def upper_solve(ptr, idx, val, x):
    """x := U^-1 x for upper-triangular CSC U (diagonal last per column)."""
    for j in range(x.size - 1, -1, -1):
        dk = ptr[j + 1] - 1
        xj = x[j] / val[dk]
        x[j] = xj
        if xj != 0.0:
            for k in range(ptr[j], dk):
                x[idx[k]] -= val[k] * xj


@njit(cache=True)
def lower_t_solve(ptr, idx, val, x):
    """x := L^-T x (backward substitution over columns of L)."""
    for j in range(x.size - 1, -1, -1):
        s = 0.0
        for k in range(ptr[j], ptr[j + 1]):
            i = idx[k]
            if i > j:
                s += val[k] * x[i]
        x[j] -= s


@njit(cache=True)
def upper_t_solve(ptr, idx, val, x):
    """x := U^-T x (forward substitution over columns of U)."""
    for j in range(x.size):
        s = 0.0
        dk = ptr[j + 1] - 1
        for k in range(ptr[j], dk):
            s += val[k] * x[idx[k]]
        x[j] = (x[j] - s) / val[dk]


@njit(cache=True)
def ratio_scan(d, xb, lbb, ubb, bvar, sigma, piv_tol, t_cap):
    best_t = t_cap
    best_row = -1
    best_var = -1
    for i in range(d.size):
        di = sigma * d[i]
        if di > piv_tol:
            num = xb[i] - lbb[i]
            if num < 0.0:
                num = 0.0
            ti = num / di
        elif di < -piv_tol:
            if ubb[i] == np.inf:
                continue
            num = ubb[i] - xb[i]
            if num < 0.0:
                num = 0.0
            ti = num / (-di)
        else:
            continue
        if ti < best_t:
            best_t = ti
            best_row = i
            best_var = bvar[i]
        elif ti == best_t and best_row >= 0 and bvar[i] < best_var:
            best_row = i
            best_var = bvar[i]
    return best_t, best_row


@njit(cache=True)
def ratio_harris(d, xb, lbb, ubb, bvar, sigma, piv_tol, t_cap, delta):
    """Two-pass ratio test: pass 1 finds the smallest ratio with bounds
    relaxed by delta, pass 2 picks the largest pivot among rows whose
    strict ratio fits under that limit.  Trades bound violations up to
    delta for far better numerical pivot quality."""
    t_rel = np.inf
    for i in range(d.size):
        di = sigma * d[i]
        if di > piv_tol:
            num = xb[i] - lbb[i]
            if num < 0.0:
                num = 0.0
            ti = (num + delta) / di
        elif di < -piv_tol:
            if ubb[i] == np.inf:
                continue
            num = ubb[i] - xb[i]
            if num < 0.0:
                num = 0.0
            ti = (num + delta) / (-di)
        else:
            continue
        if ti < t_rel:
            t_rel = ti
    limit = t_rel if t_rel < t_cap else t_cap
    if limit == np.inf:
        return np.inf, -1
    best_row = -1
    best_piv = 0.0
    best_t = np.inf
    best_var = -1
    for i in range(d.size):
        di = sigma * d[i]
        if di > piv_tol:
            num = xb[i] - lbb[i]
            if num < 0.0:
                num = 0.0
            ti = num / di
        elif di < -piv_tol:
            if ubb[i] == np.inf:
                continue
            num = ubb[i] - xb[i]
            if num < 0.0:
                num = 0.0
            ti = num / (-di)
        else:
            continue
        if ti <= limit:
            mag = di if di > 0.0 else -di
            if mag > best_piv or (mag == best_piv and best_row >= 0
                                  and bvar[i] < best_var):
                best_row = i
                best_piv = mag
                best_t = ti
                best_var = bvar[i]
    if best_row < 0:
        return t_cap, -1
    if t_cap <= best_t:
        return t_cap, -1
    return best_t, best_row
