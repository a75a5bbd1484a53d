"""Vectorized pure-numpy implementations of the simplex hot kernels.

Contracts match ``kernels._numba`` exactly; see that module for the loop
formulations.  Eta transforms keep a small Python loop over the eta file
(bounded by the refactorization interval) with vectorized bodies.
"""
from __future__ import annotations

import numpy as np

# No vectorized sparse triangular solve exists in plain numpy; this backend
# keeps SuperLU's solve for FTRAN/BTRAN instead of extracted triangles.
HAS_TRIANGULAR = False


def col_dots(indptr, indices, data, col_of, y, out):
    """out[j] = sum_k data[k] * y[indices[k]] over column j's entries."""
    n = out.size
    if data.size == 0:
        out[:] = 0.0
        return
    out[:] = np.bincount(col_of, weights=data * y[indices], minlength=n)[:n]


def subtract_columns(indptr, indices, data, cols, vals, target):
    """target -= sum_c vals[c] * column(cols[c]), scattered by row index."""
    if cols.size == 0:
        return
    lens = indptr[cols + 1] - indptr[cols]
    total = int(lens.sum())
    if total == 0:
        return
    starts = np.repeat(indptr[cols], lens)
    cum = np.cumsum(lens) - lens
    flat = starts + (np.arange(total) - np.repeat(cum, lens))
    contrib = data[flat] * np.repeat(vals, lens)
    np.subtract.at(target, indices[flat], contrib)


def eta_ftran(n_eta, eta_ptr, eta_rows, eta_vals, eta_piv_row, eta_piv_val, w):
    """Apply inverse column-eta transforms 0..n_eta-1 in order to w."""
    for i in range(n_eta):
        r = eta_piv_row[i]
        t = w[r] / eta_piv_val[i]
        lo, hi = eta_ptr[i], eta_ptr[i + 1]
        if t != 0.0 and hi > lo:
            w[eta_rows[lo:hi]] -= eta_vals[lo:hi] * t
        w[r] = t


def eta_btran(n_eta, eta_ptr, eta_rows, eta_vals, eta_piv_row, eta_piv_val, w):
    """Apply inverse-transpose eta transforms n_eta-1..0 to w."""
    for i in range(n_eta - 1, -1, -1):
        r = eta_piv_row[i]
        lo, hi = eta_ptr[i], eta_ptr[i + 1]
        s = float(eta_vals[lo:hi] @ w[eta_rows[lo:hi]]) if hi > lo else 0.0
        w[r] = (w[r] - s) / eta_piv_val[i]


def _strict_ratios(d, xb, lbb, ubb, sigma, piv_tol):
    di = sigma * d
    ratios = np.full(d.size, np.inf)
    dec = di > piv_tol
    if dec.any():
        ratios[dec] = np.maximum(xb[dec] - lbb[dec], 0.0) / di[dec]
    inc = (di < -piv_tol) & np.isfinite(ubb)
    if inc.any():
        ratios[inc] = np.maximum(ubb[inc] - xb[inc], 0.0) / (-di[inc])
    return di, ratios


def ratio_scan(d, xb, lbb, ubb, bvar, sigma, piv_tol, t_cap):
    """Bounded-variable ratio test.

    Returns (step, blocking row): row -1 means the entering variable's own
    bound (t_cap) binds first.  Ties between rows break on the smallest
    basic variable index, matching the numba loop.
    """
    _, ratios = _strict_ratios(d, xb, lbb, ubb, sigma, piv_tol)
    if ratios.size == 0:
        return t_cap, -1
    rmin = ratios.min()
    if rmin >= t_cap:
        return t_cap, -1
    candidates = np.flatnonzero(ratios == rmin)
    row = int(candidates[np.argmin(bvar[candidates])])
    return float(rmin), row


def ratio_harris(d, xb, lbb, ubb, bvar, sigma, piv_tol, t_cap, delta):
    """Two-pass ratio test: pass 1 finds the smallest ratio with bounds
    relaxed by delta, pass 2 picks the largest pivot among rows whose
    strict ratio fits under that limit.  Matches the numba backend."""
    di, ratios = _strict_ratios(d, xb, lbb, ubb, sigma, piv_tol)
    blockers = np.isfinite(ratios)
    if not blockers.any():
        if not np.isfinite(t_cap):
            return np.inf, -1
        return t_cap, -1
    relaxed = ratios + delta / np.maximum(np.abs(di), 1e-300)
    t_rel = relaxed[blockers].min()
    limit = min(t_rel, t_cap)
    if limit == np.inf:
        return np.inf, -1
    fit = blockers & (ratios <= limit)
    if not fit.any():
        return t_cap, -1
    mags = np.where(fit, np.abs(di), -1.0)
    best_piv = mags.max()
    candidates = np.flatnonzero(mags == best_piv)
    row = int(candidates[np.argmin(bvar[candidates])])
    best_t = float(ratios[row])
    if t_cap <= best_t:
        return t_cap, -1
    return best_t, row
