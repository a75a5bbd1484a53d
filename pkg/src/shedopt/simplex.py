"""Bounded-variable revised simplex over sparse data.

The engine works on the row-stacked system [a_eq; a_le] with slack columns
on inequality rows and signed artificial columns for phase 1.  The basis
inverse is held as a sparse LU factorization (SuperLU) plus a product-form
eta file that is folded back in by periodic refactorization.  Pricing is
devex by default (largest reduced cost is available as an option), reduced
costs are updated incrementally from the pivot row and refreshed at every
refactorization, the ratio test is a Harris two-pass, and a stall switches
to Bland's rule with the textbook ratio test so degenerate problems
terminate.

Verification is independent of the solve path: :func:`check_solution` and
:func:`duality_gap` recompute residuals and reduced costs from the raw
matrices only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import splu

from . import kernels
from ._sparse import vstack
from .lp import LinearProgram

AT_LB, AT_UB, BASIC = 0, 1, 2

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

_PIV_REL = 1e-9      # pivot tolerance relative to the FTRAN column
_FTRAN_BLOWUP = 1e10  # column growth that forces a refactorization


class NumericalError(RuntimeError):
    """Basis factorization or ratio test lost numerical footing."""


@dataclass(frozen=True)
class SolveOptions:
    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    max_iters: int = 0            # 0 = 200 * (rows + structural columns)
    pricing: str = "devex"        # devex | dantzig (largest reduced cost)
    refactor_every: int = 100
    stall_window: int = 50

    def __post_init__(self):
        if self.feas_tol <= 0 or self.opt_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.pricing not in ("devex", "dantzig"):
            raise ValueError(f"unknown pricing rule {self.pricing!r}")


@dataclass
class Solution:
    status: str
    x: Optional[np.ndarray]
    objective: Optional[float]
    c_system: Optional[float]
    c_lol: Optional[float]
    iterations: int
    duals_eq: Optional[np.ndarray] = None
    duals_le: Optional[np.ndarray] = None
    phase1_infeasibility: float = 0.0


@dataclass
class CheckReport:
    max_eq_residual: float
    max_le_violation: float
    max_bound_violation: float
    objective: float

    def ok(self, tol: float) -> bool:
        return max(self.max_eq_residual, self.max_le_violation,
                   self.max_bound_violation) <= tol


@dataclass
class DualityReport:
    gap: float
    max_dual_violation: float


def solve(lp: LinearProgram, options: SolveOptions | None = None) -> Solution:
    """Solve the LP; deterministic for identical inputs and options."""
    options = options or SolveOptions()
    engine = _Engine(lp, options)
    status, x, duals, iters, infeas = engine.run()
    if status != OPTIMAL or x is None:
        return Solution(status=status, x=x, objective=None, c_system=None,
                        c_lol=None, iterations=iters,
                        phase1_infeasibility=infeas)
    objective = float(lp.c @ x)
    c_system, c_lol = _split(lp, x, objective)
    return Solution(
        status=OPTIMAL, x=x, objective=objective, c_system=c_system,
        c_lol=c_lol, iterations=iters,
        duals_eq=duals[:lp.n_eq].copy(), duals_le=duals[lp.n_eq:].copy(),
    )


def _split(lp: LinearProgram, x: np.ndarray, objective: float):
    if lp.catalog is None:
        return objective, 0.0
    from .lp import cost_split
    return cost_split(lp, x)


def check_solution(lp: LinearProgram, x: np.ndarray) -> CheckReport:
    """Recompute all residuals by direct sparse multiplication; shares no
    code or state with the solve path."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (lp.n_vars,):
        raise ValueError(f"x has shape {x.shape}, expected ({lp.n_vars},)")
    eq_res = 0.0
    if lp.n_eq:
        eq_res = float(np.abs(lp.a_eq.matvec(x) - lp.b_eq).max())
    le_vio = 0.0
    if lp.n_le:
        le_vio = float(np.maximum(lp.a_le.matvec(x) - lp.b_le, 0.0).max())
    bound_vio = float(np.maximum.reduce([
        np.maximum(lp.lb - x, 0.0).max(initial=0.0),
        np.maximum(x - lp.ub, 0.0).max(initial=0.0),
    ]))
    return CheckReport(max_eq_residual=eq_res, max_le_violation=le_vio,
                       max_bound_violation=bound_vio,
                       objective=float(lp.c @ x))


def duality_gap(lp: LinearProgram, x: np.ndarray, duals_eq: np.ndarray,
                duals_le: np.ndarray) -> DualityReport:
    """Primal-dual gap and worst dual-feasibility violation for (x, y).

    Zero gap with zero violation certifies optimality of a primal-feasible x.
    """
    z = lp.c.copy()
    if lp.n_eq:
        z -= lp.a_eq.rmatvec(duals_eq)
    if lp.n_le:
        z -= lp.a_le.rmatvec(duals_le)
    viol = float(np.maximum(duals_le, 0.0).max(initial=0.0))
    inf_ub = ~np.isfinite(lp.ub)
    viol = max(viol, float(np.maximum(-z[inf_ub], 0.0).max(initial=0.0)))
    ub_capped = np.where(inf_ub, 0.0, lp.ub)
    bound_term = float((np.maximum(z, 0.0) * lp.lb
                        + np.minimum(z, 0.0) * ub_capped).sum())
    dual_obj = float(duals_eq @ lp.b_eq) + float(duals_le @ lp.b_le) \
        + bound_term
    return DualityReport(gap=float(lp.c @ x) - dual_obj,
                         max_dual_violation=viol)


class _Engine:
    """One solve; owns all mutable state."""

    def __init__(self, lp: LinearProgram, options: SolveOptions):
        if not np.all(np.isfinite(lp.lb)):
            raise ValueError("all lower bounds must be finite")
        if np.any(lp.ub < lp.lb):
            raise ValueError("ub < lb")
        self.opt = options
        self.n = lp.n_vars
        self.m_eq = lp.n_eq
        self.m_le = lp.n_le
        self.m = self.m_eq + self.m_le
        stacked = vstack(lp.a_eq, lp.a_le) if self.m_le or self.m_eq \
            else lp.a_eq
        self.indptr, self.indices, self.data = stacked.csc()
        self.col_of = np.repeat(np.arange(self.n, dtype=np.int64),
                                np.diff(self.indptr))
        self.b = np.concatenate([lp.b_eq, lp.b_le])
        n, m, m_le = self.n, self.m, self.m_le
        self.N = n + m_le + m
        self.slack0 = n
        self.art0 = n + m_le
        self.lb = np.concatenate([lp.lb, np.zeros(m_le), np.zeros(m)])
        self.ub = np.concatenate([lp.ub, np.full(m_le, np.inf), np.zeros(m)])
        self.c2 = np.concatenate([lp.c, np.zeros(m_le + m)])
        self.art_sign = np.ones(m)
        self.start_upper = lp.start_at_upper
        self.max_iters = options.max_iters or 200 * (m + n)

        self.harris_delta = options.feas_tol * max(
            1.0, float(np.abs(self.b).max(initial=0.0)))
        self.vstat = np.full(self.N, AT_LB, dtype=np.int8)
        self.basis = np.full(m, -1, dtype=np.int64)
        self.xB = np.zeros(m)
        self.lbB = np.zeros(m)
        self.ubB = np.zeros(m)
        self.lu = None
        self._lo = None
        self._up = None
        self._reset_etas()
        self.iterations = 0
        self.z = np.empty(self.N)
        self.alpha = np.empty(self.N)
        self.scores = np.empty(self.N)
        self.dvx = np.ones(self.N)

    # --- eta file -----------------------------------------------------

    def _reset_etas(self):
        self.n_eta = 0
        self.eta_ptr = np.zeros(self.opt.refactor_every + 2, dtype=np.int64)
        self.eta_piv_row = np.zeros(self.opt.refactor_every + 1,
                                    dtype=np.int64)
        self.eta_piv_val = np.zeros(self.opt.refactor_every + 1)
        self.eta_rows = np.empty(0, dtype=np.int64)
        self.eta_vals = np.empty(0)

    def _push_eta(self, r: int, w: np.ndarray):
        # Keep every nonzero: triangular solves only touch reachable rows,
        # so the pattern stays sparse and the eta represents B exactly.
        nz = np.flatnonzero(w)
        nz = nz[nz != r]
        start = self.eta_ptr[self.n_eta]
        need = start + nz.size
        if need > self.eta_rows.size:
            grow = max(need, 2 * self.eta_rows.size, 1024)
            self.eta_rows = np.resize(self.eta_rows, grow)
            self.eta_vals = np.resize(self.eta_vals, grow)
        self.eta_rows[start:need] = nz
        self.eta_vals[start:need] = w[nz]
        self.eta_piv_row[self.n_eta] = r
        self.eta_piv_val[self.n_eta] = w[r]
        self.n_eta += 1
        self.eta_ptr[self.n_eta] = need

    # --- basis handling -------------------------------------------------

    def _column(self, j: int, out: np.ndarray):
        out[:] = 0.0
        if j < self.n:
            lo, hi = self.indptr[j], self.indptr[j + 1]
            out[self.indices[lo:hi]] = self.data[lo:hi]
        elif j < self.art0:
            out[self.m_eq + (j - self.slack0)] = 1.0
        else:
            i = j - self.art0
            out[i] = self.art_sign[i]

    def _nonbasic_values(self) -> np.ndarray:
        values = np.where(self.vstat == AT_UB, self.ub, self.lb)
        values[self.vstat == BASIC] = 0.0
        return values

    def _rhs_minus_nonbasic(self) -> np.ndarray:
        rhs = self.b.copy()
        values = self._nonbasic_values()
        struct = np.flatnonzero(values[:self.n] != 0.0)
        if struct.size:
            kernels.impl.subtract_columns(self.indptr, self.indices,
                                          self.data, struct, values[struct],
                                          rhs)
        slack_vals = values[self.slack0:self.art0]
        nz = np.flatnonzero(slack_vals != 0.0)
        if nz.size:
            rhs[self.m_eq + nz] -= slack_vals[nz]
        return rhs

    def _refactorize(self):
        n, m = self.n, self.m
        jb = self.basis
        struct = jb < n
        js = np.where(struct, jb, 0)
        lens = np.where(struct, self.indptr[js + 1] - self.indptr[js], 1)
        bptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(lens, out=bptr[1:])
        total = int(bptr[m])
        brow = np.empty(total, dtype=np.int64)
        bval = np.empty(total)
        sel = np.flatnonzero(struct)
        if sel.size:
            lsel = lens[sel]
            tpos = np.repeat(bptr[sel], lsel) \
                + _segment_arange(lsel)
            spos = np.repeat(self.indptr[jb[sel]], lsel) \
                + _segment_arange(lsel)
            brow[tpos] = self.indices[spos]
            bval[tpos] = self.data[spos]
        logical = np.flatnonzero(~struct)
        if logical.size:
            jl = jb[logical]
            pos = bptr[logical]
            is_slack = jl < self.art0
            brow[pos] = np.where(is_slack, self.m_eq + (jl - self.slack0),
                                 jl - self.art0)
            bval[pos] = np.where(is_slack, 1.0,
                                 self.art_sign[np.where(is_slack, 0,
                                                        jl - self.art0)])
        matrix = csc_matrix((bval, brow, bptr), shape=(m, m))
        try:
            self.lu = splu(matrix)
        except RuntimeError as exc:
            raise NumericalError(f"basis factorization failed: {exc}") from exc
        if getattr(kernels.impl, "HAS_TRIANGULAR", False):
            lower = self.lu.L.tocsc()
            upper = self.lu.U.tocsc()
            # The solves rely on ascending row order (diagonal last in U).
            lower.sort_indices()
            upper.sort_indices()
            self._lo = (lower.indptr, lower.indices, lower.data)
            self._up = (upper.indptr, upper.indices, upper.data)
            self._pr = self.lu.perm_r
            self._pc = self.lu.perm_c
            self._pr_inv = np.argsort(self._pr)
            self._pc_inv = np.argsort(self._pc)
        else:
            self._lo = None
        self._reset_etas()
        self.xB = self._lu_solve(self._rhs_minus_nonbasic())
        self.lbB = self.lb[self.basis]
        self.ubB = self.ub[self.basis]

    def _lu_solve(self, v: np.ndarray) -> np.ndarray:
        if self._lo is None:
            return self.lu.solve(v)
        w = v[self._pr_inv]
        kernels.impl.lower_solve(*self._lo, w)
        kernels.impl.upper_solve(*self._up, w)
        return w[self._pc]

    def _lu_solve_t(self, v: np.ndarray) -> np.ndarray:
        if self._lo is None:
            return self.lu.solve(v, trans="T")
        w = v[self._pc_inv]
        kernels.impl.upper_t_solve(*self._up, w)
        kernels.impl.lower_t_solve(*self._lo, w)
        return w[self._pr]

    def _ftran(self, w: np.ndarray) -> np.ndarray:
        w = self._lu_solve(w)
        if self.n_eta:
            kernels.impl.eta_ftran(self.n_eta, self.eta_ptr, self.eta_rows,
                                   self.eta_vals, self.eta_piv_row,
                                   self.eta_piv_val, w)
        return w

    def _btran(self, w: np.ndarray) -> np.ndarray:
        if self.n_eta:
            kernels.impl.eta_btran(self.n_eta, self.eta_ptr, self.eta_rows,
                                   self.eta_vals, self.eta_piv_row,
                                   self.eta_piv_val, w)
        return self._lu_solve_t(w)

    # --- crash basis ----------------------------------------------------

    def _crash(self):
        n = self.n
        if self.start_upper is not None:
            mask = self.start_upper & np.isfinite(self.ub[:n])
            self.vstat[:n][mask] = AT_UB
        rhs = self._rhs_minus_nonbasic()

        singleton_of_row = {}
        col_nnz = np.diff(self.indptr)
        for j in np.flatnonzero(col_nnz == 1):
            if self.lb[j] == self.ub[j]:
                continue
            k = self.indptr[j]
            if abs(self.data[k]) < 1e-10:
                continue
            row = int(self.indices[k])
            if row < self.m_eq and row not in singleton_of_row:
                singleton_of_row[row] = (int(j), float(self.data[k]))

        values = self._nonbasic_values()
        for i in range(self.m_eq):
            cand = singleton_of_row.get(i)
            if cand is not None:
                j, a = cand
                v = (rhs[i] + a * values[j]) / a
                if self.lb[j] - 1e-12 <= v <= self.ub[j] + 1e-12:
                    v = min(max(v, self.lb[j]), self.ub[j])
                    self.basis[i] = j
                    self.vstat[j] = BASIC
                    self.xB[i] = v
                    continue
            sign = 1.0 if rhs[i] >= 0 else -1.0
            self.art_sign[i] = sign
            j = self.art0 + i
            self.basis[i] = j
            self.vstat[j] = BASIC
            self.xB[i] = abs(rhs[i])
            self.ub[j] = np.inf
        for k in range(self.m_le):
            i = self.m_eq + k
            if rhs[i] >= -self.opt.feas_tol:
                j = self.slack0 + k
                self.xB[i] = max(rhs[i], 0.0)
            else:
                self.art_sign[i] = -1.0
                j = self.art0 + i
                self.xB[i] = -rhs[i]
                self.ub[j] = np.inf
            self.basis[i] = j
            self.vstat[j] = BASIC
        self.lbB = self.lb[self.basis]
        self.ubB = self.ub[self.basis]

    # --- pricing ----------------------------------------------------------

    def _refresh_z(self, cost: np.ndarray) -> None:
        """Reduced costs from scratch: z = cost - columns . y."""
        y = self._btran(cost[self.basis].copy())
        z = self.z
        kernels.impl.col_dots(self.indptr, self.indices, self.data,
                              self.col_of, y, z[:self.n])
        np.subtract(cost[:self.n], z[:self.n], out=z[:self.n])
        z[self.slack0:self.art0] = cost[self.slack0:self.art0] \
            - y[self.m_eq:]
        z[self.art0:] = cost[self.art0:] - self.art_sign * y

    def _pivot_row(self, r: int) -> np.ndarray:
        """Row r of the current tableau inverse applied to all columns."""
        e = np.zeros(self.m)
        e[r] = 1.0
        v = self._btran(e)
        alpha = self.alpha
        kernels.impl.col_dots(self.indptr, self.indices, self.data,
                              self.col_of, v, alpha[:self.n])
        alpha[self.slack0:self.art0] = v[self.m_eq:]
        alpha[self.art0:] = self.art_sign * v
        return alpha

    def _price(self, fixed: np.ndarray, dual_tol: float, bland: bool,
               devex: bool) -> int:
        z = self.z
        scores = self.scores
        scores[:] = 0.0
        down = (self.vstat == AT_LB) & ~fixed & (z < -dual_tol)
        scores[down] = -z[down]
        up = (self.vstat == AT_UB) & (z > dual_tol)
        scores[up] = z[up]
        if bland:
            eligible = np.flatnonzero(scores > 0.0)
            return int(eligible[0]) if eligible.size else -1
        if devex:
            np.square(scores, out=scores)
            scores /= self.dvx
        q = int(np.argmax(scores))
        return q if scores[q] > 0.0 else -1

    # --- main loop ----------------------------------------------------

    def run(self):
        if self.m == 0:
            return self._solve_unconstrained()
        self._crash()
        self._refactorize()

        infeas = float(self.xB[self.basis >= self.art0].sum()) \
            if np.any(self.basis >= self.art0) else 0.0
        tol_infeas = self.opt.feas_tol * max(1.0, float(np.abs(self.b).max(
            initial=0.0))) * max(1.0, np.sqrt(self.m))
        if infeas > tol_infeas:
            c1 = np.zeros(self.N)
            c1[self.art0:] = 1.0
            status = self._iterate(c1, phase=1)
            if status == ITERATION_LIMIT:
                return ITERATION_LIMIT, None, None, self.iterations, np.nan
            art_rows = np.flatnonzero(self.basis >= self.art0)
            infeas = float(np.maximum(self.xB[art_rows], 0.0).sum()) \
                if art_rows.size else 0.0
            if infeas > tol_infeas:
                return INFEASIBLE, None, None, self.iterations, infeas
        # Pin artificials to zero for phase 2; basic ones stay at ~0 and
        # leave through degenerate pivots when touched.
        self.ub[self.art0:] = 0.0
        self.lbB = self.lb[self.basis]
        self.ubB = self.ub[self.basis]

        status = self._iterate(self.c2, phase=2)
        if status == UNBOUNDED:
            return UNBOUNDED, None, None, self.iterations, 0.0
        x_full = self._assemble()
        duals = self._btran(self.c2[self.basis].copy())
        x = x_full[:self.n]
        return status, x, duals, self.iterations, 0.0

    def _solve_unconstrained(self):
        x = self.lb[:self.n].copy()
        negative = self.c2[:self.n] < 0
        if np.any(negative & ~np.isfinite(self.ub[:self.n])):
            return UNBOUNDED, None, None, 0, 0.0
        x[negative] = self.ub[:self.n][negative]
        return OPTIMAL, x, np.zeros(0), 0, 0.0

    def _iterate(self, cost: np.ndarray, phase: int) -> str:
        opt = self.opt
        devex = opt.pricing == "devex"
        dual_tol = opt.opt_tol * max(1.0, float(np.abs(cost).max()))
        fixed = self.lb == self.ub
        obj = self._objective(cost)
        best_obj = obj
        stall = 0
        bland = False
        self.dvx[:] = 1.0
        self._refresh_z(cost)
        w = np.empty(self.m)
        while True:
            if self.iterations >= self.max_iters:
                return ITERATION_LIMIT
            if self.n_eta >= opt.refactor_every:
                self._refactorize()
                self._refresh_z(cost)
            if bland:
                # Bland's anti-cycling guarantee needs exact signs.
                self._refresh_z(cost)
            q = self._price(fixed, dual_tol, bland, devex)
            if q < 0:
                # Confirm with freshly computed reduced costs before
                # declaring optimality; incremental updates drift.
                self._refresh_z(cost)
                q = self._price(fixed, dual_tol, bland, devex)
                if q < 0:
                    return OPTIMAL
            zq = self.z[q]
            self._column(q, w)
            d = self._ftran(w)
            wmax = float(np.abs(d).max(initial=0.0))
            if wmax > _FTRAN_BLOWUP and self.n_eta:
                # Representation degraded; rebuild and redo this iteration.
                self._refactorize()
                self._refresh_z(cost)
                continue
            piv_tol = _PIV_REL * max(1.0, wmax)
            sigma = 1.0 if self.vstat[q] == AT_LB else -1.0
            t_cap = self.ub[q] - self.lb[q]
            if bland:
                # Textbook ratio with smallest-index ties keeps Bland's
                # termination guarantee intact.
                t, r = kernels.impl.ratio_scan(
                    d, self.xB, self.lbB, self.ubB, self.basis, sigma,
                    piv_tol, t_cap)
            else:
                t, r = kernels.impl.ratio_harris(
                    d, self.xB, self.lbB, self.ubB, self.basis, sigma,
                    piv_tol, t_cap, self.harris_delta)
            if not np.isfinite(t):
                if phase == 1:
                    raise NumericalError("phase-1 ray; pivot tolerance "
                                         "masked every blocking row")
                return UNBOUNDED
            if t != 0.0:
                self.xB -= (sigma * t) * d
            if r < 0:
                # Entering variable rides to its other bound; basis, reduced
                # costs and devex weights are unchanged.
                self.vstat[q] = AT_UB if sigma > 0 else AT_LB
            else:
                leaving = self.basis[r]
                to_lb = sigma * d[r] > 0
                self.vstat[leaving] = AT_LB if to_lb else AT_UB
                self.basis[r] = q
                self.vstat[q] = BASIC
                self.xB[r] = self.lb[q] + t if sigma > 0 else self.ub[q] - t
                self.lbB[r] = self.lb[q]
                self.ubB[r] = self.ub[q]
                alpha_q = d[r]
                alpha = self._pivot_row(r)
                if devex:
                    ref = self.dvx[q]
                    np.maximum(self.dvx, (alpha / alpha_q) ** 2 * ref,
                               out=self.dvx)
                    self.dvx[leaving] = max(ref / alpha_q ** 2, 1.0)
                    if self.dvx.max() > 1e8:
                        self.dvx[:] = 1.0
                theta = zq / alpha_q
                self.z -= theta * alpha
                self.z[leaving] = -theta
                self.z[q] = 0.0
                self._push_eta(r, d)
            obj += sigma * zq * t
            self.iterations += 1
            if obj < best_obj - opt.opt_tol * max(1.0, abs(best_obj)):
                best_obj = obj
                stall = 0
                bland = False
            else:
                stall += 1
                if stall >= opt.stall_window:
                    bland = True

    def _objective(self, cost: np.ndarray) -> float:
        values = self._nonbasic_values()
        return float(cost @ values) + float(cost[self.basis] @ self.xB)

    def _assemble(self) -> np.ndarray:
        x = self._nonbasic_values()
        x[self.basis] = self.xB
        lb, ub = self.lb, self.ub
        snap = 1e-9 * np.maximum(1.0, np.abs(self.b).max(initial=1.0))
        near_lb = np.abs(x - lb) <= snap * np.maximum(1.0, np.abs(lb))
        x[near_lb] = lb[near_lb]
        finite_ub = np.isfinite(ub)
        near_ub = finite_ub & (np.abs(x - ub)
                               <= snap * np.maximum(1.0, np.abs(ub)))
        x[near_ub] = ub[near_ub]
        return x


def _segment_arange(lens: np.ndarray) -> np.ndarray:
    """[0..lens[0]), [0..lens[1]), ... concatenated."""
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    out = np.arange(total, dtype=np.int64)
    out -= np.repeat(np.cumsum(lens) - lens, lens)
    return out
