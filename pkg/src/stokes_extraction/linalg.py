"""Sparse storage and iterative solvers for the assembled systems.

Matrices are scipy CSR (row offsets / column indices / values).  The SPD
solver is Jacobi-preconditioned conjugate gradients; the saddle-point
solver runs conjugate gradients on the pressure Schur complement
(Uzawa-type), with the constant-pressure kernel removed by projecting the
pressure to zero weighted mean every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SolveReport",
    "SolverConvergenceError",
    "build_from_triplets",
    "solve_spd",
    "solve_saddle",
]


@dataclass
class SolveReport:
    iterations: int
    residual_norm: float     # relative to the stopping reference
    converged: bool
    method: str
    tolerance: float = 0.0
    inner_iterations: int = 0


class SolverConvergenceError(RuntimeError):
    def __init__(self, message: str, report: SolveReport):
        super().__init__(message)
        self.report = report


def build_from_triplets(rows, cols, vals, nrows: int, ncols: int) -> sp.csr_matrix:
    """CSR matrix from COO triplets; duplicate entries are summed."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    if len(rows) and (rows.min() < 0 or rows.max() >= nrows
                      or cols.min() < 0 or cols.max() >= ncols):
        raise ValueError("triplet index out of bounds")
    A = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, ncols)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def solve_spd(A, b, tol: float = 1e-10, max_iter: Optional[int] = None,
              x0=None) -> tuple[np.ndarray, SolveReport]:
    """Jacobi-preconditioned CG for symmetric positive definite A.

    Stops when ||b - A x|| <= tol * ||b||; the returned report carries the
    final relative residual (recomputed from scratch, not the recurrence).
    Raises SolverConvergenceError when max_iter is exhausted.
    """
    b = np.asarray(b, dtype=float)
    n = len(b)
    if max_iter is None:
        max_iter = max(1000, 10 * n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True, "jacobi-cg", tol)

    diag = A.diagonal().copy()
    diag[diag <= 0.0] = 1.0
    inv_diag = 1.0 / diag

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    z = inv_diag * r
    d = z.copy()
    rz = float(r @ z)
    it = 0
    while it < max_iter:
        rnorm = np.linalg.norm(r)
        if rnorm <= tol * bnorm:
            # guard against recurrence drift before declaring victory
            r = b - A @ x
            rnorm = np.linalg.norm(r)
            if rnorm <= tol * bnorm:
                return x, SolveReport(it, rnorm / bnorm, True, "jacobi-cg", tol)
            z = inv_diag * r
            d = z.copy()
            rz = float(r @ z)
        q = A @ d
        dq = float(d @ q)
        if dq <= 0.0:
            break
        alpha = rz / dq
        x += alpha * d
        r -= alpha * q
        z = inv_diag * r
        rz_new = float(r @ z)
        d = z + (rz_new / rz) * d
        rz = rz_new
        it += 1

    rnorm = np.linalg.norm(b - A @ x)
    report = SolveReport(it, rnorm / bnorm, False, "jacobi-cg", tol)
    if rnorm <= tol * bnorm:
        report.converged = True
        return x, report
    raise SolverConvergenceError(
        f"CG did not reach tol={tol} in {it} iterations "
        f"(relative residual {report.residual_norm:.3e})", report)


def _project_zero_mean(p, weights):
    p -= (weights @ p) / weights.sum()


def solve_saddle(A, B, f, g, tol: float = 1e-8, weights=None,
                 inner_tol: Optional[float] = None,
                 max_outer: Optional[int] = None,
                 ) -> tuple[np.ndarray, np.ndarray, SolveReport]:
    """Solve [A B^T; B 0] [u; p] = [f; g] by Schur-complement CG.

    A must be SPD (Dirichlet rows already eliminated) and the system
    solvable up to the constant-pressure kernel.  The pressure iterate is
    projected to zero weighted mean (weights default to uniform, i.e.
    element areas on a uniform mesh).  On return,

        ||A u + B^T p - f|| <= tol * ||f||
        ||B u - g||         <= tol * max(1, ||g||)

    both recomputed explicitly.  Raises SolverConvergenceError otherwise.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    nu, npress = len(f), len(g)
    weights = np.ones(npress) if weights is None else np.asarray(weights, dtype=float)
    if inner_tol is None:
        inner_tol = max(1e-13, 1e-4 * tol)
    if max_outer is None:
        max_outer = max(200, npress)

    fnorm = np.linalg.norm(f)
    gref = max(1.0, np.linalg.norm(g))
    if fnorm == 0.0 and np.linalg.norm(g) == 0.0:
        return (np.zeros(nu), np.zeros(npress),
                SolveReport(0, 0.0, True, "uzawa-schur-cg", tol))

    BT = B.T.tocsr()
    inner_total = 0
    it = 0
    p = np.zeros(npress)
    u = np.zeros(nu)

    for attempt in range(3):
        def apply_Ainv(rhs):
            nonlocal inner_total
            x, rep = solve_spd(A, rhs, tol=inner_tol)
            inner_total += rep.iterations
            return x

        # Schur system: (B A^{-1} B^T) p = B A^{-1} f - g
        u = apply_Ainv(f - BT @ p)
        r = B @ u - g
        _project_zero_mean(r, weights)
        d = r.copy()
        rr = float(r @ r)
        while it < max_outer and np.sqrt(rr) > tol * gref:
            w = apply_Ainv(BT @ d)
            Sd = B @ w
            curv = float(d @ Sd)
            if curv <= 0.0:
                break  # inner inexactness broke positivity; recheck explicitly
            alpha = rr / curv
            p += alpha * d
            r -= alpha * Sd
            _project_zero_mean(p, weights)
            _project_zero_mean(r, weights)
            rr_new = float(r @ r)
            d = r + (rr_new / rr) * d
            rr = rr_new
            it += 1

        u = apply_Ainv(f - BT @ p)
        res_mom = np.linalg.norm(A @ u + BT @ p - f) / max(fnorm, 1e-300)
        res_div = np.linalg.norm(B @ u - g) / gref
        if res_mom <= tol and res_div <= tol:
            return u, p, SolveReport(it, max(res_mom, res_div), True,
                                     "uzawa-schur-cg", tol, inner_total)
        if it >= max_outer:
            break
        inner_tol = max(1e-15, inner_tol * 1e-2)

    report = SolveReport(it, max(res_mom, res_div), False,
                         "uzawa-schur-cg", tol, inner_total)
    raise SolverConvergenceError(
        f"saddle solver stalled after {it} outer iterations "
        f"(momentum {res_mom:.3e}, divergence {res_div:.3e})", report)
