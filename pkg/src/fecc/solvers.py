"""Direct and Schur-complement (Uzawa) solvers for the saddle-point systems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import SaddleSystem
from .condense import CondensedSystem


class SolverError(RuntimeError):
    pass


@dataclass
class SolveOptions:
    method: str = "direct"        # 'direct' or 'uzawa'
    tolerance: float = 1e-12      # relative block residual
    max_iterations: int | None = None   # default 10 * n

    def __post_init__(self):
        if not 0.0 < self.tolerance < 1.0:
            raise ValueError(f"tolerance must lie in (0, 1), got {self.tolerance}")
        if self.method not in ("direct", "uzawa"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class Solution:
    U: np.ndarray
    P: np.ndarray
    residual: float
    pressure_mean: float          # sum_M area(M) p_M
    lam: float
    method: str
    converged: bool
    iterations: int | None = None


def _blocks(system, lam: float):
    """(A, B, C_diag, Spp, Fu, Fp, kappa) for either system flavour.

    The solve symmetrizes kappa != 1 by the substitution p' = kappa p, which
    turns the pressure block into -(1/(lambda kappa)) C (- Spp).
    """
    if isinstance(system, CondensedSystem):
        return (system.At, system.Bt, system.C, system.Spp,
                system.Fu, system.Fp, system.kappa)
    if isinstance(system, SaddleSystem):
        n_p = system.n_p
        return (system.A, system.B, system.C, sp.csr_matrix((n_p, n_p)),
                system.F, np.zeros(n_p), system.kappa)
    raise TypeError(f"cannot solve a {type(system).__name__}")


def solve_saddle(system, lam: float, opts: SolveOptions | None = None) -> Solution:
    """Solve [[A, kappa B^T], [B, -(1/lambda) C - kappa Spp]] [U; P] = [Fu; Fp].

    'direct' factorizes the symmetrized indefinite block matrix sparsely;
    'uzawa' runs conjugate gradients on the pressure Schur complement using a
    sparse factorization of the positive-definite A.  Non-convergence returns
    the best iterate with ``converged=False``.
    """
    if not (np.isfinite(lam) and lam > 0.0):
        raise ValueError(f"lambda must be positive and finite, got {lam}")
    opts = opts or SolveOptions()
    A, B, C, Spp, Fu, Fp, kappa = _blocks(system, lam)
    n_u, n_p = A.shape[0], B.shape[0]
    P22 = (C / (lam * kappa) + Spp).tocsr()

    if opts.method == "direct":
        K = sp.bmat([[A, B.T], [B, -P22]], format="csc")
        rhs = np.concatenate([Fu, Fp])
        try:
            x = spla.spsolve(K, rhs)
        except RuntimeError as exc:  # singular factorization
            raise SolverError(f"sparse factorization failed: {exc}") from exc
        if not np.all(np.isfinite(x)):
            raise SolverError("sparse factorization produced non-finite values")
        U, Pp = x[:n_u], x[n_u:]
        iterations = None
    else:
        try:
            A_lu = spla.splu(A.tocsc())
        except RuntimeError as exc:
            raise SolverError(f"factorization of the displacement block failed: {exc}") from exc
        maxiter = opts.max_iterations or 10 * (n_u + n_p)

        def schur(q):
            return B @ A_lu.solve(B.T @ q) + P22 @ q

        S = spla.LinearOperator((n_p, n_p), matvec=schur)
        rhs_s = B @ A_lu.solve(Fu) - Fp
        iters = 0

        def count(_):
            nonlocal iters
            iters += 1

        Pp, info = spla.cg(S, rhs_s, rtol=max(opts.tolerance * 1e-2, 1e-15),
                           atol=0.0, maxiter=maxiter, callback=count)
        U = A_lu.solve(Fu - B.T @ Pp)
        iterations = iters
        if info > 0:
            sol = _finish(system, lam, U, Pp / kappa, C, opts.method, iterations)
            sol.converged = False
            return sol

    return _finish(system, lam, U, Pp / kappa, C, opts.method, iterations,
                   tolerance=opts.tolerance)


def _finish(system, lam, U, P, C, method, iterations, tolerance=None):
    sol = Solution(
        U=U, P=P, residual=np.inf,
        pressure_mean=float(C.diagonal() @ P),
        lam=lam, method=method, converged=True, iterations=iterations,
    )
    sol.residual = residual_check(system, sol)
    if tolerance is not None:
        sol.converged = bool(sol.residual <= tolerance)
    return sol


def residual_check(system, solution: Solution) -> float:
    """Relative block residual, recomputed from the blocks themselves.

    Uses the unsymmetrized system (kappa on the first block row); relative
    to the load norm, or absolute when the load vanishes.
    """
    A, B, C, Spp, Fu, Fp, kappa = _blocks(system, solution.lam)
    U, P = solution.U, solution.P
    r1 = A @ U + kappa * (B.T @ P) - Fu
    r2 = B @ U - (C @ P) / solution.lam - kappa * (Spp @ P) - Fp
    r = np.sqrt(np.dot(r1, r1) + np.dot(r2, r2))
    scale = np.sqrt(np.dot(Fu, Fu) + np.dot(Fp, Fp))
    return float(r / scale) if scale > 0.0 else float(r)
