"""Preconditioned conjugate gradient with a Lanczos condition-number estimate.

The PCG alpha/beta coefficients assemble the Lanczos tridiagonal of the
preconditioned operator; its extreme eigenvalues at termination give the
condition estimate reported alongside the solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = ["NonSPDError", "SolveReport", "pcg", "condition_from_tridiagonal"]


class NonSPDError(Exception):
    """Raised when PCG meets the signature of an indefinite operator."""


def _as_matvec(op):
    if callable(op) and not hasattr(op, "dot"):
        return op
    if hasattr(op, "apply"):  # e.g. a multigrid hierarchy
        return op.apply
    if hasattr(op, "dot"):
        return lambda v: np.asarray(op.dot(v)).ravel()
    raise TypeError(f"cannot interpret {type(op)!r} as a linear operator")


@dataclass
class SolveReport:
    """Outcome of one PCG solve.

    resid_history holds the l2 residual norms for iterations 0..k (length
    iterations + 1); bresid_history the preconditioned norms sqrt(r' B r)
    wherever B r was computed (auxiliary, one entry shorter on convergence).
    """

    u: np.ndarray
    iterations: int
    converged: bool
    final_relres: float
    resid_history: np.ndarray
    bresid_history: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    cond_estimate: float


def condition_from_tridiagonal(alphas, betas) -> float:
    """Condition estimate max/min eigenvalue of the PCG Lanczos tridiagonal.

    diag[0] = 1/alpha_0, diag[j] = 1/alpha_j + beta_{j-1}/alpha_{j-1},
    offdiag[j] = sqrt(beta_j)/alpha_j.
    """
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    if alphas.size < 1:
        raise ValueError("need at least one PCG step")
    if betas.size != alphas.size - 1:
        raise ValueError(
            f"expected {alphas.size - 1} betas for {alphas.size} alphas, "
            f"got {betas.size}"
        )
    diag = 1.0 / alphas
    diag[1:] += betas / alphas[:-1]
    if alphas.size == 1:
        return 1.0
    off = np.sqrt(betas) / alphas[:-1]
    ev = scipy.linalg.eigh_tridiagonal(diag, off, eigvals_only=True)
    return float(ev[-1] / ev[0])


def pcg(A, B, f, tol: float = 1e-7, maxit: int = 500, u0=None) -> SolveReport:
    """Solve A u = f by CG preconditioned with B.

    Stops when ||r_k|| / ||r_0|| < tol in the plain l2 norm, or after maxit
    iterations (the report is then flagged non-converged).  A negative
    curvature p' A p raises NonSPDError.
    """
    if not 0.0 < tol < 1.0:
        raise ValueError(f"tol must be in (0, 1), got {tol}")
    if maxit < 1:
        raise ValueError(f"maxit must be >= 1, got {maxit}")
    amat = _as_matvec(A)
    bmat = _as_matvec(B)
    f = np.asarray(f, dtype=float)

    u = np.zeros_like(f) if u0 is None else np.array(u0, dtype=float)
    r = f - amat(u) if u0 is not None else f.copy()
    rnorm0 = float(np.linalg.norm(r))
    resid_history = [rnorm0]
    bresid_history = []
    alphas: list[float] = []
    betas: list[float] = []

    if rnorm0 == 0.0:
        return SolveReport(
            u=u, iterations=0, converged=True, final_relres=0.0,
            resid_history=np.asarray(resid_history),
            bresid_history=np.asarray(bresid_history),
            alphas=np.asarray(alphas), betas=np.asarray(betas),
            cond_estimate=1.0,
        )

    z = bmat(r)
    rz = float(r @ z)
    if rz <= 0.0:
        raise NonSPDError(f"preconditioner produced r' B r = {rz}")
    bresid_history.append(np.sqrt(rz))
    p = z.copy()

    converged = False
    relres = 1.0
    for _ in range(maxit):
        Ap = amat(p)
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise NonSPDError(f"negative curvature p' A p = {pAp}")
        alpha = rz / pAp
        alphas.append(alpha)
        u += alpha * p
        r -= alpha * Ap
        rnorm = float(np.linalg.norm(r))
        resid_history.append(rnorm)
        relres = rnorm / rnorm0
        if relres < tol:
            converged = True
            break
        z = bmat(r)
        rz_new = float(r @ z)
        if rz_new <= 0.0:
            raise NonSPDError(f"preconditioner produced r' B r = {rz_new}")
        bresid_history.append(np.sqrt(rz_new))
        beta = rz_new / rz
        betas.append(beta)
        p = z + beta * p
        rz = rz_new

    iterations = len(alphas)
    # on a maxit exit the trailing beta has no Lanczos row yet
    cond = (
        condition_from_tridiagonal(alphas, betas[: iterations - 1])
        if iterations
        else 1.0
    )
    return SolveReport(
        u=u,
        iterations=iterations,
        converged=converged,
        final_relres=relres,
        resid_history=np.asarray(resid_history),
        bresid_history=np.asarray(bresid_history),
        alphas=np.asarray(alphas),
        betas=np.asarray(betas),
        cond_estimate=cond,
    )
