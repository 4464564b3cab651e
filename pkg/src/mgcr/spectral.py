"""Spectrum of the preconditioned operator and derived condition numbers.

Two routes: a dense one that forms the operator column by column and solves
the generalized symmetric eigenproblem (the preconditioned operator is
self-adjoint in the energy inner product), and a Lanczos route run directly
in that inner product for sizes past the dense cap.  A third estimator gets
the stationary-iteration contraction factor from error propagation with a
zero right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .krylov import _as_matvec
from .multigrid import MgHierarchy, apply_B

__all__ = [
    "DenseSizeError",
    "SpectrumReport",
    "spectrum_dense",
    "spectrum_iterative",
    "estimate_rho",
    "write_eigenvalues_csv",
    "DENSE_CAP",
]

DENSE_CAP = 3000


class DenseSizeError(Exception):
    """Raised when a problem is too large for the dense route."""


@dataclass
class SpectrumReport:
    """Eigenvalue summary of a preconditioned operator.

    eigenvalues is ascending: the full spectrum from the dense route, or the
    n_small smallest Ritz values plus the largest from the Lanczos route.
    cond is lambda_max/lambda_min and cond_eff discounts the m smallest
    eigenvalues.  m0 and jump_ratio are caller-supplied metadata.
    """

    eigenvalues: np.ndarray
    m: int
    method: str
    m0: int | None = None
    jump_ratio: float | None = None
    converged: bool = True

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def cond(self) -> float:
        return self.lambda_max / self.lambda_min

    @property
    def cond_eff(self) -> float:
        return self.cond_eff_for(self.m)

    @property
    def rho(self) -> float:
        return 1.0 - self.lambda_min

    def cond_eff_for(self, m: int) -> float:
        if m < 0 or m >= self.eigenvalues.size:
            raise ValueError(f"m={m} out of range for {self.eigenvalues.size} eigenvalues")
        return self.lambda_max / float(self.eigenvalues[m])


def spectrum_dense(
    A,
    B,
    m: int = 0,
    cap: int = DENSE_CAP,
    m0: int | None = None,
    jump_ratio: float | None = None,
) -> SpectrumReport:
    """All eigenvalues of B A via the generalized symmetric eigenproblem.

    Forms B applied to the columns of A, then solves (A B A) x = lambda A x,
    which symmetrizes B A in the energy inner product.
    """
    A = sp.csr_matrix(A) if not sp.issparse(A) else A.tocsr()
    n = A.shape[0]
    if n > cap:
        raise DenseSizeError(
            f"n={n} exceeds dense cap {cap}; use spectrum_iterative"
        )
    bmat = _as_matvec(B)
    AD = A.toarray()
    BA = np.empty((n, n))
    for j in range(n):
        BA[:, j] = bmat(AD[:, j])
    ABA = AD @ BA
    ev = scipy.linalg.eigh(0.5 * (ABA + ABA.T), AD, eigvals_only=True)
    return SpectrumReport(
        eigenvalues=ev, m=m, method="dense", m0=m0, jump_ratio=jump_ratio
    )


def spectrum_iterative(
    A,
    B,
    n_small: int = 5,
    seed: int = 0,
    m: int = 0,
    maxiter: int = 300,
    tol: float = 1e-8,
    m0: int | None = None,
    jump_ratio: float | None = None,
) -> SpectrumReport:
    """Extreme eigenvalues of B A by Lanczos in the energy inner product.

    Runs with full reorthogonalization until the reported Ritz values (the
    n_small smallest and the largest) stabilize, the Krylov space is
    exhausted, or maxiter is hit.  Reported eigenvalues are the n_small
    smallest followed by the largest; deterministic for a fixed seed.
    """
    A = sp.csr_matrix(A) if not sp.issparse(A) else A.tocsr()
    n = A.shape[0]
    bmat = _as_matvec(B)
    steps = min(maxiter, n)

    rng = np.random.default_rng(seed)
    q = rng.standard_normal(n)
    z = A @ q
    q /= np.sqrt(q @ z)
    z = A @ q

    Q = np.zeros((n, steps))
    alphas: list[float] = []
    betas: list[float] = []
    ritz = None
    converged = False
    j = 0
    while j < steps:
        Q[:, j] = q
        w = bmat(z)                       # B A q_j
        alphas.append(float(w @ z))       # energy inner product <BA q_j, q_j>
        w -= alphas[-1] * q
        if j > 0:
            w -= betas[-1] * Q[:, j - 1]
        # full reorthogonalization, twice for safety
        for _ in range(2):
            w -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ (A @ w))
        z = A @ w
        beta = float(w @ z)
        beta = np.sqrt(beta) if beta > 0 else 0.0
        j += 1
        if beta <= 1e-14 * max(abs(a) for a in alphas):
            converged = True              # invariant subspace: exact spectrum
            break
        if j % 10 == 0 or j == steps:
            new = scipy.linalg.eigh_tridiagonal(
                np.asarray(alphas), np.asarray(betas), eigvals_only=True
            )
            probe = np.concatenate([new[:n_small], new[-1:]])
            if ritz is not None and ritz.size == probe.size:
                if np.max(np.abs(probe - ritz)) <= tol * max(new[-1], 1e-300):
                    converged = True
                    break
            ritz = probe
        if j < steps:
            betas.append(beta)
            q = w / beta
            z = z / beta

    ev = scipy.linalg.eigh_tridiagonal(
        np.asarray(alphas), np.asarray(betas[: len(alphas) - 1]), eigvals_only=True
    )
    if len(alphas) >= n:
        converged = True                  # complete tridiagonalization
    keep = np.concatenate([ev[: min(n_small, ev.size)], ev[-1:]])
    keep = np.unique(keep)
    return SpectrumReport(
        eigenvalues=keep, m=m, method="iterative", m0=m0,
        jump_ratio=jump_ratio, converged=converged,
    )


def estimate_rho(mg: MgHierarchy, seed: int = 0, maxit: int = 200) -> float:
    """Contraction factor of the stationary cycle from error propagation.

    Iterates the error of the zero-right-hand-side problem from a seeded
    random start, normalizing each step; returns the geometric mean of the
    last five energy-norm ratios once successive ratios stabilize, or after
    maxit steps.  The stabilization threshold is measured against 1 - ratio,
    the scale of the smallest eigenvalue, so slow rates are resolved to a
    few parts in 1e4 rather than to absolute 1e-4.
    """
    A = mg.fine_matrix
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(mg.n)
    anorm = np.sqrt(u @ (A @ u))
    if anorm == 0.0:
        return 0.0
    u /= anorm

    ratios: list[float] = []
    for _ in range(maxit):
        u = u - apply_B(mg, A @ u)
        ratio = float(np.sqrt(u @ (A @ u)))
        if ratio == 0.0:
            return 0.0
        u /= ratio
        ratios.append(ratio)
        if (
            len(ratios) >= 6
            and abs(ratios[-1] - ratios[-2]) < 1e-4 * max(1.0 - ratio, 1e-12)
        ):
            break
    tail = np.asarray(ratios[-5:])
    return float(np.exp(np.mean(np.log(tail))))


def write_eigenvalues_csv(path, eigenvalues) -> None:
    """Dump eigenvalues ascending as `index,lambda` CSV."""
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    with open(path, "w") as out:
        out.write("index,lambda\n")
        for i, lam in enumerate(ev):
            out.write(f"{i},{float(lam)!r}\n")
