"""Gauss-Seidel sweeps (and a damped Jacobi alternative) on CSR matrices.

The forward sweep updates unknowns in ascending dof order using the latest
values; the backward sweep is its transpose-order twin and realizes the
energy-inner-product adjoint for symmetric matrices.  The inner loops are
numba-compiled (no fastmath, so results are bit-reproducible).
"""

from __future__ import annotations

import numba as nb
import numpy as np
import scipy.sparse as sp

__all__ = ["SmootherError", "gs_forward", "gs_backward", "jacobi"]

_jit = nb.njit(nogil=True, cache=True)


class SmootherError(Exception):
    """Raised for matrices a pointwise smoother cannot handle."""


@_jit
def _sweep_forward(indptr, indices, data, x, b, steps):
    n = x.shape[0]
    for _ in range(steps):
        for i in range(n):
            s = 0.0
            aii = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                j = indices[k]
                if j == i:
                    aii = data[k]
                else:
                    s += data[k] * x[j]
            x[i] = (b[i] - s) / aii


@_jit
def _sweep_backward(indptr, indices, data, x, b, steps):
    n = x.shape[0]
    for _ in range(steps):
        for i in range(n - 1, -1, -1):
            s = 0.0
            aii = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                j = indices[k]
                if j == i:
                    aii = data[k]
                else:
                    s += data[k] * x[j]
            x[i] = (b[i] - s) / aii


def _checked(A: sp.spmatrix, x, b, steps: int):
    if not sp.issparse(A) or A.format != "csr":
        A = sp.csr_matrix(A)
    n, m = A.shape
    if n != m:
        raise SmootherError(f"matrix must be square, got {A.shape}")
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    if x.shape != (n,) or b.shape != (n,):
        raise SmootherError("x and b must be vectors matching the matrix size")
    if steps < 1:
        raise SmootherError(f"steps must be >= 1, got {steps}")
    diag = A.diagonal()
    if n and (diag == 0.0).any():
        raise SmootherError("zero diagonal entry")
    return A, x, b


def gs_forward(A: sp.spmatrix, x, b, steps: int = 1) -> np.ndarray:
    """Run `steps` forward Gauss-Seidel sweeps; returns the updated vector.

    Each sweep visits i = 0..n-1 in order and sets
    x_i <- x_i + (b_i - (Ax)_i) / A_ii with the freshest values of x.
    """
    A, x, b = _checked(A, x, b, steps)
    out = x.copy()
    _sweep_forward(A.indptr, A.indices, A.data, out, b, steps)
    return out


def gs_backward(A: sp.spmatrix, x, b, steps: int = 1) -> np.ndarray:
    """Run `steps` backward Gauss-Seidel sweeps (descending dof order).

    For symmetric A this is the adjoint of gs_forward in the energy inner
    product, which is what a symmetric multilevel cycle needs for its
    post-smoothing leg.
    """
    A, x, b = _checked(A, x, b, steps)
    out = x.copy()
    _sweep_backward(A.indptr, A.indices, A.data, out, b, steps)
    return out


def jacobi(A: sp.spmatrix, x, b, steps: int = 1, omega: float = 2.0 / 3.0) -> np.ndarray:
    """Damped Jacobi sweeps: x <- x + omega * D^{-1} (b - A x).

    Self-adjoint in the energy inner product, so it serves as its own
    pre/post pair.
    """
    A, x, b = _checked(A, x, b, steps)
    out = x.copy()
    dinv = omega / A.diagonal()
    for _ in range(steps):
        out += dinv * (b - A @ out)
    return out
