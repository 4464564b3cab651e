"""Shared builders for the test suite, cached so acceptance criteria that
revisit the same (dim, eps, level, sweeps) cell pay for it once."""

from __future__ import annotations

import functools
import math

import numpy as np

from mgcr import mesh as mgmesh
from mgcr import multigrid, spectral


@functools.lru_cache(maxsize=None)
def cell(dim: int, eps: float, level: int, pre: int = None, post: int = None):
    """Mesh hierarchy + assembled V-cycle for one benchmark cell."""
    if pre is None:
        pre = 1 if dim == 2 else 5
    if post is None:
        post = pre
    hier = mgmesh.build_hierarchy(mgmesh.benchmark_domain(dim, eps), level)
    mg = multigrid.setup(hier, multigrid.MgConfig(pre, post))
    return hier, mg


@functools.lru_cache(maxsize=None)
def cell_spectrum(dim, eps, level, pre=None, post=None, m=1, cap=3000, iters=400):
    hier, mg = cell(dim, eps, level, pre, post)
    if mg.n <= cap:
        return spectral.spectrum_dense(mg.fine_matrix, mg, m=m, cap=cap)
    return spectral.spectrum_iterative(
        mg.fine_matrix, mg, n_small=5, seed=0, m=m, maxiter=iters
    )


def dense_ba_eigs(mg) -> np.ndarray:
    """Dense eigenvalues of the preconditioned operator (desk scale only)."""
    return spectral.spectrum_dense(mg.fine_matrix, mg, cap=4000).eigenvalues


def random_spd(rng, n: int):
    import scipy.sparse as sp

    M = rng.standard_normal((n, n))
    return sp.csr_matrix(M @ M.T + n * np.eye(n))


def simplex_volume(coords) -> float:
    coords = np.asarray(coords, dtype=float)
    d = coords.shape[1]
    return abs(np.linalg.det(coords[1:] - coords[0])) / math.factorial(d)


def quadrature_stiffness_p1(coords, kappa: float) -> np.ndarray:
    """Independent oracle: hat-function gradients from an affine fit through
    the vertices, integrated by the (exact for constants) one-point rule."""
    coords = np.asarray(coords, dtype=float)
    d = coords.shape[1]
    V = np.column_stack([np.ones(d + 1), coords])
    C = np.linalg.solve(V, np.eye(d + 1))  # column i: coefficients of hat_i
    grads = C[1:, :].T
    return kappa * simplex_volume(coords) * grads @ grads.T


def quadrature_stiffness_cr(coords, kappa: float) -> np.ndarray:
    """Same oracle for the facet-midpoint basis: affine fit through the
    facet midpoints (value 1 at one midpoint, 0 at the others)."""
    coords = np.asarray(coords, dtype=float)
    d = coords.shape[1]
    mids = np.array(
        [coords[[k for k in range(d + 1) if k != i]].mean(axis=0) for i in range(d + 1)]
    )
    V = np.column_stack([np.ones(d + 1), mids])
    C = np.linalg.solve(V, np.eye(d + 1))
    grads = C[1:, :].T
    return kappa * simplex_volume(coords) * grads @ grads.T


def locate_and_eval_p1(mesh, coefficients, point) -> float:
    """Evaluate a vertex-based piecewise-linear function at a point by brute
    point location (test oracle, independent of the transfer code)."""
    for c in range(mesh.n_cells):
        coords = mesh.vertices[mesh.cells[c]]
        T = (coords[1:] - coords[0]).T
        lam = np.linalg.solve(T, np.asarray(point, dtype=float) - coords[0])
        lam_full = np.concatenate([[1.0 - lam.sum()], lam])
        if (lam_full > -1e-9).all():
            return float(coefficients[mesh.cells[c]] @ lam_full)
    raise AssertionError(f"point {point} not found in mesh")
