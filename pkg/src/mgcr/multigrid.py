"""The symmetric V-cycle preconditioner over conforming levels plus the
facet-midpoint finest level.

One application of B runs, on each level from finest to coarsest: forward
Gauss-Seidel pre-smoothing from a zero start, restriction of the residual by
the prolongation transpose, a recursive coarse correction (exact Cholesky
solve on level 0), prolongation of the correction, and backward Gauss-Seidel
post-smoothing.  With matching pre/post sweep counts B is symmetric positive
definite and B A is self-adjoint in the energy inner product with
lambda_max(BA) <= 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from . import smoothers
from .assembly import CR, P1, DofMap, assemble
from .mesh import MeshHierarchy
from .smoothers import _sweep_backward, _sweep_forward
from .transfer import galerkin_check, inclusion_cr, prolong_p1

__all__ = ["MgConfig", "MgHierarchy", "setup", "single_level", "apply_B", "mg_iterate"]

GALERKIN_RTOL = 1e-10


@dataclass(frozen=True)
class MgConfig:
    """Cycle parameters: smoother kind and pre/post sweep counts."""

    pre_sweeps: int = 1
    post_sweeps: int = 1
    smoother: str = "gauss_seidel"  # or "jacobi"
    jacobi_omega: float = 2.0 / 3.0

    def __post_init__(self):
        if self.pre_sweeps < 1 or self.post_sweeps < 1:
            raise ValueError("sweep counts must be >= 1")
        if self.smoother not in ("gauss_seidel", "jacobi"):
            raise ValueError(f"unknown smoother {self.smoother!r}")


@dataclass
class MgHierarchy:
    """Operators of one V-cycle preconditioner.

    matrices[l] is the level-l stiffness matrix (conforming for l <= L,
    facet-midpoint at l = L+1); prolongations[l] maps level l to level l+1,
    the last one being the inclusion into the facet space.  Immutable after
    setup; concurrent applications with distinct work vectors are safe.
    """

    matrices: list[sp.csr_matrix]
    prolongations: list[sp.csr_matrix]
    dofmaps: list[DofMap]
    config: MgConfig
    meshes: MeshHierarchy | None = None
    coarse_factor: tuple = field(repr=False, default=None)

    def __post_init__(self):
        if len(self.prolongations) != len(self.matrices) - 1:
            raise ValueError("need one prolongation per consecutive level pair")
        for l, P in enumerate(self.prolongations):
            if P.shape != (self.matrices[l + 1].shape[0], self.matrices[l].shape[0]):
                raise ValueError(f"prolongation {l} has shape {P.shape}")
        if self.coarse_factor is None:
            self.coarse_factor = scipy.linalg.cho_factor(
                self.matrices[0].toarray()
            )

    @property
    def n(self) -> int:
        """Number of unknowns on the finest level."""
        return self.matrices[-1].shape[0]

    @property
    def n_levels(self) -> int:
        return len(self.matrices)

    @property
    def fine_matrix(self) -> sp.csr_matrix:
        return self.matrices[-1]

    def apply(self, g: np.ndarray) -> np.ndarray:
        return apply_B(self, g)


def setup(hierarchy: MeshHierarchy, config: MgConfig = MgConfig()) -> MgHierarchy:
    """Assemble all level operators and transfers for a mesh hierarchy.

    Coarse matrices are assembled directly from their meshes, so the
    variational identity P^T A_fine P = A_coarse is a genuine cross-check;
    setup verifies it on every consecutive pair and fails loudly if violated.
    """
    matrices: list[sp.csr_matrix] = []
    dofmaps: list[DofMap] = []
    for mesh in hierarchy.levels:
        A, dm = assemble(mesh, P1)
        matrices.append(A)
        dofmaps.append(dm)
    A_cr, dm_cr = assemble(hierarchy.finest, CR)
    matrices.append(A_cr)
    dofmaps.append(dm_cr)

    prolongations: list[sp.csr_matrix] = []
    for l in range(len(hierarchy.levels) - 1):
        prolongations.append(
            prolong_p1(
                hierarchy.levels[l], dofmaps[l],
                hierarchy.levels[l + 1], dofmaps[l + 1],
            )
        )
    prolongations.append(
        inclusion_cr(hierarchy.finest, dofmaps[-2], dofmaps[-1])
    )

    for l, P in enumerate(prolongations):
        dev = galerkin_check(matrices[l + 1], P, matrices[l])
        tol = GALERKIN_RTOL * np.abs(matrices[l].data).max()
        if dev > tol:
            raise AssertionError(
                f"Galerkin identity violated at level {l}: {dev:.3e} > {tol:.3e}"
            )

    return MgHierarchy(
        matrices=matrices,
        prolongations=prolongations,
        dofmaps=dofmaps,
        config=config,
        meshes=hierarchy,
    )


def single_level(A: sp.spmatrix, config: MgConfig = MgConfig()) -> MgHierarchy:
    """Degenerate one-level hierarchy: B is the exact inverse of A."""
    return MgHierarchy(
        matrices=[sp.csr_matrix(A)], prolongations=[], dofmaps=[], config=config
    )


def _smooth(mg: MgHierarchy, l: int, x: np.ndarray, b: np.ndarray, forward: bool):
    A = mg.matrices[l]
    cfg = mg.config
    if cfg.smoother == "jacobi":
        steps = cfg.pre_sweeps if forward else cfg.post_sweeps
        x[:] = smoothers.jacobi(A, x, b, steps, cfg.jacobi_omega)
    elif forward:
        _sweep_forward(A.indptr, A.indices, A.data, x, b, cfg.pre_sweeps)
    else:
        _sweep_backward(A.indptr, A.indices, A.data, x, b, cfg.post_sweeps)


def _vcycle(mg: MgHierarchy, l: int, g: np.ndarray) -> np.ndarray:
    if l == 0:
        return scipy.linalg.cho_solve(mg.coarse_factor, g)
    A = mg.matrices[l]
    P = mg.prolongations[l - 1]
    x = np.zeros_like(g)
    _smooth(mg, l, x, g, forward=True)
    r = g - A @ x
    x += P @ _vcycle(mg, l - 1, P.T @ r)
    _smooth(mg, l, x, g, forward=False)
    return x


def apply_B(mg: MgHierarchy, g: np.ndarray) -> np.ndarray:
    """One V-cycle applied to the vector g on the finest level."""
    g = np.asarray(g, dtype=float)
    if g.shape != (mg.n,):
        raise ValueError(f"expected vector of length {mg.n}, got shape {g.shape}")
    return _vcycle(mg, mg.n_levels - 1, g)


def mg_iterate(
    mg: MgHierarchy,
    f: np.ndarray,
    u0: np.ndarray,
    iterations: int,
    u_exact: np.ndarray | None = None,
):
    """Stationary iteration u <- u + B(f - A u).

    Returns (u, history); history holds the energy norm of the error after
    0..iterations steps when u_exact is given, otherwise it is empty.
    """
    A = mg.fine_matrix
    u = np.array(u0, dtype=float)
    history = []

    def record():
        if u_exact is not None:
            e = u_exact - u
            history.append(float(np.sqrt(e @ (A @ e))))

    record()
    for _ in range(iterations):
        u += apply_B(mg, f - A @ u)
        record()
    return u, np.asarray(history)
