"""Stiffness and load assembly for vertex (P1) and facet-midpoint (CR) elements.

Both element families are piecewise linear; the facet-midpoint basis function
on the facet opposite local vertex i is ``1 - d * lambda_i``, so its local
stiffness is ``d**2`` times the vertex one with the same index layout.
Homogeneous Dirichlet unknowns are eliminated at assembly time, which keeps
every assembled matrix symmetric positive definite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp

from .mesh import MeshLevel

__all__ = [
    "DofMap",
    "DegenerateElementError",
    "local_stiffness_p1",
    "local_stiffness_cr",
    "assemble",
    "assemble_load",
    "write_matrix_market",
]

P1 = "P1"
CR = "CR"


class DegenerateElementError(Exception):
    """Raised for cells with (numerically) zero volume."""


@dataclass(frozen=True)
class DofMap:
    """Free-unknown numbering for one space on one mesh.

    free_dofs lists the interior entity ids (vertices for P1, facets for CR)
    in ascending order; index_of maps entity id -> dof index, with -1 marking
    constrained (boundary) entities.
    """

    kind: str
    level: int
    free_dofs: np.ndarray
    index_of: np.ndarray

    def __post_init__(self):
        self.free_dofs.setflags(write=False)
        self.index_of.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.free_dofs.shape[0])


def _dofmap(mesh: MeshLevel, kind: str) -> DofMap:
    if kind == P1:
        constrained = mesh.boundary_vertex
    elif kind == CR:
        constrained = mesh.boundary_facet
    else:
        raise ValueError(f"unknown space kind {kind!r}")
    free = np.nonzero(~constrained)[0].astype(np.int64)
    index_of = np.full(constrained.shape[0], -1, dtype=np.int64)
    index_of[free] = np.arange(free.shape[0])
    return DofMap(kind=kind, level=mesh.level, free_dofs=free, index_of=index_of)


def _gradients(coords: np.ndarray):
    """Barycentric gradients and volume of one simplex.

    Returns (G, vol) where G[i] is the gradient of the i-th barycentric
    coordinate; rows of G sum to zero.
    """
    coords = np.asarray(coords, dtype=float)
    d = coords.shape[1]
    M = coords[1:] - coords[0]
    det = np.linalg.det(M)
    vol = abs(det) / math.factorial(d)
    scale = np.max(np.abs(coords)) or 1.0
    if vol <= 1e-14 * scale**d:
        raise DegenerateElementError(f"degenerate simplex, volume {vol}")
    # x = p0 + M^T lambda, so the gradient of lambda_i is the i-th column
    # of inv(M)
    G = np.empty((d + 1, d))
    G[1:] = np.linalg.inv(M).T
    G[0] = -G[1:].sum(axis=0)
    return G, vol


def local_stiffness_p1(coords, kappa_t: float) -> np.ndarray:
    """Element stiffness for the vertex basis on one simplex.

    K_ij = kappa_t * |T| * grad(lambda_i) . grad(lambda_j); symmetric with
    zero row sums.
    """
    if kappa_t <= 0.0:
        raise ValueError(f"kappa must be positive, got {kappa_t}")
    G, vol = _gradients(coords)
    return kappa_t * vol * (G @ G.T)


def local_stiffness_cr(coords, kappa_t: float) -> np.ndarray:
    """Element stiffness for the facet-midpoint basis on one simplex.

    Index i refers to the facet opposite local vertex i, whose basis function
    is 1 - d*lambda_i; hence K_cr = d**2 * K_p1 entrywise.
    """
    if kappa_t <= 0.0:
        raise ValueError(f"kappa must be positive, got {kappa_t}")
    G, vol = _gradients(coords)
    d = coords.shape[1] if hasattr(coords, "shape") else len(coords[0])
    Gcr = -d * G
    return kappa_t * vol * (Gcr @ Gcr.T)


def _batched_local(mesh: MeshLevel, kind: str) -> np.ndarray:
    """Local stiffness matrices for all cells at once, shape (nc, d+1, d+1)."""
    d = mesh.dim
    coords = mesh.vertices[mesh.cells]             # (nc, d+1, d)
    M = coords[:, 1:, :] - coords[:, :1, :]        # (nc, d, d)
    det = np.linalg.det(M)
    vol = np.abs(det) / math.factorial(d)
    if np.any(vol <= 0.0):
        raise DegenerateElementError("degenerate cell in mesh")
    G = np.empty((mesh.n_cells, d + 1, d))
    G[:, 1:, :] = np.transpose(np.linalg.inv(M), (0, 2, 1))
    G[:, 0, :] = -G[:, 1:, :].sum(axis=1)
    if kind == CR:
        G = -d * G
    w = (mesh.kappa * vol)[:, None, None]
    return w * (G @ np.transpose(G, (0, 2, 1)))


def assemble(mesh: MeshLevel, kind: str) -> tuple[sp.csr_matrix, DofMap]:
    """Assemble the stiffness matrix on the free unknowns of one mesh.

    Returns the CSR matrix (symmetric positive definite) and the DofMap that
    fixes the unknown ordering, which in turn fixes the smoother sweep order.
    """
    dofmap = _dofmap(mesh, kind)
    entities = mesh.cells if kind == P1 else mesh.cell_facets
    local = _batched_local(mesh, kind)

    d1 = mesh.dim + 1
    dofs = dofmap.index_of[entities]               # (nc, d+1), -1 = constrained
    rows = np.repeat(dofs, d1, axis=1).ravel()
    cols = np.tile(dofs, (1, d1)).ravel()
    vals = local.ravel()
    keep = (rows >= 0) & (cols >= 0)

    n = dofmap.n
    A = sp.coo_matrix(
        (vals[keep], (rows[keep], cols[keep])), shape=(n, n)
    ).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A, dofmap


def assemble_load(mesh: MeshLevel, kind: str, f) -> np.ndarray:
    """Load vector by the barycenter rule, exact for cellwise-constant f.

    Every local basis function (vertex or facet-midpoint) equals 1/(d+1) at
    the cell barycenter, so each cell adds |T| * f(barycenter) / (d+1) to its
    d+1 incident free unknowns.
    """
    dofmap = _dofmap(mesh, kind)
    entities = mesh.cells if kind == P1 else mesh.cell_facets
    vols = mesh.cell_volumes()
    fvals = np.array([float(f(x)) for x in mesh.barycenters()])
    weights = vols * fvals / (mesh.dim + 1)

    b = np.zeros(dofmap.n)
    dofs = dofmap.index_of[entities]
    for j in range(mesh.dim + 1):
        col = dofs[:, j]
        keep = col >= 0
        np.add.at(b, col[keep], weights[keep])
    return b


def write_matrix_market(path, A: sp.spmatrix) -> None:
    """Dump a symmetric sparse matrix in Matrix Market coordinate format."""
    scipy.io.mmwrite(path, sp.coo_matrix(A), symmetry="symmetric")
