"""Inter-level transfer operators.

Between consecutive conforming levels the prolongation is nodal
interpolation on the structured grid: a fine vertex either coincides with a
coarse vertex (entry 1) or is the midpoint of a coarse mesh edge (entries 1/2
at its endpoints).  From the finest conforming level into the facet-midpoint
space the prolongation is the natural inclusion, whose nonzero entries all
equal 1/d.  Restrictions are the transposes.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .assembly import CR, P1, DofMap
from .mesh import MeshLevel

__all__ = ["prolong_p1", "inclusion_cr", "galerkin_check"]


def _vertex_indices(mesh: MeshLevel) -> np.ndarray:
    """Grid index (ix, iy[, iz]) of every vertex, recovered arithmetically."""
    m = mesh.n_per_axis + 1
    vid = np.arange(mesh.n_vertices)
    out = np.empty((mesh.n_vertices, mesh.dim), dtype=np.int64)
    out[:, 0] = vid % m
    out[:, 1] = (vid // m) % m
    if mesh.dim == 3:
        out[:, 2] = vid // (m * m)
    return out


def _vertex_id(mesh: MeshLevel, idx: np.ndarray) -> np.ndarray:
    m = mesh.n_per_axis + 1
    vid = idx[:, 0] + m * idx[:, 1]
    if mesh.dim == 3:
        vid = vid + m * m * idx[:, 2]
    return vid


def prolong_p1(
    coarse: MeshLevel,
    coarse_dofs: DofMap,
    fine: MeshLevel,
    fine_dofs: DofMap,
) -> sp.csr_matrix:
    """Prolongation matrix between the free vertex unknowns of nested levels.

    Entries referencing constrained (boundary) coarse vertices are dropped,
    i.e. coarse functions are extended by zero, consistent with homogeneous
    Dirichlet data.
    """
    if coarse_dofs.kind != P1 or fine_dofs.kind != P1:
        raise ValueError("prolong_p1 expects P1 dof maps")
    if fine.n_per_axis != 2 * coarse.n_per_axis or fine.dim != coarse.dim:
        raise ValueError(
            f"levels are not a nested refinement pair: n={coarse.n_per_axis} "
            f"-> n={fine.n_per_axis}"
        )

    idx = _vertex_indices(fine)[fine_dofs.free_dofs]   # fine grid indices
    odd = idx % 2 == 1

    rows, cols, vals = [], [], []
    coinc = ~odd.any(axis=1)
    # coincident fine vertices: same grid point on the coarse grid
    cvid = _vertex_id(coarse, idx[coinc] // 2)
    cdof = coarse_dofs.index_of[cvid]
    r = np.nonzero(coinc)[0][cdof >= 0]
    rows.append(r)
    cols.append(cdof[cdof >= 0])
    vals.append(np.ones(r.shape[0]))

    # remaining fine vertices are midpoints of the coarse edge between
    # (idx - odd)/2 and (idx + odd)/2 (a grid edge, an in-square diagonal, or
    # a Kuhn tetrahedron edge, depending on the odd-parity pattern)
    mid = np.nonzero(odd.any(axis=1))[0]
    lo = (idx[mid] - odd[mid]) // 2
    hi = (idx[mid] + odd[mid]) // 2
    for end in (lo, hi):
        cdof = coarse_dofs.index_of[_vertex_id(coarse, end)]
        keep = cdof >= 0
        rows.append(mid[keep])
        cols.append(cdof[keep])
        vals.append(np.full(int(keep.sum()), 0.5))

    P = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(fine_dofs.n, coarse_dofs.n),
    ).tocsr()
    P.sort_indices()
    return P


def inclusion_cr(
    mesh: MeshLevel, p1_dofs: DofMap, cr_dofs: DofMap
) -> sp.csr_matrix:
    """Inclusion of the conforming space into the facet-midpoint space.

    Row e holds 1/d at each free vertex of facet e: the facet-midpoint value
    of a piecewise-linear function is the mean of its vertex values.
    """
    if p1_dofs.kind != P1 or cr_dofs.kind != CR:
        raise ValueError("inclusion_cr expects a P1 and a CR dof map")
    if (
        p1_dofs.index_of.shape[0] != mesh.n_vertices
        or cr_dofs.index_of.shape[0] != mesh.n_facets
        or p1_dofs.level != cr_dofs.level
    ):
        raise ValueError("dof maps do not belong to this triangulation")

    d = mesh.dim
    facet_vertices = mesh.facets[cr_dofs.free_dofs]     # (n_cr, d)
    rows = np.repeat(np.arange(cr_dofs.n), d)
    cols = p1_dofs.index_of[facet_vertices.ravel()]
    keep = cols >= 0
    P = sp.coo_matrix(
        (np.full(int(keep.sum()), 1.0 / d), (rows[keep], cols[keep])),
        shape=(cr_dofs.n, p1_dofs.n),
    ).tocsr()
    P.sort_indices()
    return P


def galerkin_check(A_fine: sp.spmatrix, P: sp.spmatrix, A_coarse: sp.spmatrix) -> float:
    """Max-norm deviation ||P^T A_fine P - A_coarse||_max.

    Zero (to roundoff) whenever the coarse space is a subspace of the fine
    one and both matrices discretize the same bilinear form.
    """
    if P.shape != (A_fine.shape[0], A_coarse.shape[0]):
        raise ValueError(
            f"dimension mismatch: A_fine {A_fine.shape}, P {P.shape}, "
            f"A_coarse {A_coarse.shape}"
        )
    D = (P.T @ A_fine @ P - A_coarse).tocoo()
    return float(np.abs(D.data).max()) if D.nnz else 0.0
