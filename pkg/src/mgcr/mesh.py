"""Structured simplicial meshes on box domains with piecewise-constant coefficients.

Meshes are built on an n-per-axis grid: in 2D every grid square is cut into
two triangles along the same diagonal, in 3D every grid cube is cut into six
tetrahedra by the Kuhn (Freudenthal) pattern.  Both patterns are self-similar
under doubling of n, so the grids at resolutions n0 * 2**l form a nested
hierarchy without any parent bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

__all__ = [
    "Box",
    "DomainSpec",
    "MeshLevel",
    "MeshHierarchy",
    "MeshError",
    "InterfaceResolutionError",
    "build_structured",
    "build_hierarchy",
    "floating_subdomain_count",
    "jump_ratio",
    "benchmark_domain_2d",
    "benchmark_domain_3d",
    "benchmark_domain",
    "write_mesh",
]

_ALIGN_TOL = 1e-12


class MeshError(Exception):
    """Raised when a mesh cannot be built or violates a structural invariant."""


class InterfaceResolutionError(MeshError):
    """Raised when a coefficient interface does not lie on grid lines."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by per-axis (lo, hi) coordinates."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi must have equal length")
        if any(l >= h for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"degenerate box {self.lo} .. {self.hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, point) -> bool:
        return all(l <= x <= h for l, x, h in zip(self.lo, point, self.hi))

    def inside(self, other: "Box") -> bool:
        return all(
            ol <= l and h <= oh
            for l, h, ol, oh in zip(self.lo, self.hi, other.lo, other.hi)
        )


@dataclass(frozen=True)
class DomainSpec:
    """Box domain with axis-aligned unit-coefficient inclusions on an eps background.

    kappa = 1 inside every inclusion box and kappa = epsilon elsewhere, so the
    coefficient contrast is 1/epsilon for epsilon <= 1.
    """

    dim: int
    box: Box
    inclusions: tuple[Box, ...]
    epsilon: float

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.box.dim != self.dim:
            raise ValueError("box dimension does not match dim")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        for inc in self.inclusions:
            if inc.dim != self.dim:
                raise ValueError("inclusion dimension does not match dim")
            if not inc.inside(self.box):
                raise ValueError(f"inclusion {inc} not inside domain box")

    def kappa_at(self, point) -> tuple[float, int]:
        """Coefficient value and subdomain id (0 = background) at a point."""
        for i, inc in enumerate(self.inclusions):
            if inc.contains(point):
                return 1.0, i + 1
        return self.epsilon, 0


def benchmark_domain_2d(epsilon: float) -> DomainSpec:
    """[-1,1]^2 with two unit-coefficient squares meeting at the origin."""
    return DomainSpec(
        dim=2,
        box=Box((-1.0, -1.0), (1.0, 1.0)),
        inclusions=(
            Box((-0.5, -0.5), (0.0, 0.0)),
            Box((0.0, 0.0), (0.5, 0.5)),
        ),
        epsilon=epsilon,
    )


def benchmark_domain_3d(epsilon: float) -> DomainSpec:
    """Unit cube with two unit-coefficient cubes meeting at (0.5, 0.5, 0.5)."""
    return DomainSpec(
        dim=3,
        box=Box((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)),
        inclusions=(
            Box((0.25, 0.25, 0.25), (0.5, 0.5, 0.5)),
            Box((0.5, 0.5, 0.5), (0.75, 0.75, 0.75)),
        ),
        epsilon=epsilon,
    )


def benchmark_domain(dim: int, epsilon: float) -> DomainSpec:
    if dim == 2:
        return benchmark_domain_2d(epsilon)
    if dim == 3:
        return benchmark_domain_3d(epsilon)
    raise ValueError(f"dim must be 2 or 3, got {dim}")


#: Coarsest per-axis resolution that resolves the benchmark interfaces
#: (2D: grid spacing 2^-1 on [-1,1]^2; 3D: 2^-2 on the unit cube).
BENCHMARK_N0 = 4


@dataclass(frozen=True)
class MeshLevel:
    """One simplicial mesh of the hierarchy.

    Arrays are immutable (read-only numpy views).  Facets are the sorted
    d-tuples of vertex indices (edges in 2D, faces in 3D), numbered in
    lexicographic order of those tuples; ``cell_facets[c, i]`` is the facet of
    cell ``c`` opposite its local vertex ``i``.
    """

    dim: int
    level: int
    h: float
    n_per_axis: int
    vertices: np.ndarray        # (nv, dim) float
    cells: np.ndarray           # (nc, dim+1) int
    facets: np.ndarray          # (nf, dim) int, each row sorted
    cell_facets: np.ndarray     # (nc, dim+1) int
    boundary_vertex: np.ndarray  # (nv,) bool
    boundary_facet: np.ndarray   # (nf,) bool
    kappa: np.ndarray            # (nc,) float, positive
    subdomain_id: np.ndarray     # (nc,) int, 0 = background

    def __post_init__(self):
        for name in (
            "vertices", "cells", "facets", "cell_facets",
            "boundary_vertex", "boundary_facet", "kappa", "subdomain_id",
        ):
            getattr(self, name).setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def n_facets(self) -> int:
        return self.facets.shape[0]

    def cell_volumes(self) -> np.ndarray:
        """Signed volumes of all cells (positive by construction)."""
        p0 = self.vertices[self.cells[:, 0]]
        edges = self.vertices[self.cells[:, 1:]] - p0[:, None, :]
        return np.linalg.det(edges) / math.factorial(self.dim)

    def barycenters(self) -> np.ndarray:
        return self.vertices[self.cells].mean(axis=1)


@dataclass(frozen=True)
class MeshHierarchy:
    """Nested meshes for levels 0..L; the finest mesh carries both the
    conforming vertex unknowns and the nonconforming facet unknowns."""

    spec: DomainSpec
    levels: tuple[MeshLevel, ...] = field(default_factory=tuple)

    @property
    def depth(self) -> int:
        """Number of refinements L (levels are 0..L)."""
        return len(self.levels) - 1

    @property
    def finest(self) -> MeshLevel:
        return self.levels[-1]

    def truncated(self, max_level: int) -> "MeshHierarchy":
        """Sub-hierarchy keeping levels 0..max_level (shared, not copied)."""
        if not 0 <= max_level <= self.depth:
            raise ValueError(f"max_level {max_level} out of range 0..{self.depth}")
        return MeshHierarchy(spec=self.spec, levels=self.levels[: max_level + 1])


def _grid_vertices(spec: DomainSpec, n: int) -> np.ndarray:
    # vertex id = ix + (n+1)*(iy + (n+1)*iz): x fastest, z slowest
    m = n + 1
    axes = [
        np.linspace(spec.box.lo[k], spec.box.hi[k], m)
        for k in range(spec.dim)
    ]
    if spec.dim == 2:
        return np.column_stack([np.tile(axes[0], m), np.repeat(axes[1], m)])
    return np.column_stack(
        [
            np.tile(axes[0], m * m),
            np.tile(np.repeat(axes[1], m), m),
            np.repeat(axes[2], m * m),
        ]
    )


def _cells_2d(n: int) -> np.ndarray:
    """Two triangles per square along the lo-lo -> hi-hi diagonal."""
    ix = np.tile(np.arange(n), n)
    iy = np.repeat(np.arange(n), n)
    v00 = ix + (n + 1) * iy
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    cells = np.empty((2 * n * n, 3), dtype=np.int64)
    cells[0::2] = lower
    cells[1::2] = upper
    return cells


# Kuhn split of the unit cube: one tetrahedron per axis permutation, walking
# from corner (0,0,0) to (1,1,1).  Odd permutations get their last two
# vertices swapped so every tetrahedron is positively oriented.
def _kuhn_tets() -> np.ndarray:
    corners = {}

    def cid(c):
        return c[0] + 2 * c[1] + 4 * c[2]

    tets = []
    for perm in sorted(permutations(range(3))):
        walk = [(0, 0, 0)]
        for axis in perm:
            prev = list(walk[-1])
            prev[axis] = 1
            walk.append(tuple(prev))
        sign = 1
        p = list(perm)
        for i in range(3):
            for j in range(i + 1, 3):
                if p[i] > p[j]:
                    sign = -sign
        verts = [cid(c) for c in walk]
        if sign < 0:
            verts[2], verts[3] = verts[3], verts[2]
        tets.append(verts)
    return np.asarray(tets, dtype=np.int64)


_KUHN_TETS = _kuhn_tets()


def _cells_3d(n: int) -> np.ndarray:
    m = n + 1
    ix = np.tile(np.arange(n), n * n)
    iy = np.tile(np.repeat(np.arange(n), n), n)
    iz = np.repeat(np.arange(n), n * n)
    base = ix + m * (iy + m * iz)
    # cube corner offsets in cid order (cid = dx + 2*dy + 4*dz)
    offsets = np.array(
        [dx + m * (dy + m * dz) for dz in (0, 1) for dy in (0, 1) for dx in (0, 1)]
    )
    corner_ids = base[:, None] + offsets[None, :]
    cells = corner_ids[:, _KUHN_TETS]  # (n^3, 6, 4)
    return cells.reshape(-1, 4)


def _extract_facets(cells: np.ndarray, dim: int):
    nc = cells.shape[0]
    local = [[j for j in range(dim + 1) if j != i] for i in range(dim + 1)]
    per_cell = np.sort(cells[:, local], axis=2)  # (nc, d+1, d)
    flat = per_cell.reshape(-1, dim)
    facets, inverse, counts = np.unique(
        flat, axis=0, return_inverse=True, return_counts=True
    )
    if counts.max() > 2:
        raise MeshError("facet shared by more than two cells")
    cell_facets = inverse.reshape(nc, dim + 1)
    boundary_facet = counts == 1
    return facets, cell_facets, boundary_facet


def build_structured(spec: DomainSpec, n_per_axis: int, level: int = 0) -> MeshLevel:
    """Build one structured simplicial mesh at resolution n_per_axis.

    Parameters
    ----------
    spec : DomainSpec
        Domain geometry and coefficient layout.
    n_per_axis : int
        Number of grid cells per axis (>= 1).
    level : int
        Level index stamped on the mesh (bookkeeping only).

    Raises
    ------
    InterfaceResolutionError
        If some inclusion boundary does not lie on the grid lines.
    ValueError
        If n_per_axis < 1.
    """
    if n_per_axis < 1:
        raise ValueError(f"n_per_axis must be >= 1, got {n_per_axis}")
    n = int(n_per_axis)

    spacing = [
        (spec.box.hi[k] - spec.box.lo[k]) / n for k in range(spec.dim)
    ]
    for inc in spec.inclusions:
        for k in range(spec.dim):
            for coord in (inc.lo[k], inc.hi[k]):
                steps = (coord - spec.box.lo[k]) / spacing[k]
                if abs(steps - round(steps)) > _ALIGN_TOL * max(1.0, abs(steps)):
                    raise InterfaceResolutionError(
                        f"inclusion boundary {coord} on axis {k} is not on a "
                        f"grid line at n_per_axis={n}"
                    )

    vertices = _grid_vertices(spec, n)
    cells = _cells_2d(n) if spec.dim == 2 else _cells_3d(n)
    facets, cell_facets, boundary_facet = _extract_facets(cells, spec.dim)

    boundary_vertex = np.zeros(vertices.shape[0], dtype=bool)
    boundary_vertex[facets[boundary_facet].ravel()] = True

    barycenters = vertices[cells].mean(axis=1)
    kappa = np.empty(cells.shape[0])
    subdomain = np.empty(cells.shape[0], dtype=np.int64)
    for c, bary in enumerate(barycenters):
        kappa[c], subdomain[c] = spec.kappa_at(bary)

    mesh = MeshLevel(
        dim=spec.dim,
        level=level,
        h=max(spacing),
        n_per_axis=n,
        vertices=vertices,
        cells=cells,
        facets=facets,
        cell_facets=cell_facets,
        boundary_vertex=boundary_vertex,
        boundary_facet=boundary_facet,
        kappa=kappa,
        subdomain_id=subdomain,
    )
    if np.any(mesh.cell_volumes() <= 0.0):
        raise MeshError("non-positive cell volume in structured build")
    return mesh


def build_hierarchy(spec: DomainSpec, levels: int, n0: int = BENCHMARK_N0) -> MeshHierarchy:
    """Build meshes for levels 0..levels at resolutions n0 * 2**l.

    The finest mesh (index ``levels``) hosts both the conforming space of the
    last coarse level and the nonconforming facet space.
    """
    if levels < 0:
        raise ValueError(f"levels must be >= 0, got {levels}")
    meshes = tuple(
        build_structured(spec, n0 * 2**l, level=l) for l in range(levels + 1)
    )
    return MeshHierarchy(spec=spec, levels=meshes)


def _facet_components(mesh: MeshLevel) -> np.ndarray:
    """Label cells by facet-connected components of equal coefficient value."""
    nc = mesh.n_cells
    # facet -> incident cells
    owner = np.full((mesh.n_facets, 2), -1, dtype=np.int64)
    for c in range(nc):
        for f in mesh.cell_facets[c]:
            owner[f, 0 if owner[f, 0] < 0 else 1] = c
    labels = np.full(nc, -1, dtype=np.int64)
    next_label = 0
    for seed in range(nc):
        if labels[seed] >= 0:
            continue
        labels[seed] = next_label
        stack = [seed]
        while stack:
            c = stack.pop()
            for f in mesh.cell_facets[c]:
                o = owner[f, 0] if owner[f, 1] == c else owner[f, 1]
                if o >= 0 and labels[o] < 0 and mesh.kappa[o] == mesh.kappa[c]:
                    labels[o] = next_label
                    stack.append(o)
        next_label += 1
    return labels


def floating_subdomain_count(spec: DomainSpec, n_per_axis: int = BENCHMARK_N0) -> int:
    """Number of connected coefficient subdomains not touching the boundary.

    Connectivity is through shared facets, so two inclusions meeting only at
    a point (or an edge in 3D) count as separate subdomains.  A subdomain is
    floating iff none of its cells owns a boundary facet.  The count is the
    same for any interface-resolving resolution.
    """
    mesh = build_structured(spec, n_per_axis)
    labels = _facet_components(mesh)
    touches = np.zeros(labels.max() + 1, dtype=bool)
    boundary_cells = np.unique(
        np.nonzero(mesh.boundary_facet[mesh.cell_facets])[0]
    )
    touches[np.unique(labels[boundary_cells])] = True
    return int(np.sum(~touches))


def jump_ratio(mesh: MeshLevel) -> float:
    """Coefficient contrast max kappa / min kappa over the cells."""
    return float(mesh.kappa.max() / mesh.kappa.min())


def write_mesh(mesh: MeshLevel, path) -> None:
    """Dump a mesh as plain text, one section per array."""
    with open(path, "w") as out:
        out.write(f"mgcr-mesh v1 dim={mesh.dim} level={mesh.level}\n")
        out.write(f"vertices {mesh.n_vertices}\n")
        for v in mesh.vertices:
            out.write(" ".join(repr(float(x)) for x in v) + "\n")
        for name, arr in (
            ("cells", mesh.cells),
            ("facets", mesh.facets),
            ("cell_facets", mesh.cell_facets),
        ):
            out.write(f"{name} {arr.shape[0]}\n")
            for row in arr:
                out.write(" ".join(str(int(i)) for i in row) + "\n")
        out.write(f"boundary_vertex {mesh.n_vertices}\n")
        out.write(" ".join(str(int(b)) for b in mesh.boundary_vertex) + "\n")
        out.write(f"boundary_facet {mesh.n_facets}\n")
        out.write(" ".join(str(int(b)) for b in mesh.boundary_facet) + "\n")
        out.write(f"kappa {mesh.n_cells}\n")
        out.write(" ".join(repr(float(k)) for k in mesh.kappa) + "\n")
        out.write(f"subdomain_id {mesh.n_cells}\n")
        out.write(" ".join(str(int(s)) for s in mesh.subdomain_id) + "\n")
