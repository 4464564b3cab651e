"""Multigrid V-cycle preconditioning for nonconforming facet-midpoint (CR)
discretizations of elliptic problems with piecewise-constant jump
coefficients, using conforming coarse spaces."""

from .assembly import (
    DofMap,
    assemble,
    assemble_load,
    local_stiffness_cr,
    local_stiffness_p1,
    write_matrix_market,
)
from .krylov import SolveReport, condition_from_tridiagonal, pcg
from .mesh import (
    Box,
    DomainSpec,
    MeshHierarchy,
    MeshLevel,
    build_hierarchy,
    build_structured,
    floating_subdomain_count,
    jump_ratio,
    benchmark_domain,
    benchmark_domain_2d,
    benchmark_domain_3d,
    write_mesh,
)
from .multigrid import MgConfig, MgHierarchy, apply_B, mg_iterate, setup, single_level
from .smoothers import gs_backward, gs_forward, jacobi
from .spectral import (
    SpectrumReport,
    estimate_rho,
    spectrum_dense,
    spectrum_iterative,
    write_eigenvalues_csv,
)
from .transfer import galerkin_check, inclusion_cr, prolong_p1

__version__ = "0.1.0"
