"""Acceptance suite: every criterion prints one PASS/FAIL line.

Reference numbers are the published benchmark results for these two jump
coefficient problems (condition numbers with PCG iteration counts, effective
condition numbers, and V-cycle contraction rates).  Tolerances: condition
numbers +-25%, effective condition numbers +-30%, iteration counts +-3,
contraction rates +-0.05 (+-0.01 for rates above 0.95); identities at the
stated analytic tolerances.
"""

import numpy as np
import pytest

from helpers import (
    cell,
    cell_spectrum,
    quadrature_stiffness_cr,
    quadrature_stiffness_p1,
    random_spd,
)
from mgcr import mesh as mgmesh
from mgcr.assembly import CR, P1, assemble, assemble_load, local_stiffness_cr, local_stiffness_p1
from mgcr.krylov import pcg
from mgcr.multigrid import apply_B, single_level
from mgcr.spectral import estimate_rho, spectrum_dense
from mgcr.transfer import galerkin_check

# 2D benchmark: condition number (PCG iterations) and effective condition
# number per background coefficient and level, one smoothing sweep each way.
TABLE_2D = {
    1.0:   ([(1.65, 8), (1.83, 10), (1.90, 10), (1.90, 10), (1.89, 10)],
            [1.44, 1.78, 1.77, 1.78, 1.76]),
    1e-1:  ([(3.78, 10), (3.69, 11), (3.76, 12), (3.79, 12), (3.88, 12)],
            [1.89, 1.87, 1.93, 1.92, 1.95]),
    1e-2:  ([(23.4, 12), (23.6, 13), (24.6, 13), (25.1, 14), (26.0, 15)],
            [2.15, 1.96, 1.99, 1.97, 2.24]),
    1e-3:  ([(218.0, 13), (223.0, 14), (232.0, 15), (238.0, 16), (246.0, 16)],
            [2.19, 1.98, 2.00, 1.98, 2.29]),
    1e-4:  ([(2.17e3, 14), (2.21e3, 15), (2.31e3, 16), (2.37e3, 18), (2.45e3, 18)],
            [2.20, 1.98, 2.00, 1.98, 2.30]),
    1e-5:  ([(2.17e4, 15), (2.21e4, 16), (2.31e4, 17), (2.37e4, 20), (2.76e4, 21)],
            [2.20, 1.98, 2.00, 1.98, 2.64]),
}

# 3D benchmark up to level 2, five sweeps each way.
TABLE_3D = {
    1.0:  ([(1.19, 8), (1.34, 11), (1.37, 11)], [1.16, 1.26, 1.31]),
    1e-1: ([(2.30, 10), (1.94, 13), (1.75, 13)], [1.60, 1.56, 1.45]),
    1e-3: ([(86.01, 11), (63.07, 16), (52.67, 17)], [2.40, 2.12, 1.89]),
    1e-5: ([(8.39e3, 13), (6.15e3, 18), (5.13e3, 19)], [2.44, 2.14, 1.91]),
    1e-7: ([(8.39e5, 14), (6.15e5, 21), (5.13e5, 23)], [2.45, 2.14, 1.91]),
}

# 3D V-cycle contraction rates, levels 0..3 by column per sweep count.
RATES_3D = {
    2: {
        1.0: [0.397, 0.501, 0.517, 0.524],
        1e-1: [0.731, 0.675, 0.647, 0.634],
        1e-2: [0.930, 0.921, 0.905, 0.895],
        1e-3: [0.991, 0.990, 0.988, 0.987],
        1e-4: [0.999, 0.999, 0.999, 0.999],
        1e-5: [0.9999, 0.9999, 0.9999, 0.9999],
    },
    5: {
        1.0: [0.152, 0.254, 0.269, 0.286],
        1e-1: [0.575, 0.485, 0.429, 0.403],
        1e-2: [0.904, 0.870, 0.846, 0.832],
        1e-3: [0.988, 0.984, 0.981, 0.979],
        1e-4: [0.999, 0.998, 0.998, 0.998],
        1e-5: [0.9999, 0.9998, 0.9998, 0.9998],
    },
}

PCG_TOL = {2: 1e-7, 3: 1e-12}
SWEEPS = {2: 1, 3: 5}


def _report(num, name, failures):
    status = "FAIL" if failures else "PASS"
    print(f"ACCEPTANCE {num:02d} {name}: {status}"
          + (f" ({len(failures)} issue(s))" if failures else ""))
    assert not failures, failures


def test_01_variational_coarsening_identity():
    failures = []
    for dim in (2, 3):
        for eps in (1.0, 1e-3):
            levels = 2 if dim == 2 else 1
            hier, mg = cell(dim, eps, levels)
            for l, P in enumerate(mg.prolongations):
                dev = galerkin_check(mg.matrices[l + 1], P, mg.matrices[l])
                tol = 1e-10 * np.abs(mg.matrices[l].data).max()
                if dev > tol:
                    failures.append((dim, eps, l, dev, tol))
    _report(1, "variational coarsening identity", failures)


def test_02_inclusion_matrix_entries_and_pattern():
    failures = []
    for dim in (2, 3):
        hier, mg = cell(dim, 1e-3, 1)
        inc = mg.prolongations[-1]
        if not np.all(inc.data == 1.0 / dim):
            failures.append((dim, "entry values"))
        mesh = hier.finest
        dm_p1, dm_cr = mg.dofmaps[-2], mg.dofmaps[-1]
        expected = set()
        for r, fid in enumerate(dm_cr.free_dofs):
            for vid in mesh.facets[fid]:
                col = dm_p1.index_of[vid]
                if col >= 0:
                    expected.add((r, int(col)))
        if set(zip(*inc.nonzero())) != expected:
            failures.append((dim, "pattern"))
    _report(2, "inclusion matrix 1/d and incidence pattern", failures)


def test_03_local_stiffness_relation():
    failures = []
    rng = np.random.default_rng(2024)
    for d in (2, 3):
        done = 0
        while done < 100:
            coords = rng.standard_normal((d + 1, d))
            if abs(np.linalg.det(coords[1:] - coords[0])) < 1e-2:
                continue
            done += 1
            kappa = float(rng.uniform(0.05, 20.0))
            Kp = local_stiffness_p1(coords, kappa)
            Kcr = local_stiffness_cr(coords, kappa)
            scale = np.abs(Kp).max()
            if np.abs(Kcr - d * d * Kp).max() > 1e-12 * d * d * scale:
                failures.append((d, done, "d^2 relation"))
            if np.abs(Kp - quadrature_stiffness_p1(coords, kappa)).max() > 1e-10 * scale:
                failures.append((d, done, "P1 quadrature oracle"))
            if np.abs(Kcr - quadrature_stiffness_cr(coords, kappa)).max() > 1e-10 * scale * d * d:
                failures.append((d, done, "CR quadrature oracle"))
    _report(3, "local stiffness d^2 relation + quadrature oracle", failures)


def test_04_upper_bound_and_self_adjointness():
    failures = []
    rng = np.random.default_rng(99)
    desk = [(2, e, l) for e in (1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5) for l in (0, 1, 2)]
    desk += [(3, e, 0) for e in (1.0, 1e-1, 1e-3, 1e-5, 1e-7)]
    for dim, eps, level in desk:
        _, mg = cell(dim, eps, level, SWEEPS[dim], SWEEPS[dim])
        rep = spectrum_dense(mg.fine_matrix, mg)
        if rep.lambda_max > 1.0 + 1e-10:
            failures.append((dim, eps, level, "lambda_max", rep.lambda_max))
        A = mg.fine_matrix
        for _ in range(3):
            u, v = rng.standard_normal(mg.n), rng.standard_normal(mg.n)
            lhs = (A @ apply_B(mg, A @ u)) @ v
            rhs = u @ (A @ apply_B(mg, A @ v))
            bound = 1e-10 * np.sqrt(u @ (A @ u)) * np.sqrt(v @ (A @ v))
            if abs(lhs - rhs) > bound:
                failures.append((dim, eps, level, "self-adjointness", lhs - rhs))
    # larger configurations via the Lanczos route
    for dim, eps, level in [(2, 1e-3, 3), (2, 1e-5, 4), (3, 1e-3, 1)]:
        rep = cell_spectrum(dim, eps, level, SWEEPS[dim], SWEEPS[dim])
        if rep.lambda_max > 1.0 + 1e-10:
            failures.append((dim, eps, level, "lambda_max", rep.lambda_max))
    _report(4, "lambda_max <= 1 and energy self-adjointness", failures)


def test_05_contraction_equals_one_minus_lambda_min():
    failures = []
    desk = [(2, 1.0, 0), (2, 1.0, 1), (2, 1e-1, 1), (2, 1e-2, 1), (2, 1e-3, 2),
            (3, 1.0, 0), (3, 1e-1, 0), (3, 1e-3, 0)]
    for dim, eps, level in desk:
        _, mg = cell(dim, eps, level, SWEEPS[dim], SWEEPS[dim])
        lam_min = spectrum_dense(mg.fine_matrix, mg).lambda_min
        rho = estimate_rho(mg, seed=0, maxit=400)
        if abs((1.0 - rho) - lam_min) > 0.02 * lam_min:
            failures.append((dim, eps, level, 1.0 - rho, lam_min))
    _report(5, "1 - rho matches lambda_min within 2%", failures)


def test_06_single_level_identity():
    failures = []
    rng = np.random.default_rng(0)
    A = random_spd(rng, 30)
    mg = single_level(A)
    ev = spectrum_dense(A, mg).eigenvalues
    if np.abs(ev - 1.0).max() > 1e-12:
        failures.append(("eigenvalue deviation", np.abs(ev - 1.0).max()))
    _report(6, "single-level hierarchy gives BA = I", failures)


def test_07_condition_table_2d():
    failures = []
    for eps, (k_cells, k1_cells) in TABLE_2D.items():
        for level, ((k_ref, it_ref), k1_ref) in enumerate(zip(k_cells, k1_cells)):
            hier, mg = cell(2, eps, level)
            f = assemble_load(hier.finest, CR, lambda x: 1.0)
            rep = pcg(mg.fine_matrix, mg, f, tol=PCG_TOL[2], maxit=500)
            spec_rep = cell_spectrum(2, eps, level, m=1)
            if not rep.converged:
                failures.append((eps, level, "not converged"))
            if abs(rep.iterations - it_ref) > 3:
                failures.append((eps, level, "iters", rep.iterations, it_ref))
            if abs(spec_rep.cond - k_ref) > 0.25 * k_ref:
                failures.append((eps, level, "K", spec_rep.cond, k_ref))
            if abs(spec_rep.cond_eff_for(1) - k1_ref) > 0.30 * k1_ref:
                failures.append((eps, level, "K1", spec_rep.cond_eff_for(1), k1_ref))
    _report(7, "2D condition-number table (30 cells)", failures)


def test_08_condition_table_3d():
    failures = []
    for eps, (k_cells, k1_cells) in TABLE_3D.items():
        for level, ((k_ref, it_ref), k1_ref) in enumerate(zip(k_cells, k1_cells)):
            hier, mg = cell(3, eps, level)
            f = assemble_load(hier.finest, CR, lambda x: 1.0)
            rep = pcg(mg.fine_matrix, mg, f, tol=PCG_TOL[3], maxit=500)
            spec_rep = cell_spectrum(3, eps, level, m=1)
            if not rep.converged:
                failures.append((eps, level, "not converged"))
            if abs(rep.iterations - it_ref) > 3:
                failures.append((eps, level, "iters", rep.iterations, it_ref))
            if abs(spec_rep.cond - k_ref) > 0.25 * k_ref:
                failures.append((eps, level, "K", spec_rep.cond, k_ref))
            if abs(spec_rep.cond_eff_for(1) - k1_ref) > 0.30 * k1_ref:
                failures.append((eps, level, "K1", spec_rep.cond_eff_for(1), k1_ref))
    _report(8, "3D condition-number table (15 cells)", failures)


def _rate_tol(ref):
    return 0.01 if ref >= 0.95 else 0.05


def test_09_contraction_rate_tables():
    failures = []
    cells = [
        (sweeps, eps, level)
        for sweeps in (2, 5)
        for eps in RATES_3D[sweeps]
        for level in (0, 1)
    ]
    cells += [(2, 1.0, 2), (2, 1e-2, 2), (5, 1.0, 2), (5, 1e-2, 2)]
    cells += [(2, 1.0, 3), (2, 1e-2, 3)]    # worked cells: 0.524 and 0.895
    for sweeps, eps, level in cells:
        ref = RATES_3D[sweeps][eps][level]
        _, mg = cell(3, eps, level, sweeps, sweeps)
        rho = estimate_rho(mg, seed=0, maxit=400)
        if abs(rho - ref) > _rate_tol(ref):
            failures.append((sweeps, eps, level, rho, ref))
    _report(9, "3D contraction-rate tables", failures)


def test_10_spectrum_structure_and_scaling():
    failures = []
    # finest 2D level at strong contrast: one isolated small eigenvalue
    rep = cell_spectrum(2, 1e-5, 4, m=1)
    ev = rep.eigenvalues
    if not (ev[0] < 0.1):
        failures.append(("lambda_1", ev[0]))
    if not (ev[1] / ev[0] >= 1e2):
        failures.append(("separation", ev[1] / ev[0]))
    if np.sum(ev < 0.1) != 1:
        failures.append(("count below 0.1", int(np.sum(ev < 0.1))))
    if not (ev[-1] <= 1.0 + 1e-10):
        failures.append(("lambda_max", ev[-1]))
    if not (ev[1] > 0.3):
        failures.append(("band floor", ev[1]))
    # K grows like the contrast: one decade of eps within a factor 2 of 10x
    conds = {
        eps: cell_spectrum(2, eps, 2, m=1).cond
        for eps in (1e-2, 1e-3, 1e-4, 1e-5)
    }
    for hi, lo in [(1e-2, 1e-3), (1e-3, 1e-4), (1e-4, 1e-5)]:
        ratio = conds[lo] / conds[hi]
        if not 5.0 <= ratio <= 20.0:
            failures.append(("K trend", hi, lo, ratio))
    # effective condition number nearly level-independent at fixed contrast
    k1s = [cell_spectrum(2, 1e-3, lv, m=1).cond_eff_for(1) for lv in range(5)]
    if max(k1s) / min(k1s) > 1.6:
        failures.append(("K1 spread", k1s))
    _report(10, "spectrum structure, contrast scaling, K1 stability", failures)
