"""Experiment driver: condition-number tables, convergence rates, spectra,
and single solves, written as CSV.

Benchmark geometry: a square with two unit-coefficient boxes meeting at the
origin (2D, coarsest spacing 2^-1) or a unit cube with two boxes meeting at
a point (3D, coarsest spacing 2^-2); the background coefficient eps sets the
contrast.  Defaults follow the benchmark setup per dimension: one
Gauss-Seidel pre/post sweep and tol 1e-7 in 2D, five sweeps and tol 1e-12 in
3D.  All randomness comes from numpy's default_rng (PCG64) with the
configured seed, so outputs are byte-identical across reruns.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import spectral
from .assembly import CR, assemble_load
from .krylov import pcg
from .mesh import (
    MeshHierarchy,
    build_hierarchy,
    floating_subdomain_count,
    jump_ratio,
    benchmark_domain,
)
from .multigrid import MgConfig, MgHierarchy, setup, single_level

__all__ = [
    "ExperimentConfig",
    "run_table",
    "run_rate",
    "run_spectrum",
    "run_solve",
    "main",
]

TABLE_COLUMNS = (
    "dim,level,h,epsilon,n_dofs,pre_sweeps,post_sweeps,iters,kappa,kappa_eff,"
    "m,lambda_min,lambda_2,lambda_max,rho,seed,error"
)
RATE_COLUMNS = "dim,level,h,epsilon,n_dofs,pre_sweeps,post_sweeps,rho,seed,error"
SOLVE_COLUMNS = (
    "dim,level,h,epsilon,n_dofs,pre_sweeps,post_sweeps,seed,iter,resid,"
    "relres,bresid"
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment campaign over (epsilon, level) cells."""

    dim: int
    levels: int
    epsilons: tuple[float, ...]
    mode: str
    pre_sweeps: int | None = None
    post_sweeps: int | None = None
    tol: float | None = None
    maxit: int = 500
    seed: int = 0
    m: int | None = 1          # None = auto (floating-subdomain count)
    out: str | None = None
    dense_cap: int = spectral.DENSE_CAP
    lanczos_iters: int = 300
    exact_b: bool = False      # debug: replace B by the exact inverse

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.levels < 0:
            raise ValueError(f"levels must be >= 0, got {self.levels}")
        if not self.epsilons or any(e <= 0 for e in self.epsilons):
            raise ValueError("epsilon values must be positive")
        if self.mode not in ("table", "rate", "spectrum", "solve"):
            raise ValueError(f"unknown mode {self.mode!r}")
        tol = self.effective_tol
        if not 0.0 < tol < 1.0:
            raise ValueError(f"tol must be in (0, 1), got {tol}")
        if (self.pre_sweeps or 1) < 1 or (self.post_sweeps or 1) < 1:
            raise ValueError("sweep counts must be >= 1")
        if self.maxit < 1:
            raise ValueError(f"maxit must be >= 1, got {self.maxit}")

    @property
    def effective_pre(self) -> int:
        return self.pre_sweeps if self.pre_sweeps is not None else (1 if self.dim == 2 else 5)

    @property
    def effective_post(self) -> int:
        return self.post_sweeps if self.post_sweeps is not None else (1 if self.dim == 2 else 5)

    @property
    def effective_tol(self) -> float:
        return self.tol if self.tol is not None else (1e-7 if self.dim == 2 else 1e-12)

    def mg_config(self) -> MgConfig:
        return MgConfig(pre_sweeps=self.effective_pre, post_sweeps=self.effective_post)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _row(values) -> str:
    return ",".join(_fmt(v) for v in values)


def _build_cell(config: ExperimentConfig, epsilon: float, level: int):
    spec = benchmark_domain(config.dim, epsilon)
    hier = build_hierarchy(spec, level)
    mg = setup(hier, config.mg_config())
    return hier, mg


def _preconditioner(config: ExperimentConfig, mg: MgHierarchy):
    if config.exact_b:
        return single_level(mg.fine_matrix)
    return mg


def _spectrum(config: ExperimentConfig, hier: MeshHierarchy, mg: MgHierarchy):
    m = (
        config.m
        if config.m is not None
        else floating_subdomain_count(hier.spec)
    )
    B = _preconditioner(config, mg)
    A = mg.fine_matrix
    meta = dict(
        m=m,
        m0=floating_subdomain_count(hier.spec),
        jump_ratio=jump_ratio(hier.finest),
    )
    if mg.n <= config.dense_cap:
        return spectral.spectrum_dense(A, B, cap=config.dense_cap, **meta)
    return spectral.spectrum_iterative(
        A, B, n_small=max(m + 2, 5), seed=config.seed,
        maxiter=config.lanczos_iters, **meta,
    )


def run_table(config: ExperimentConfig) -> str:
    """Condition-number table: one CSV row per (epsilon, level) cell."""
    lines = [TABLE_COLUMNS]
    failed = False
    for epsilon in config.epsilons:
        for level in range(config.levels + 1):
            base = [config.dim, level]
            try:
                hier, mg = _build_cell(config, epsilon, level)
                f = assemble_load(hier.finest, CR, lambda x: 1.0)
                report = pcg(
                    mg.fine_matrix, _preconditioner(config, mg), f,
                    tol=config.effective_tol, maxit=config.maxit,
                )
                spec_rep = _spectrum(config, hier, mg)
                ev = spec_rep.eigenvalues
                note = None
                if not report.converged:
                    failed = True
                    note = f"pcg not converged in {report.iterations} iterations"
                lines.append(_row(base + [
                    hier.finest.h, epsilon, mg.n,
                    config.effective_pre, config.effective_post,
                    report.iterations, spec_rep.cond, spec_rep.cond_eff,
                    spec_rep.m, spec_rep.lambda_min, float(ev[1]),
                    spec_rep.lambda_max, spec_rep.rho, config.seed, note,
                ]))
            except Exception as exc:  # keep going, record the cell failure
                failed = True
                lines.append(_row(base + [
                    None, epsilon, None,
                    config.effective_pre, config.effective_post,
                    None, None, None, None, None, None, None, None,
                    config.seed, repr(exc),
                ]))
    return _finish(config, lines, failed)


def run_rate(config: ExperimentConfig) -> str:
    """Stationary-cycle contraction factors, one row per cell."""
    lines = [RATE_COLUMNS]
    failed = False
    for epsilon in config.epsilons:
        for level in range(config.levels + 1):
            base = [config.dim, level]
            try:
                hier, mg = _build_cell(config, epsilon, level)
                rho = spectral.estimate_rho(mg, seed=config.seed, maxit=config.maxit)
                lines.append(_row(base + [
                    hier.finest.h, epsilon, mg.n,
                    config.effective_pre, config.effective_post,
                    rho, config.seed, None,
                ]))
            except Exception as exc:
                failed = True
                lines.append(_row(base + [
                    None, epsilon, None,
                    config.effective_pre, config.effective_post,
                    None, config.seed, repr(exc),
                ]))
    return _finish(config, lines, failed)


def run_spectrum(config: ExperimentConfig) -> str:
    """Eigenvalue dump `index,lambda` for a single (epsilon, level) cell."""
    if len(config.epsilons) != 1:
        raise ValueError("spectrum mode expects exactly one epsilon")
    hier, mg = _build_cell(config, config.epsilons[0], config.levels)
    spec_rep = _spectrum(config, hier, mg)
    lines = ["index,lambda"]
    for i, lam in enumerate(np.sort(spec_rep.eigenvalues)):
        lines.append(f"{i},{float(lam)!r}")
    return _finish(config, lines, False)


def run_solve(config: ExperimentConfig) -> str:
    """One PCG solve with f = 1; one CSV row per iteration."""
    if len(config.epsilons) != 1:
        raise ValueError("solve mode expects exactly one epsilon")
    epsilon = config.epsilons[0]
    hier, mg = _build_cell(config, epsilon, config.levels)
    f = assemble_load(hier.finest, CR, lambda x: 1.0)
    report = pcg(
        mg.fine_matrix, _preconditioner(config, mg), f,
        tol=config.effective_tol, maxit=config.maxit,
    )
    prov = [
        config.dim, config.levels, hier.finest.h, epsilon, mg.n,
        config.effective_pre, config.effective_post, config.seed,
    ]
    lines = [SOLVE_COLUMNS]
    r0 = report.resid_history[0]
    for k, r in enumerate(report.resid_history):
        bres = (
            report.bresid_history[k] if k < len(report.bresid_history) else None
        )
        lines.append(_row(prov + [k, float(r), float(r / r0), bres]))
    return _finish(config, lines, not report.converged)


def _finish(config: ExperimentConfig, lines: list[str], failed: bool) -> str:
    text = "\n".join(lines) + "\n"
    if config.out:
        with open(config.out, "w") as out:
            out.write(text)
    if failed:
        raise CellError(text)
    return text


class CellError(Exception):
    """Raised after a campaign finishes with at least one failed cell; the
    CSV (with per-cell error messages) is still written."""

    def __init__(self, csv_text: str):
        super().__init__("one or more cells failed; see the error column")
        self.csv_text = csv_text


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgcr",
        description="Multigrid-preconditioned CR solver experiments",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("table", "rate", "spectrum", "solve"):
        p = sub.add_parser(mode)
        p.add_argument("--dim", type=int, choices=(2, 3), default=2)
        p.add_argument("--levels", type=int, default=0, metavar="L")
        p.add_argument(
            "--eps", type=str, default="1",
            help="comma-separated background coefficients",
        )
        p.add_argument("--pre", type=int, default=None, metavar="K")
        p.add_argument("--post", type=int, default=None, metavar="K")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--maxit", type=int, default=500)
        p.add_argument(
            "--m", type=str, default="1",
            help="eigenvalues discounted in the effective condition "
            "number, or 'auto' for the floating-subdomain count",
        )
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--dense-cap", type=int, default=spectral.DENSE_CAP)
        p.add_argument("--lanczos-iters", type=int, default=300)
        p.add_argument(
            "--exact-b", action="store_true",
            help="debug: use the exact inverse as preconditioner",
        )
    return parser


def config_from_args(argv) -> ExperimentConfig:
    args = _parser().parse_args(argv)
    epsilons = tuple(float(tok) for tok in args.eps.split(",") if tok)
    m = None if args.m == "auto" else int(args.m)
    return ExperimentConfig(
        dim=args.dim,
        levels=args.levels,
        epsilons=epsilons,
        mode=args.mode,
        pre_sweeps=args.pre,
        post_sweeps=args.post,
        tol=args.tol,
        maxit=args.maxit,
        seed=args.seed,
        m=m,
        out=args.out,
        dense_cap=args.dense_cap,
        lanczos_iters=args.lanczos_iters,
        exact_b=args.exact_b,
    )


_RUNNERS = {
    "table": run_table,
    "rate": run_rate,
    "spectrum": run_spectrum,
    "solve": run_solve,
}


def main(argv=None) -> int:
    """Entry point; exit code 0 on success, 1 on cell errors, 2 on bad config."""
    try:
        config = config_from_args(
            sys.argv[1:] if argv is None else list(argv)
        )
    except SystemExit as exc:  # argparse already printed the message
        return 2 if exc.code else 0
    except (ValueError, TypeError) as exc:
        print(f"mgcr: {exc}", file=sys.stderr)
        return 2

    try:
        text = _RUNNERS[config.mode](config)
    except CellError as exc:
        if not config.out:
            sys.stdout.write(exc.csv_text)
        print("mgcr: one or more cells failed", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"mgcr: {exc}", file=sys.stderr)
        return 2

    if not config.out:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
