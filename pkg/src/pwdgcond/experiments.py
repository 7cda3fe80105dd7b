"""Parameter sweeps behind each CLI subcommand.

Each function returns plain row dicts in a fixed column order, so the same
data can be written as CSV or inspected from a notebook.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .analytic import ExactSolution, l2_error
from .assembly import GlobalSystem, assemble, impedance_data_from_exact
from .conditioning import (
    fit_scan,
    lambda_min_hermitian,
    lambda_min_hermitian_inverse,
    mass_cond,
    spectral_cond,
)
from .mesh import Mesh, aniso_rectangle, regular_polygon
from .orthogonalization import block_transform, global_transform, recover_solution
from .solvers import GmresConfig, contraction_bound_check, gmres_solve, lu_solve, precision_cast

__all__ = [
    "COND_SHAPE_COLUMNS",
    "FIT_CHECK_COLUMNS",
    "SOLVE_COLUMNS",
    "GMRES_TABLE_COLUMNS",
    "cond_shape_rows",
    "fit_check_rows",
    "solve_rows",
    "gmres_table_rows",
    "deterioration_onset",
]

logger = logging.getLogger(__name__)

COND_SHAPE_COLUMNS = ("shape", "param", "p", "cond2")
FIT_CHECK_COLUMNS = ("h", "k", "p", "cond2", "fit", "ratio")
SOLVE_COLUMNS = ("p", "cond2_A", "cond2_At", "l2_err_lu_A", "l2_err_lu_At", "breakdown_flag")
GMRES_TABLE_COLUMNS = ("p", "lmin_HA", "lmin_HAinv", "iters_A", "lmin_HAt", "lmin_HAtinv", "iters_At")


@dataclass
class RunLog:
    """Side information collected while producing rows."""

    failures: list[str] = field(default_factory=list)
    bound_checks: list[tuple[int, str, int, float]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def cond_shape_rows(
    ns: Iterable[int] = range(3, 65),
    aspects: Iterable[float] = range(1, 17),
    ps: Iterable[int] = range(1, 16, 2),
    h: float = 1.0,
    k: float = 10.0,
    theta0: float = 0.0,
    polygon_size: str = "circumdiameter",
) -> list[dict]:
    """cond_2(M_K) on regular n-gons and on rectangles of diagonal ``h``."""
    ps = list(ps)
    rows = []
    for n in ns:
        P = regular_polygon(n, h, size=polygon_size)
        rows += [{"shape": "ngon", "param": int(n), "p": p, "cond2": mass_cond(P, k, p, theta0)} for p in ps]
    for a in aspects:
        P = aniso_rectangle(a, h)
        param = int(a) if float(a).is_integer() else float(a)
        rows += [{"shape": "rect", "param": param, "p": p, "cond2": mass_cond(P, k, p, theta0)} for p in ps]
    return rows


def fit_check_rows(
    hs: Iterable[float],
    ks: Iterable[float],
    ps: Iterable[int],
    convention: str = "side",
    theta0: float = 0.0,
) -> list[dict]:
    rows = fit_scan(hs, ks, ps, convention=convention, theta0=theta0)
    return [
        {"h": r.h, "k": r.k, "p": r.p, "cond2": r.cond2, "fit": r.fit, "ratio": r.ratio}
        for r in rows
    ]


def _model_system(mesh: Mesh, k: float, p: int, theta0: float) -> GlobalSystem:
    sol = ExactSolution(k)
    return assemble(mesh, k, p, theta0, impedance_data_from_exact(sol))


def solve_rows(
    mesh: Mesh,
    k: float,
    ps: Iterable[int],
    precision: str = "binary64",
    congruence: str = "hermitian",
    theta0: float = 0.0,
    log: Optional[RunLog] = None,
    dump: Optional[callable] = None,
) -> list[dict]:
    """Direct solves of the Hankel model problem in the original and orthogonalised bases.

    Past an MGS breakdown the transform is still applied (with the
    numerically computed factors) and ``breakdown_flag`` is set to 1.
    """
    log = log if log is not None else RunLog()
    sol = ExactSolution(k)
    rows = []
    for p in ps:
        S = precision_cast(_model_system(mesh, k, p, theta0), precision)
        if dump is not None:
            dump(p, S)
        T = block_transform(S)
        St = global_transform(S, T, congruence=congruence, allow_breakdown=True)
        row = {"p": int(p), "cond2_A": spectral_cond(S.matrix), "cond2_At": spectral_cond(St.matrix)}
        rep = lu_solve(S)
        rep_t = lu_solve(St)
        for key, r, coeffs in (
            ("l2_err_lu_A", rep, rep.coefficients),
            ("l2_err_lu_At", rep_t, recover_solution(T, rep_t.coefficients)),
        ):
            if r.converged:
                row[key] = l2_error(mesh, coeffs.astype(complex), k, p, sol, theta0)
            else:
                row[key] = math.nan
                log.failures.append(f"p={p} {key}: {r.message}")
        row["breakdown_flag"] = 0 if T.ok else 1
        rows.append(row)
        logger.info("solve p=%d done", p)
    return rows


def gmres_table_rows(
    mesh: Mesh,
    k: float,
    ps: Iterable[int] = (5, 7, 9, 11, 13, 15),
    congruence: str = "hermitian",
    precision: str = "binary64",
    theta0: float = 0.0,
    cfg: GmresConfig = GmresConfig(),
    log: Optional[RunLog] = None,
    dump: Optional[callable] = None,
) -> list[dict]:
    """Extreme eigenvalues of Hermitian parts and GMRES counts for A and its re-based form.

    Every converged GMRES run is checked against the contraction bound;
    results land in ``log.bound_checks`` as ``(p, system, violations, margin)``.
    """
    log = log if log is not None else RunLog()
    rows = []
    for p in ps:
        S = precision_cast(_model_system(mesh, k, p, theta0), precision)
        if dump is not None:
            dump(p, S)
        T = block_transform(S)
        if not T.ok:
            log.notes.append(f"p={p}: MGS breakdown on {len(T.broken)} elements")
        St = global_transform(S, T, congruence=congruence, allow_breakdown=True)
        row = {"p": int(p)}
        for tag, X in (("A", S), ("At", St)):
            lh = lambda_min_hermitian(X.matrix)
            li = lambda_min_hermitian_inverse(X.matrix)
            rep = gmres_solve(X, cfg)
            row[f"lmin_H{tag}"] = lh
            row[f"lmin_H{tag}inv"] = li
            row[f"iters_{tag}"] = rep.iterations
            if not rep.converged:
                log.failures.append(f"p={p} {tag}: {rep.message}")
                continue
            b = contraction_bound_check(X.matrix, rep.residual_history, lh, li)
            if b.applicable:
                log.bound_checks.append((int(p), tag, b.violations, b.min_margin))
            else:
                log.notes.append(f"p={p} {tag}: {b.message}")
        rows.append({c: row[c] for c in GMRES_TABLE_COLUMNS})
        logger.info("gmres-table p=%d done", p)
    return rows


def deterioration_onset(ps: Sequence[int], errors: Sequence[float]) -> Optional[int]:
    """First ``p`` whose error fails to improve on the best error at smaller ``p``."""
    best = math.inf
    for p, e in zip(ps, errors):
        if not (e < best):
            return int(p)
        best = e
    return None
