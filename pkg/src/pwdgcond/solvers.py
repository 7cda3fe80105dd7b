"""Direct and GMRES solves, precision control and the GMRES contraction bound."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .assembly import PRECISIONS, GlobalSystem
from .conditioning import lambda_min_hermitian, lambda_min_hermitian_inverse

__all__ = [
    "SolveReport",
    "GmresConfig",
    "BoundReport",
    "lu_solve",
    "gmres_solve",
    "gmres",
    "contraction_bound",
    "contraction_bound_check",
    "precision_cast",
]

logger = logging.getLogger(__name__)

_REORTH = 1.0 / math.sqrt(2.0)


@dataclass
class SolveReport:
    coefficients: np.ndarray
    method: str
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    converged: bool = True
    relative_residual: float = math.nan
    message: str = ""


@dataclass(frozen=True)
class GmresConfig:
    """Full (unrestarted) GMRES from a zero initial guess.

    ``max_iter=None`` means the system dimension.
    """

    tol: float = 1e-10
    max_iter: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0 < self.tol < 1:
            raise ValueError(f"need 0 < tol < 1, got {self.tol}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be positive")


def precision_cast(system: GlobalSystem, target: str) -> GlobalSystem:
    """Round matrix and right-hand side entrywise to ``binary32`` or ``binary64``."""
    if target not in PRECISIONS:
        raise ValueError(f"precision must be one of {sorted(PRECISIONS)}")
    dtype = PRECISIONS[target]
    with np.errstate(over="ignore"):
        A = system.matrix.astype(dtype)
        b = system.rhs.astype(dtype)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        logger.warning("overflow while casting system to %s", target)
    return system.with_arrays(A, b, precision=target)


def _rel_residual(A: np.ndarray, x: np.ndarray, b: np.ndarray) -> float:
    bn = np.linalg.norm(b)
    r = np.linalg.norm(b - A @ x)
    return float(r / bn) if bn > 0 else float(r)


def lu_solve(system: GlobalSystem) -> SolveReport:
    """Dense LU with partial pivoting, in the system's precision."""
    A, b = system.matrix, system.rhs
    try:
        with warnings.catch_warnings():
            # an exactly zero pivot is reported below instead
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(A, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        return SolveReport(np.full_like(b, np.nan), "lu", converged=False, message=str(exc))
    if np.any(np.diag(lu) == 0):
        return SolveReport(np.full_like(b, np.nan), "lu", converged=False, message="exactly singular pivot")
    x = sla.lu_solve((lu, piv), b)
    res = _rel_residual(A, x, b)
    return SolveReport(x, "lu", residual_history=[res], relative_residual=res, converged=bool(np.isfinite(res)))


def gmres(A: np.ndarray, b: np.ndarray, tol: float = 1e-10, max_iter: Optional[int] = None):
    """Full GMRES with Givens rotations.

    Returns ``(x, history, converged)`` where ``history[j] = ||r_j||`` for
    ``j = 0..iterations``. Arnoldi uses modified Gram-Schmidt with one
    re-orthogonalisation pass whenever the new vector's norm drops below
    ``1/sqrt(2)`` of its value before projection.
    """
    dtype = np.result_type(A.dtype, b.dtype, np.complex64)
    rtype = np.finfo(dtype).dtype.type
    n = b.shape[0]
    m = n if max_iter is None else min(max_iter, n)
    beta = rtype(np.linalg.norm(b))
    x = np.zeros(n, dtype=dtype)
    history = [float(beta)]
    if beta == 0:
        return x, history, True
    V = np.zeros((n, m + 1), dtype=dtype)
    Hm = np.zeros((m + 1, m), dtype=dtype)
    cs = np.zeros(m, dtype=dtype)
    sn = np.zeros(m, dtype=dtype)
    g = np.zeros(m + 1, dtype=dtype)
    g[0] = beta
    V[:, 0] = b / beta
    converged = False
    j = 0
    for j in range(m):
        w = A @ V[:, j]
        before = np.linalg.norm(w)
        for i in range(j + 1):
            h = np.vdot(V[:, i], w)
            Hm[i, j] += h
            w = w - h * V[:, i]
        after = np.linalg.norm(w)
        if after < _REORTH * before:
            for i in range(j + 1):
                h = np.vdot(V[:, i], w)
                Hm[i, j] += h
                w = w - h * V[:, i]
            after = np.linalg.norm(w)
        Hm[j + 1, j] = after
        for i in range(j):
            t = cs[i] * Hm[i, j] + sn[i] * Hm[i + 1, j]
            Hm[i + 1, j] = -np.conj(sn[i]) * Hm[i, j] + cs[i] * Hm[i + 1, j]
            Hm[i, j] = t
        a, c = Hm[j, j], Hm[j + 1, j]
        denom = np.sqrt(abs(a) ** 2 + abs(c) ** 2)
        if denom == 0:
            cs[j], sn[j] = 1, 0
        elif a == 0:
            cs[j], sn[j] = 0, 1
        else:
            cs[j] = abs(a) / denom
            sn[j] = (a / abs(a)) * np.conj(c) / denom
        Hm[j, j] = cs[j] * a + sn[j] * c
        Hm[j + 1, j] = 0
        g[j + 1] = -np.conj(sn[j]) * g[j]
        g[j] = cs[j] * g[j]
        history.append(float(abs(g[j + 1])))
        if history[-1] <= tol * history[0] or after == 0:
            converged = history[-1] <= tol * history[0]
            j += 1
            break
        V[:, j + 1] = w / after
    else:
        j = m
    y = sla.solve_triangular(Hm[:j, :j], g[:j])
    x = V[:, :j] @ y
    return x, history, converged


def gmres_solve(system: GlobalSystem, cfg: GmresConfig = GmresConfig()) -> SolveReport:
    """Full GMRES in the system's precision; iterations are Arnoldi steps."""
    x, hist, ok = gmres(system.matrix, system.rhs, cfg.tol, cfg.max_iter)
    res = _rel_residual(system.matrix, x, system.rhs)
    msg = "" if ok else f"no convergence to {cfg.tol:g} in {len(hist) - 1} iterations"
    if not ok:
        logger.warning(msg)
    return SolveReport(x, "gmres", len(hist) - 1, hist, ok, res, msg)


def contraction_bound(lmin_H: float, lmin_H_inv: float, j) -> np.ndarray:
    """``(1 - lmin_H * lmin_H_inv)^(j/2)``."""
    return (1.0 - lmin_H * lmin_H_inv) ** (0.5 * np.asarray(j, dtype=float))


@dataclass(frozen=True)
class BoundReport:
    applicable: bool
    lambda_min_H: float
    lambda_min_H_inv: float
    violations: int = 0
    min_margin: float = math.nan
    message: str = ""


def contraction_bound_check(
    A: np.ndarray,
    history,
    lmin_H: Optional[float] = None,
    lmin_H_inv: Optional[float] = None,
    rtol: float = 1e-12,
) -> BoundReport:
    """Check ``||r_j|| / ||r_0|| <= (1 - lmin(H(A)) lmin(H(A^-1)))^(j/2)`` at every j.

    ``rtol`` absorbs rounding in the bound itself. The margin reported is
    ``min_j (bound_j - ratio_j) / bound_j`` over ``j >= 1`` (at ``j = 0`` both
    sides are 1).
    """
    if lmin_H is None:
        lmin_H = lambda_min_hermitian(A)
    if lmin_H <= 0:
        return BoundReport(False, lmin_H, math.nan, message="H(A) not positive definite; bound inapplicable")
    if lmin_H_inv is None:
        lmin_H_inv = lambda_min_hermitian_inverse(A)
    hist = np.asarray(history, dtype=float)
    ratio = hist / hist[0]
    bound = contraction_bound(lmin_H, lmin_H_inv, np.arange(hist.size))
    violations = int(np.sum(ratio > bound * (1.0 + rtol)))
    tail = slice(1, None) if hist.size > 1 else slice(None)
    margin = float(np.min((bound[tail] - ratio[tail]) / bound[tail]))
    return BoundReport(True, lmin_H, lmin_H_inv, violations, margin)
