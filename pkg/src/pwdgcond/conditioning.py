"""Condition numbers, Hermitian parts and the empirical mass-matrix law."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
import scipy.linalg as sla

from .mesh import ConvexPolygon
from .planewave import PlaneWaveBasis, local_mass_matrix

__all__ = [
    "CondReport",
    "hermitian_part",
    "skew_part",
    "spectral_cond",
    "lambda_min_hermitian",
    "lambda_min_hermitian_inverse",
    "fit_value",
    "square_element",
    "mass_cond",
    "fit_scan",
    "FIT_BASE",
    "COND_CAP",
    "HK_CAP",
]

logger = logging.getLogger(__name__)

FIT_BASE = 2.34
COND_CAP = 1e15
HK_CAP = 10.0
SIZE_CONVENTIONS = ("side", "diameter")


@dataclass(frozen=True)
class CondReport:
    cond2: float
    lambda_min_H: float = math.nan
    lambda_min_H_inv: float = math.nan
    fit_value: float = math.nan
    fit_ratio: float = math.nan


def hermitian_part(A) -> np.ndarray:
    """``(A + A^H) / 2``, exactly Hermitian."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"need a square matrix, got shape {A.shape}")
    H = 0.5 * (A + A.conj().T)
    # force bitwise Hermitian symmetry (rounding can differ between halves)
    H = np.triu(H) + np.triu(H, 1).conj().T
    H[np.diag_indices_from(H)] = H.diagonal().real
    return H


def skew_part(A) -> np.ndarray:
    A = np.asarray(A)
    return 0.5 * (A - A.conj().T)


def spectral_cond(M) -> float:
    """``sigma_max / sigma_min`` by dense SVD; ``inf`` if numerically singular."""
    M = np.asarray(M)
    s = sla.svdvals(M)
    if s[-1] == 0.0 or not np.isfinite(s[0]):
        logger.warning("matrix singular to working precision; reporting infinite condition number")
        return math.inf
    return float(s[0] / s[-1])


def lambda_min_hermitian(A) -> float:
    """Smallest eigenvalue of the Hermitian part of ``A``."""
    H = hermitian_part(A)
    return float(sla.eigvalsh(H, subset_by_index=[0, 0])[0])


def lambda_min_hermitian_inverse(A) -> float:
    """Smallest eigenvalue of the Hermitian part of ``inv(A)`` (explicit inverse)."""
    return lambda_min_hermitian(sla.inv(np.asarray(A)))


def fit_value(h: float, k: float, p: int) -> float:
    """Empirical law ``2.34^(p ln p) / (h k)^(p - 1)``; may overflow to ``inf``."""
    if not (h > 0 and k > 0):
        raise ValueError("need h > 0 and k > 0")
    if p < 2:
        raise ValueError("the law is stated for p >= 2")
    log_val = p * math.log(p) * math.log(FIT_BASE) - (p - 1) * math.log(h * k)
    if log_val > 709.0:
        logger.warning("fit value overflows for h=%g k=%g p=%d", h, k, p)
        return math.inf
    return math.exp(log_val)


def square_element(h: float, convention: str = "side") -> ConvexPolygon:
    """Axis-aligned square centred at the origin, sized by side or diameter."""
    if convention not in SIZE_CONVENTIONS:
        raise ValueError(f"convention must be one of {SIZE_CONVENTIONS}")
    half = 0.5 * h if convention == "side" else 0.5 * h / math.sqrt(2.0)
    return ConvexPolygon(np.array([[-half, -half], [half, -half], [half, half], [-half, half]]))


def mass_cond(P: ConvexPolygon, k: float, p: int, theta0: float = 0.0) -> float:
    """cond_2 of the local mass matrix of ``P`` (Hermitian PD, so an eigenvalue ratio)."""
    M = local_mass_matrix(P, PlaneWaveBasis.on(P, k, p, theta0))
    ev = sla.eigvalsh(M)
    if ev[0] <= 0.0:
        return spectral_cond(M)
    return float(ev[-1] / ev[0])


@dataclass(frozen=True)
class FitRow:
    h: float
    k: float
    p: int
    cond2: float
    fit: float
    ratio: float


def fit_scan(
    hs: Iterable[float],
    ks: Iterable[float],
    ps: Iterable[int],
    convention: str = "side",
    theta0: float = 0.0,
    cond_cap: float = COND_CAP,
    hk_cap: float = HK_CAP,
) -> list[FitRow]:
    """cond_2(M_K) against the law on a single square, ordered by (h, k, p).

    Triples with ``h k >= hk_cap`` or ``cond_2 >= cond_cap`` are dropped.
    """
    rows = []
    ks, ps = list(ks), list(ps)
    for h in sorted(hs):
        P = square_element(h, convention)
        for k in sorted(ks):
            if h * k >= hk_cap:
                continue
            for p in sorted(ps):
                c = mass_cond(P, k, p, theta0)
                if not c < cond_cap:
                    continue
                f = fit_value(h, k, p)
                rows.append(FitRow(float(h), float(k), int(p), c, f, c / f))
    return rows


def cond_report(A, fit: Optional[tuple[float, float, int]] = None, with_eigs: bool = True) -> CondReport:
    c = spectral_cond(A)
    lmin = lmin_inv = math.nan
    if with_eigs:
        lmin = lambda_min_hermitian(A)
        lmin_inv = lambda_min_hermitian_inverse(A)
    if fit is None:
        return CondReport(c, lmin, lmin_inv)
    f = fit_value(*fit)
    return CondReport(c, lmin, lmin_inv, f, c / f)
