"""Bessel/Hankel evaluation, exact model solutions and L2 errors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .mesh import ConvexPolygon, Mesh
from .planewave import make_directions

__all__ = [
    "bessel",
    "hankel1",
    "ExactSolution",
    "PlaneWaveSolution",
    "exact_u",
    "exact_grad_u",
    "triangle_rule",
    "polygon_rule",
    "l2_error",
]

_BESSEL = {"J0": special.j0, "J1": special.j1, "Y0": special.y0, "Y1": special.y1}


def bessel(kind: str, x):
    """Real Bessel functions J0, J1, Y0, Y1 of real argument.

    Y-kinds are singular at the origin and reject ``x <= 0``; J-kinds reject
    ``x < 0``.
    """
    try:
        f = _BESSEL[kind]
    except KeyError:
        raise ValueError(f"unknown Bessel kind {kind!r}; expected one of {sorted(_BESSEL)}") from None
    xa = np.asarray(x, dtype=float)
    if kind.startswith("Y"):
        if np.any(xa <= 0):
            raise ValueError(f"{kind} needs x > 0")
    elif np.any(xa < 0):
        raise ValueError(f"{kind} needs x >= 0")
    out = f(xa)
    return float(out) if out.ndim == 0 else out


def hankel1(order: int, x):
    """Hankel function of the first kind, orders 0 and 1, from J and Y."""
    if order not in (0, 1):
        raise ValueError("only orders 0 and 1 are supported")
    return bessel(f"J{order}", x) + 1j * bessel(f"Y{order}", x)


@dataclass(frozen=True)
class ExactSolution:
    """Outgoing cylindrical wave ``H0^(1)(k |x - source|)``.

    With the default source at (-1/4, 0) this is smooth on the closed unit
    square.
    """

    k: float
    source_point: tuple[float, float] = (-0.25, 0.0)

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise ValueError("wavenumber must be positive")
        sx, sy = self.source_point
        if 0.0 <= sx <= 1.0 and 0.0 <= sy <= 1.0:
            raise ValueError("source point must lie outside the closed unit square")

    def _r(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        rel = x - np.asarray(self.source_point)
        r = np.hypot(rel[..., 0], rel[..., 1])
        if np.any(r == 0.0):
            raise ValueError("evaluation at the source point")
        return rel, r

    def u(self, x) -> np.ndarray:
        _, r = self._r(x)
        return hankel1(0, self.k * r)

    def grad(self, x) -> np.ndarray:
        # d/dz H0 = -H1
        rel, r = self._r(x)
        return (-self.k * hankel1(1, self.k * r) / r)[..., None] * rel


@dataclass(frozen=True)
class PlaneWaveSolution:
    """``exp(i k d . x)``, an exact Helmholtz solution on all of R^2."""

    k: float
    direction: tuple[float, float]

    @classmethod
    def from_directions(cls, k: float, p: int, j: int = 0, theta0: float = 0.0) -> "PlaneWaveSolution":
        d = make_directions(p, theta0).directions[j]
        return cls(k, (float(d[0]), float(d[1])))

    def u(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(1j * self.k * (x @ np.asarray(self.direction)))

    def grad(self, x) -> np.ndarray:
        return 1j * self.k * self.u(x)[..., None] * np.asarray(self.direction)


def exact_u(sol, x) -> np.ndarray:
    return sol.u(x)


def exact_grad_u(sol, x) -> np.ndarray:
    return sol.grad(x)


def triangle_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss-Legendre rule on the reference triangle (0,0),(1,0),(0,1).

    ``order`` points per direction; exact for polynomials of degree
    ``2 order - 2``. Returns barycentric-free reference points (n, 2) and
    weights summing to 1/2.
    """
    t, w = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    U, V = np.meshgrid(t, t, indexing="ij")
    WU, WV = np.meshgrid(w, w, indexing="ij")
    # Duffy map (u, v) -> (u (1 - v), v) with Jacobian (1 - v)
    pts = np.column_stack([(U * (1.0 - V)).ravel(), V.ravel()])
    wts = (WU * WV * (1.0 - V)).ravel()
    return pts, wts


def polygon_rule(P: ConvexPolygon, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature on ``P`` by fan sub-triangulation from its centroid."""
    ref_pts, ref_wts = triangle_rule(order)
    c = P.centroid
    v = P.vertices
    pts, wts = [], []
    for i in range(v.shape[0]):
        a, b = v[i], v[(i + 1) % v.shape[0]]
        J = np.column_stack([a - c, b - c])
        det = abs(np.linalg.det(J))
        pts.append(c + ref_pts @ J.T)
        wts.append(det * ref_wts)
    return np.vstack(pts), np.concatenate(wts)


def _l2_sq(mesh: Mesh, coefficients: np.ndarray, k: float, dirs: np.ndarray, u: Callable, order: int) -> float:
    total = 0.0
    p = dirs.shape[0]
    for K, P in enumerate(mesh.elements):
        x, w = polygon_rule(P, order)
        phi = np.exp(1j * k * ((x - P.centroid) @ dirs.T))
        uh = phi @ coefficients[K * p : (K + 1) * p]
        total += float(w @ np.abs(uh - u(x)) ** 2)
    return total


def l2_error(
    mesh: Mesh,
    coefficients,
    k: float,
    p: int,
    sol,
    theta0: float = 0.0,
    rtol: float = 1e-3,
    max_order: int = 80,
) -> float:
    """L2(Omega) norm of ``u_hp - u`` for element-major plane-wave coefficients.

    The per-direction Gauss order starts at ``ceil(k h) + 6`` and is doubled
    until two successive values differ by less than ``rtol`` (relative).
    """
    coefficients = np.asarray(coefficients).astype(complex)
    if coefficients.shape != (mesh.n_elements * p,):
        raise ValueError(f"expected {mesh.n_elements * p} coefficients, got {coefficients.shape}")
    dirs = make_directions(p, theta0).directions
    order = math.ceil(k * mesh.h) + 6
    prev = math.sqrt(_l2_sq(mesh, coefficients, k, dirs, sol.u, order))
    while True:
        order *= 2
        cur = math.sqrt(_l2_sq(mesh, coefficients, k, dirs, sol.u, order))
        if abs(cur - prev) <= rtol * max(cur, prev) or order >= max_order:
            return cur
        prev = cur
