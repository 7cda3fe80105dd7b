"""Plane-wave bases and closed-form integrals of complex exponentials.

Every integral needed by the method reduces to

    I(w; a, b, c) = int_[a,b] exp(i k w . (x - c)) ds

over a straight segment, which has the closed form
``|b - a| exp(i k w.(a - c)) (exp(s) - 1) / s`` with ``s = i k w.(b - a)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh import ConvexPolygon

__all__ = [
    "DirectionSet",
    "PlaneWaveBasis",
    "make_directions",
    "eval_basis",
    "eval_grad",
    "segment_exp_integral",
    "segment_exp_integrals",
    "local_mass_matrix",
]

# below this |s| the divided difference (e^s - 1)/s is replaced by its Taylor
# polynomial; truncation error ~ |s|^4 / 120
SERIES_THRESHOLD = 1e-6


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """``p`` equispaced unit directions rotated by ``theta0``."""

    p: int
    theta0: float
    directions: np.ndarray

    def __len__(self) -> int:
        return self.p


def make_directions(p: int, theta0: float = 0.0) -> DirectionSet:
    if int(p) != p or p < 1:
        raise ValueError(f"need p >= 1 directions, got {p}")
    p = int(p)
    t = 2.0 * math.pi * np.arange(p) / p + theta0
    d = np.column_stack([np.cos(t), np.sin(t)])
    d.setflags(write=False)
    return DirectionSet(p, float(theta0), d)


@dataclass(frozen=True, eq=False)
class PlaneWaveBasis:
    """Local plane waves ``exp(i k d_j . (x - center))`` on one element."""

    k: float
    center: np.ndarray
    dirs: DirectionSet

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise ValueError(f"wavenumber must be positive, got {self.k}")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def p(self) -> int:
        return self.dirs.p

    @classmethod
    def on(cls, P: ConvexPolygon, k: float, p: int, theta0: float = 0.0) -> "PlaneWaveBasis":
        """Basis centred at the mass centre of ``P``."""
        return cls(k, P.centroid, make_directions(p, theta0))


def eval_basis(basis: PlaneWaveBasis, x) -> np.ndarray:
    """Values of all basis functions; shape ``(..., p)`` for ``x`` of shape ``(..., 2)``."""
    x = np.asarray(x, dtype=float)
    phase = (x - basis.center) @ basis.dirs.directions.T
    return np.exp(1j * basis.k * phase)


def eval_grad(basis: PlaneWaveBasis, x) -> np.ndarray:
    """Gradients ``i k d_j phi_j(x)``; shape ``(..., p, 2)``."""
    phi = eval_basis(basis, x)
    return 1j * basis.k * phi[..., None] * basis.dirs.directions


def _expm1_over(s: np.ndarray) -> np.ndarray:
    """(exp(s) - 1) / s for complex s, accurate down to s = 0."""
    s = np.asarray(s, dtype=complex)
    x, y = s.real, s.imag
    # exp(x + iy) - 1 = expm1(x) cos y - 2 sin^2(y/2) + i e^x sin y, no cancellation
    num = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2 + 1j * np.exp(x) * np.sin(y)
    small = np.abs(s) < SERIES_THRESHOLD
    out = np.empty_like(s)
    big = ~small
    out[big] = num[big] / s[big]
    ss = s[small]
    out[small] = 1.0 + ss / 2.0 + ss * ss / 6.0 + ss**3 / 24.0
    return out


def segment_exp_integrals(k: float, w, a, b, center) -> np.ndarray:
    """Vectorised :func:`segment_exp_integral` over a stack of ``w`` of shape ``(..., 2)``."""
    w = np.asarray(w, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = b - a
    length = math.hypot(t[0], t[1])
    if length == 0.0:
        raise ValueError("degenerate segment: a == b")
    s = 1j * k * (w @ t)
    return length * np.exp(1j * k * (w @ (a - np.asarray(center, dtype=float)))) * _expm1_over(s)


def segment_exp_integral(k: float, w, a, b, center) -> complex:
    """Integral of ``exp(i k w . (x - center))`` along the segment ``[a, b]``."""
    return complex(segment_exp_integrals(k, np.asarray(w, dtype=float)[None, :], a, b, center)[0])


def local_mass_matrix(P: ConvexPolygon, basis: PlaneWaveBasis) -> np.ndarray:
    """L2 Gram matrix ``M[j, l] = int_K phi_j conj(phi_l)`` in closed form.

    Off-diagonal entries use the divergence theorem to turn the area
    integral into edge integrals; the diagonal is the area.
    """
    if not np.allclose(basis.center, P.centroid, rtol=0.0, atol=1e-12 * max(1.0, P.diameter)):
        raise ValueError("basis must be centred at the polygon's mass centre")
    d = basis.dirs.directions
    k = basis.k
    p = d.shape[0]
    W = d[:, None, :] - d[None, :, :]
    ww = (W**2).sum(-1)
    off = ~np.eye(p, dtype=bool)
    M = np.zeros((p, p), dtype=complex)
    Woff = W[off]
    acc = np.zeros(Woff.shape[0], dtype=complex)
    for a, b, n in P.segments():
        acc += (Woff @ n) * segment_exp_integrals(k, Woff, a, b, basis.center)
    M[off] = -1j * acc / (k * ww[off])
    M[np.diag_indices(p)] = P.area
    return M
