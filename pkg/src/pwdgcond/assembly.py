"""Assembly of the plane-wave DG system for the impedance Helmholtz problem.

Unknowns are ordered element-major, direction-minor: ``row = K * p + j``.
Entry ``A[(K', l), (K, j)]`` is the sesquilinear form evaluated with trial
function ``phi_{K,j}`` and test function ``phi_{K',l}`` (conjugated).

On an edge shared by trial element ``a`` (outward normal ``n_a``) and test
element ``b`` (outward normal ``n_b``; ``a == b`` on the boundary and for
self-coupling), with averages ``{v} = (v_a + v_b)/2`` and jumps
``[v] = v_a n_a + v_b n_b``, ``[grad v] = grad v_a . n_a + grad v_b . n_b``,
every term of the form collapses to

    (k/2) [ n_a . n_b - (d_j + d_l) . n_b + (d_j . n_a)(d_l . n_b) ]
        * int_F phi_{a,j} conj(phi_{b,l}) ds

which, on the boundary, factors as ``(k/2)(1 - d_j.n)(1 - d_l.n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .mesh import Edge, Mesh
from .planewave import make_directions, segment_exp_integrals

__all__ = [
    "GlobalSystem",
    "BoundarySource",
    "assemble",
    "assemble_matrix",
    "assemble_rhs",
    "edge_blocks",
    "local_block",
    "impedance_data_from_exact",
    "dump_system",
    "load_system",
]

PRECISIONS = {"binary32": np.complex64, "binary64": np.complex128}


@dataclass(frozen=True, eq=False)
class GlobalSystem:
    """Dense PWDG system ``matrix @ u = rhs`` with p x p element blocks."""

    matrix: np.ndarray
    rhs: np.ndarray
    block_size: int
    k: float = 1.0
    theta0: float = 0.0
    precision: str = "binary64"
    adjacency: Optional[frozenset] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_elements(self) -> int:
        return self.n // self.block_size

    def block(self, K: int, L: int) -> np.ndarray:
        p = self.block_size
        return self.matrix[K * p : (K + 1) * p, L * p : (L + 1) * p]

    def with_arrays(self, matrix: np.ndarray, rhs: np.ndarray, **kw) -> "GlobalSystem":
        return replace(self, matrix=matrix, rhs=rhs, **kw)


@dataclass(frozen=True)
class BoundarySource:
    """Impedance datum ``g``, evaluated edge by edge.

    ``evaluator(x, normal)`` receives points of shape ``(n, 2)`` on one
    boundary edge together with that edge's outward normal, so corner
    values depend on which edge they are approached from.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, x, normal) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, dtype=float), np.asarray(normal, dtype=float)))


def impedance_data_from_exact(sol, k: Optional[float] = None) -> BoundarySource:
    """``g = grad u . n + i k u`` for an exact solution with ``u``/``grad`` methods."""
    kk = sol.k if k is None else k

    def g(x, normal):
        return sol.grad(x) @ normal + 1j * kk * sol.u(x)

    return BoundarySource(g)


def _edge_coefficients(d: np.ndarray, n_trial: np.ndarray, n_test: np.ndarray, k: float) -> np.ndarray:
    """Coefficient matrix ``C[l, j]`` multiplying ``int phi_j conj(phi_l)``.

    The flux terms add up to ``(k/2)[n_a.n_b - (d_j + d_l).n_b + (d_j.n_a)(d_l.n_b)]``.
    Since ``n_b = +-n_a`` this factors as ``+-(k/2)(1 - d_j.n_a)(1 - d_l.n_a)``,
    which avoids the cancellation of the expanded form when ``d`` is close to
    the normal.
    """
    sign = float(np.sign(n_trial @ n_test))
    g = 1.0 - d @ n_trial
    return (0.5 * k * sign) * g[:, None] * g[None, :]


def _pair_integrals(k: float, d: np.ndarray, a, b, x_trial, x_test) -> np.ndarray:
    """``I[l, j] = int_[a,b] phi_{trial,j} conj(phi_{test,l}) ds``.

    ``phi_j conj(phi_l) = exp(i k (d_j - d_l).(x - x_trial)) exp(i k d_l.(x_test - x_trial))``.
    """
    W = d[None, :, :] - d[:, None, :]
    shift = np.exp(1j * k * (d @ (np.asarray(x_test) - np.asarray(x_trial))))
    return segment_exp_integrals(k, W, a, b, x_trial) * shift[:, None]


def edge_blocks(mesh: Mesh, edge: Edge, k: float, d: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
    """All p x p contributions of one edge, keyed by ``(test_element, trial_element)``."""
    sides = [(edge.left, edge.normal)]
    if edge.right is not None:
        sides.append((edge.right, -edge.normal))
    centers = {K: mesh.elements[K].centroid for K, _ in sides}
    out = {}
    for b_el, n_b in sides:
        for a_el, n_a in sides:
            C = _edge_coefficients(d, n_a, n_b, k)
            I = _pair_integrals(k, d, edge.a, edge.b, centers[a_el], centers[b_el])
            out[(b_el, a_el)] = C * I
    return out


def assemble_matrix(mesh: Mesh, k: float, p: int, theta0: float = 0.0) -> np.ndarray:
    if not k > 0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    d = make_directions(p, theta0).directions
    N = mesh.n_elements * p
    A = np.zeros((N, N), dtype=complex)
    for edge in mesh.edges:
        for (K, L), blk in edge_blocks(mesh, edge, k, d).items():
            A[K * p : (K + 1) * p, L * p : (L + 1) * p] += blk
    return A


def _gauss_order(k: float, length: float) -> int:
    return max(20, math.ceil(k * length) + 20)


def assemble_rhs(mesh: Mesh, k: float, p: int, g: BoundarySource, theta0: float = 0.0) -> np.ndarray:
    """Load vector ``b[(K, l)] = -(i/2) (1 + d_l . n) int_F g conj(phi_l)``.

    ``g`` is arbitrary, so the edge integrals use Gauss-Legendre quadrature
    with enough points to resolve both ``g`` and the plane waves.
    """
    d = make_directions(p, theta0).directions
    b = np.zeros(mesh.n_elements * p, dtype=complex)
    for edge in mesh.boundary_edges:
        K = edge.left
        t, w = np.polynomial.legendre.leggauss(_gauss_order(k, edge.length))
        x = edge.a + 0.5 * (t + 1.0)[:, None] * (edge.b - edge.a)
        w = 0.5 * edge.length * w
        gx = g(x, edge.normal)
        phi_bar = np.exp(-1j * k * ((x - mesh.elements[K].centroid) @ d.T))
        b[K * p : (K + 1) * p] += -0.5j * (1.0 + d @ edge.normal) * ((w * gx) @ phi_bar)
    return b


def assemble(mesh: Mesh, k: float, p: int, theta0: float = 0.0, g: Optional[BoundarySource] = None) -> GlobalSystem:
    """Assemble matrix and load vector; ``g=None`` gives a zero right-hand side."""
    if not k > 0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    if int(p) != p or p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    A = assemble_matrix(mesh, k, p, theta0)
    b = np.zeros(A.shape[0], dtype=complex) if g is None else assemble_rhs(mesh, k, p, g, theta0)
    adj = frozenset((e.left, e.right) for e in mesh.interior_edges) | frozenset(
        (e.right, e.left) for e in mesh.interior_edges
    )
    return GlobalSystem(A, b, int(p), float(k), float(theta0), "binary64", adj)


def local_block(system: GlobalSystem, K: int) -> np.ndarray:
    """Diagonal p x p block of element ``K`` (a copy)."""
    if not 0 <= K < system.n_elements:
        raise IndexError(f"element index {K} out of range [0, {system.n_elements})")
    return system.block(K, K).copy()


def dump_system(system: GlobalSystem, path) -> None:
    """Write ``N``, then N matrix rows of ``re im`` pairs, then N rhs ``re im`` lines."""
    A = np.asarray(system.matrix, dtype=complex)
    b = np.asarray(system.rhs, dtype=complex)
    lines = [str(A.shape[0])]
    for row in A:
        lines.append(" ".join(f"{z.real!r} {z.imag!r}" for z in row.tolist()))
    lines += [f"{z.real!r} {z.imag!r}" for z in b.tolist()]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_system(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``(A, b)`` written by :func:`dump_system`."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    N = int(lines[0])
    if len(lines) != 1 + 2 * N:
        raise ValueError("system file has the wrong number of lines")
    A = np.array([[float(v) for v in ln.split()] for ln in lines[1 : 1 + N]])
    if A.shape != (N, 2 * N):
        raise ValueError("matrix rows must hold N (re, im) pairs")
    b = np.array([[float(v) for v in ln.split()] for ln in lines[1 + N :]])
    return A[:, 0::2] + 1j * A[:, 1::2], b[:, 0] + 1j * b[:, 1]
