"""Element-local modified Gram-Schmidt re-basis of the plane waves.

On each element the canonical coefficient basis ``e_1, ..., e_p`` is
orthonormalised in the inner product ``<u, v> = v^H H(A_K) u`` given by the
Hermitian part of the element's diagonal block. The resulting upper
triangular ``Q_K`` are stacked into a block-diagonal ``Q`` and the system is
transformed by congruence.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .assembly import GlobalSystem, assemble
from .conditioning import hermitian_part
from .mesh import Mesh

__all__ = [
    "BlockTransform",
    "BreakdownError",
    "mgs_local",
    "block_transform",
    "global_transform",
    "recover_solution",
    "breakdown_threshold_scan",
    "DEFAULT_PIVOT_FLOOR",
]

logger = logging.getLogger(__name__)

DEFAULT_PIVOT_FLOOR = {"binary64": 1e-14, "binary32": 1e-6}
_REAL = {"binary64": np.float64, "binary32": np.float32}
_COMPLEX = {"binary64": np.complex128, "binary32": np.complex64}


class BreakdownError(RuntimeError):
    """Raised when a transform is requested from a basis that broke down."""


@dataclass(frozen=True, eq=False)
class BlockTransform:
    """Per-element MGS factors.

    ``status[K]`` is ``None`` when element ``K`` orthogonalised cleanly,
    otherwise the 1-based MGS step at which the pivot fell below the floor.
    """

    blocks: tuple[np.ndarray, ...]
    status: tuple[Optional[int], ...]
    pivot_floor: float

    @property
    def ok(self) -> bool:
        return all(s is None for s in self.status)

    @property
    def broken(self) -> list[int]:
        return [K for K, s in enumerate(self.status) if s is not None]

    def matrix(self) -> np.ndarray:
        """Dense block-diagonal ``Q``."""
        p = self.blocks[0].shape[0]
        n = p * len(self.blocks)
        Q = np.zeros((n, n), dtype=self.blocks[0].dtype)
        for K, B in enumerate(self.blocks):
            Q[K * p : (K + 1) * p, K * p : (K + 1) * p] = B
        return Q


def mgs_local(A_K, pivot_floor: Optional[float] = None) -> tuple[np.ndarray, Optional[int]]:
    """Modified Gram-Schmidt of the unit vectors in the ``H(A_K)`` inner product.

    Arithmetic runs in the precision of ``A_K`` (complex64 or complex128).
    Returns ``(Q_K, status)``: ``Q_K`` upper triangular with positive real
    diagonal and ``Q_K^H H(A_K) Q_K = I`` if ``status`` is ``None``. At step
    ``j`` a breakdown is declared when the squared norm left after projection
    is at most ``pivot_floor`` times the first pivot ``H[0, 0]``; the column is then normalised by
    ``sqrt(|norm^2|)`` anyway (or left as is if that is zero) so that callers
    can still inspect what a plain implementation would have produced.
    """
    A_K = np.asarray(A_K)
    precision = "binary32" if A_K.dtype in (np.complex64, np.float32) else "binary64"
    ctype, rtype = _COMPLEX[precision], _REAL[precision]
    if pivot_floor is None:
        pivot_floor = DEFAULT_PIVOT_FLOOR[precision]
    H = hermitian_part(A_K.astype(ctype))
    p = H.shape[0]
    Q = np.zeros((p, p), dtype=ctype)
    status = None
    first = rtype(H[0, 0].real)
    for j in range(p):
        v = np.zeros(p, dtype=ctype)
        v[j] = 1
        for i in range(j):
            q = Q[:, i]
            v = v - (q.conj() @ (H @ v)) * q
        nrm2 = rtype((v.conj() @ (H @ v)).real)
        if nrm2 <= rtype(pivot_floor) * first and status is None:
            status = j + 1
        scale = np.sqrt(abs(nrm2))
        Q[:, j] = v / scale if scale > 0 else v
    return Q, status


def block_transform(system: GlobalSystem, pivot_floor: Optional[float] = None) -> BlockTransform:
    """Run :func:`mgs_local` on every diagonal block of ``system``."""
    if pivot_floor is None:
        pivot_floor = DEFAULT_PIVOT_FLOOR[system.precision]
    blocks, status = [], []
    for K in range(system.n_elements):
        Q, s = mgs_local(system.block(K, K), pivot_floor)
        blocks.append(Q)
        status.append(s)
    T = BlockTransform(tuple(blocks), tuple(status), float(pivot_floor))
    if not T.ok:
        logger.info("MGS breakdown on %d of %d elements", len(T.broken), system.n_elements)
    return T


def global_transform(
    system: GlobalSystem,
    T: BlockTransform,
    congruence: str = "hermitian",
    allow_breakdown: bool = False,
) -> GlobalSystem:
    """Transformed system ``Q^H A Q``, ``Q^H b`` (or ``Q^T`` with ``congruence='transpose'``).

    Raises :class:`BreakdownError` if any element broke down, unless
    ``allow_breakdown`` is set.
    """
    if congruence not in ("hermitian", "transpose"):
        raise ValueError("congruence must be 'hermitian' or 'transpose'")
    if not T.ok and not allow_breakdown:
        raise BreakdownError(f"MGS broke down on elements {T.broken[:10]}")
    p = system.block_size
    A = system.matrix
    dtype = A.dtype
    At = np.empty_like(A)
    bt = np.empty_like(system.rhs)
    # Q is block diagonal: right-multiply column blocks, then left-multiply row blocks
    AQ = np.empty_like(A)
    for L, QL in enumerate(T.blocks):
        AQ[:, L * p : (L + 1) * p] = A[:, L * p : (L + 1) * p] @ QL.astype(dtype)
    for K, QK in enumerate(T.blocks):
        QK = QK.astype(dtype)
        left = QK.conj().T if congruence == "hermitian" else QK.T
        At[K * p : (K + 1) * p, :] = left @ AQ[K * p : (K + 1) * p, :]
        bt[K * p : (K + 1) * p] = left @ system.rhs[K * p : (K + 1) * p]
    return system.with_arrays(At, bt)


def recover_solution(T: BlockTransform, coeffs_t) -> np.ndarray:
    """Map coefficients in the orthogonalised basis back: ``u = Q u~``."""
    coeffs_t = np.asarray(coeffs_t)
    p = T.blocks[0].shape[0]
    out = np.empty_like(coeffs_t)
    for K, QK in enumerate(T.blocks):
        out[K * p : (K + 1) * p] = QK.astype(coeffs_t.dtype) @ coeffs_t[K * p : (K + 1) * p]
    return out


def breakdown_threshold_scan(
    mesh: Mesh,
    k: float,
    ps: Iterable[int],
    precision: str = "binary64",
    pivot_floor: Optional[float] = None,
    theta0: float = 0.0,
) -> Optional[int]:
    """Smallest ``p`` in ``ps`` for which any element's MGS breaks down.

    Only the diagonal blocks are needed, so the matrix is assembled once per
    ``p`` and rounded to ``precision`` before orthogonalising. Returns
    ``None`` when no breakdown occurs in the range.
    """
    from .solvers import precision_cast

    ps = list(ps)
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise ValueError("p range must be strictly increasing")
    for p in ps:
        system = precision_cast(assemble(mesh, k, p, theta0), precision)
        if not block_transform(system, pivot_floor).ok:
            return p
    return None
