"""
Mass-matrix conditioning and element shape
==========================================

Plane waves on a fixed element become nearly parallel as p grows. How
fast depends on the element: regular polygons with more sides behave
better, thin rectangles worse.
"""

import numpy as np

from pwdgcond import aniso_rectangle, mass_cond, regular_polygon

k, p = 10.0, 15

# regular n-gons inscribed in a circle of diameter 1
for n in (3, 4, 5, 6, 8, 12, 16, 32, 64):
    P = regular_polygon(n, 1.0, size="circumdiameter")
    print(f"{n:3d}-gon   area {P.area:.3f}   cond2(M_K) {mass_cond(P, k, p):10.1f}")

# rectangles of diagonal 1, stretched along x
for a in (1, 2, 4, 8, 16):
    P = aniso_rectangle(a, 1.0)
    print(f"aspect {a:2d}   cond2(M_K) {mass_cond(P, k, p):12.1f}")

# one plane wave: a 1 x 1 Gram matrix, perfectly conditioned
print(mass_cond(regular_polygon(5, 1.0), k, 1))

# the closed-form Gram matrix is Hermitian with the area on the diagonal
from pwdgcond import PlaneWaveBasis, local_mass_matrix

P = regular_polygon(6, 1.0)
M = local_mass_matrix(P, PlaneWaveBasis.on(P, k, 7))
print(np.allclose(M, M.conj().T), np.allclose(np.diag(M), P.area))
