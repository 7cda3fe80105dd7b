"""
Assembling and solving the PWDG system
======================================

Every basis function solves the Helmholtz equation exactly, so the only
coupling lives on element edges. A plane wave in the discrete space is
reproduced to rounding error; the outgoing Hankel wave is approximated.
"""

import numpy as np

from pwdgcond import (
    ExactSolution,
    PlaneWaveSolution,
    assemble,
    impedance_data_from_exact,
    l2_error,
    lu_solve,
    unit_square_mesh,
)

k, p = 10.0, 9
mesh = unit_square_mesh("poly", 4)
print(mesh.n_elements, "elements,", len(mesh.interior_edges), "interior edges")

# a plane wave along one of the basis directions lies in the discrete space
pw = PlaneWaveSolution.from_directions(k, p, 3)
S = assemble(mesh, k, p, g=impedance_data_from_exact(pw))
u = lu_solve(S).coefficients
print("plane wave    L2 error", l2_error(mesh, u, k, p, pw))

# the model problem: H0(k |x - (-1/4, 0)|) with matching impedance data
sol = ExactSolution(k)
for p in (3, 5, 7, 9, 11):
    S = assemble(mesh, k, p, g=impedance_data_from_exact(sol))
    rep = lu_solve(S)
    print(f"p={p:2d}  N={S.n:4d}  residual {rep.relative_residual:.1e}  L2 error {l2_error(mesh, rep.coefficients, k, p, sol):.3e}")

# only neighbouring elements couple
blocks = sum(np.any(S.block(K, L) != 0) for K in range(S.n_elements) for L in range(S.n_elements))
print(blocks, "nonzero blocks of", S.n_elements**2)
