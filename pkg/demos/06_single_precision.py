"""
Single against double precision
===============================

The same experiments in binary32: the Gram-Schmidt pivots fall below the
floor at smaller p, and the direct-solve error stops improving earlier.
"""

from pwdgcond import breakdown_threshold_scan, unit_square_mesh
from pwdgcond.experiments import deterioration_onset, solve_rows

k = 10.0
mesh = unit_square_mesh("poly", 8)
ps = list(range(3, 22, 2))

for precision in ("binary32", "binary64"):
    print(precision, "MGS breakdown at p =", breakdown_threshold_scan(mesh, k, ps, precision))

for precision in ("binary32", "binary64"):
    rows = solve_rows(mesh, k, ps[:7], precision=precision)
    for r in rows:
        print(f"{precision}  p={r['p']:2d}  L2 {r['l2_err_lu_A']:.3e} / {r['l2_err_lu_At']:.3e}  breakdown {r['breakdown_flag']}")
    print("error stops improving at p =", deterioration_onset([r["p"] for r in rows], [r["l2_err_lu_A"] for r in rows]))
