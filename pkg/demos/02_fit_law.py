"""
An empirical law for cond2(M_K)
===============================

On a square of side h the condition number of the local mass matrix
roughly follows 2.34^(p ln p) / (hk)^(p-1). The ratio stays between 1 and
10 over a wide range of h, k and odd p.
"""

from pwdgcond import fit_scan, fit_value

rows = fit_scan([0.5, 0.25, 0.125], [5, 10, 20], [5, 9, 13, 17], convention="side")
for r in rows:
    print(f"h={r.h:<6} k={r.k:<5} p={r.p:<3} cond2={r.cond2:10.3e}  fit={r.fit:10.3e}  ratio={r.ratio:6.2f}")

inside = sum(1 <= r.ratio <= 10 for r in rows)
print(f"{inside} of {len(rows)} ratios in [1, 10]")

# the law itself, worked once by hand: 2.34^(2 ln 2) at h = k = 1
print(fit_value(1.0, 1.0, 2))
