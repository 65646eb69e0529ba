"""Grunsky norm from Laurent coefficients.

For the ellipse map ``z + c/z`` the Grunsky matrix is diagonal with entries
``c**m`` and its norm is exactly c.  For a polygon the matrix is dense and
the truncated norms creep upward only logarithmically in the order N, so
the limit is extrapolated from the nested truncations.  The printed table
shows why a fixed-order answer would be misleading for the square.
"""

import numpy as np

from qclab.experiments import kappa_estimate, polygon_orders
from qclab.ext_scmap import joukowski_series, solve_parameters
from qclab.grunsky import grunsky_from_series, grunsky_norm
from qclab.polygeom import unit_square

print("ellipse maps z + c/z at order 32")
for c in (0.1, 0.4, 0.7):
    kappa = grunsky_norm(grunsky_from_series(joukowski_series(c, 80), 32)).kappa
    print(f"  c = {c}: kappa = {kappa:.15f}")

N = 512
print(f"\nunit square, nested truncations up to N = {N}")
G = grunsky_from_series(solve_parameters(unit_square()).laurent_series(2 * N), N)
print(f"  Faber vs 2-D FFT cross-check: {G.provenance['crossCheckDiff']:.1e}")
est = kappa_estimate(G, polygon_orders(N))
for n, s in est.by_size:
    print(f"  N = {n:4d}: sigma_max = {s:.6f}")
print(f"  extrapolated kappa = {est.kappa:.5f} +- {est.error_bar:.1e}")
print(f"  largest row norm = {G.row_norms().max():.4f}")
print(f"  symmetric to {np.max(np.abs(G.beta - G.beta.T)):.1e}")
