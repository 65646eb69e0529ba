"""Solve the exterior Schwarz-Christoffel map of two quadrilaterals.

The square is symmetric, so its prevertices must come out equally spaced
on the unit circle.  A generic convex quadrilateral has no such symmetry;
we check the solved map by sending points on the unit circle back to the
polygon and measuring how far they stray.  The last block prints the
leading Laurent coefficients of the map normalized to ``z + b0 + b1/z + ...``.
"""

import numpy as np

from qclab.ext_scmap import boundary_trace, eval_map, hausdorff_to_polygon, normalize_sigma0, solve_parameters
from qclab.polygeom import make_polygon, unit_square


def describe(name, P):
    M = solve_parameters(P)
    print(f"{name}: {P.n} vertices, angles/pi = {np.round(P.beta, 4)}")
    print(f"  prevertex angles / (pi/2): {np.round(M.thetas / (np.pi / 2), 10)}")
    print(f"  residuals: " + ", ".join(f"{k}={v:.1e}" for k, v in M.residuals.items()))
    gap = hausdorff_to_polygon(boundary_trace(M, 64), P)
    print(f"  boundary reconstruction error: {gap:.2e} (diameter {P.diameter:.3f})")
    far = 1e4 * np.exp(0.3j)
    print(f"  leading coefficient of the raw map: {M.d1:.6f}")
    print(f"  normalized f(z)/z at |z| = 1e4: {eval_map(normalize_sigma0(M), far) / far:.6f}")
    S = M.laurent_series(8)
    print("  normalized Laurent coefficients b0..b5:")
    for k, b in enumerate(S.b[:6]):
        print(f"    b{k} = {b.real:+.10f} {b.imag:+.10f}i")
    print(f"  area sum over 512 terms: {M.laurent_series(512).area_sum():.6f} (must stay below 1)")
    print()


if __name__ == "__main__":
    describe("unit square", unit_square())
    describe("generic quadrilateral", make_polygon([0.9 + 0.1j, 0.2 + 0.8j, -0.7 + 0.3j, -0.1 - 0.9j]))
