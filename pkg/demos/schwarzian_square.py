"""Schwarzian derivative of the half-plane map onto the square.

With prevertices (-1/k, -1, 1, 1/k), k = 3 - 2*sqrt(2), all four sides have
equal length.  The script prints the rational coefficients, the critical
parameter r0 under both readings of its defining quadratic, the sampled
B-norm of the Schwarzian and the harmonic Beltrami coefficient it induces.
"""

from qclab.schwarzian import (
    HarmonicBeltrami,
    SamplerOptions,
    bnorm,
    halfplane_schwarzian,
    mu_supnorm,
    predicted_common_norm,
    r0_root,
    s_fn_t,
    square_prevertices,
)

D = halfplane_schwarzian(square_prevertices(), [0.5] * 4)
print("prevertices:", D.a)
print("diagonal coefficients:", D.C)
print(f"r0 = {r0_root(D.alpha_int):.16f} (diagonal included), "
      f"{r0_root(D.alpha_int, inclusive=False):.16f} (excluded)")

opts = SamplerOptions(center=0, halfwidth=8)
B = bnorm(D, opts)
print(f"B-norm of the Schwarzian: {B:.9f}")
print(f"sup |mu| of the harmonic coefficient: {mu_supnorm(HarmonicBeltrami(D), opts):.9f} (half the B-norm)")

r0 = r0_root(D.alpha_int)
S0 = s_fn_t(D, r0)
print(f"B-norm of t*b' - b^2/2 at t = r0: {bnorm(S0, opts):.6f}")
for r in (0.1, 0.3, 0.5):
    out = predicted_common_norm(D, r, opts)
    print(f"  r = {r}: predicted common norm {out['predicted']:.6f}")
