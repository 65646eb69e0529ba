"""Eigenvalues of the double-layer operator and the value 1/rho.

On the circle every nonunit eigenvalue vanishes.  On an ellipse with
semiaxes 1 +- c they are +-c**n, so 1/rho = c.  On the square the corners
create an essential band [-1/2, 1/2]; the largest nonunit modulus sits at
the band edge and converges slowly under mesh grading, which is why the
reported value is extrapolated over grading depth.
"""

from qclab.fredholm import MeshOptions, circle, ellipse, np_spectrum
from qclab.polygeom import make_polygon, stretch_ellipse_axes, unit_square

S = np_spectrum(circle())
print(f"circle: 1/rho = {S.inv_rho:.1e}, unit eigenvalue off by {S.unit['deviation']:.1e}")

for c in (0.25, 0.5):
    S = np_spectrum(ellipse(*stretch_ellipse_axes(c)))
    top = sorted(S.discrete, key=abs, reverse=True)[:4]
    print(f"ellipse c = {c}: 1/rho = {S.inv_rho:.12f}, leading eigenvalues {[round(v, 8) for v in top]}")

for name, P in (("square", unit_square()), ("kite", make_polygon([0, 2, 1.6 + 1.1j, 0.1 + 0.9j]))):
    S = np_spectrum(P, MeshOptions(grading=8))
    print(f"\n{name}: essential band half-width {S.band:.4f}")
    for lv in S.levels:
        print(f"  grading {lv['level']:2d} ({lv['size']:4d} nodes): top nonunit modulus {lv['top']:.6f}")
    print(f"  extrapolated 1/rho = {S.inv_rho:.6f} +- {S.error_bar:.1e}")
    print(f"  discrete eigenvalues outside the band: {[round(v, 6) for v in S.discrete]}")
