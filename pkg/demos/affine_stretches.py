"""Two successive affine stretches of the disk.

Stretching by c1 and then by c2 gives an ellipse.  Its Grunsky norm and its
1/rho both equal the dilatation of the composed stretch, (c1+c2)/(1+c1*c2),
and the explicit affine extension attains that value.
"""

from qclab.polygeom import AffineDeformation, affine_apply, beltrami_compose, unit_square
from qclab.suites import affine_family_values

for c1 in (0.2, 0.4):
    for c2 in (0.2, 0.4):
        v = affine_family_values(c1, c2)
        print(f"c1={c1} c2={c2}: kappa={v['kappa']:.12f} 1/rho={v['invRho']:.12f} "
              f"composed={v['tau']:.12f}")

print("\nthe same kind of deformation acting on the unit square:")
Q = affine_apply(AffineDeformation(1, 0.5, 0), unit_square())
print("  vertices:", [complex(round(z.real, 12), round(z.imag, 12)) for z in Q.z])
print("  composing 0.3 with 0.2 gives", complex(beltrami_compose(0.3, 0.2)))
