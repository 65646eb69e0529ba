"""Quadratic differentials on the disk and the alpha functional.

A unit vector x defines psi = (sum sqrt(n) x_n z**(n-1))**2 / pi, whose
integral norm over the disk equals |x|**2.  Pairing a Beltrami coefficient
with these differentials and maximizing over x gives the alpha functional;
for a constant coefficient c the maximum is |c|, attained at x = e_1.
"""

import numpy as np

from qclab.grunsky import BeltramiField, alpha_functional, pairing, quad_differential

for n in range(1, 5):
    x = np.zeros(n)
    x[-1] = 1
    q = quad_differential(x)
    print(f"e_{n}: A1 norm = {q.a1_norm:.12f}")

rng = np.random.default_rng(7)
x = rng.normal(size=4) + 1j * rng.normal(size=4)
x /= np.linalg.norm(x)
mu = BeltramiField.constant(0.3 - 0.2j)
print(f"\npairing of c = 0.3-0.2i with a random psi: {pairing(mu, quad_differential(x)):.10f}")
print(f"c * x1**2 = {(0.3 - 0.2j) * x[0] ** 2:.10f}")

for N in (2, 4, 8):
    res = alpha_functional(mu, N)
    print(f"alpha at order {N}: {res.value:.10f} (|c| = {abs(0.3 - 0.2j):.10f})")

field = BeltramiField(lambda z: 0.3 + 0.4 * np.conj(z) ** 2, 0.7)
print("\nfield 0.3 + 0.4 conj(z)^2, alpha by order:",
      [round(alpha_functional(field, N).value, 6) for N in (2, 4, 8)])
