"""Independent reference computations used to derive frozen test values.

Nothing here imports the algorithms under test; each oracle follows a
different route (truncated bivariate power series, adaptive mpmath
quadrature, exact sympy arithmetic, closed-form disk moments).
"""

from __future__ import annotations

import mpmath as mp
import numpy as np
import sympy as sp


def _mul_trunc(A: np.ndarray, B: np.ndarray, N: int) -> np.ndarray:
    """Product of bivariate polynomials (arrays indexed [i, j]) truncated at degree N in each variable."""
    out = np.zeros((N + 1, N + 1), dtype=complex)
    for i in range(N + 1):
        for j in range(N + 1):
            if A[i, j] != 0:
                out[i:, j:] += A[i, j] * B[: N + 1 - i, : N + 1 - j]
    return out


def grunsky_alpha_bruteforce(b, N: int) -> np.ndarray:
    """alpha_mn (1 <= m, n <= N) from the power series of -log Q in u = 1/z, v = 1/zeta.

    ``Q = (F(z) - F(zeta))/(z - zeta) = 1 - sum_{i,j>=1} b_{i+j-1} u**i v**j``,
    expanded with ``log(1 - X) = -sum X**k / k``.
    """
    b = np.asarray(b, dtype=complex)
    X = np.zeros((N + 1, N + 1), dtype=complex)
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            if i + j - 1 < len(b):
                X[i, j] = b[i + j - 1]
    L = np.zeros_like(X)
    P = X.copy()
    for k in range(1, N + 1):
        L -= P / k
        P = _mul_trunc(P, X, N)
    return -L[1:, 1:]


def grunsky_matrix_bruteforce(b, N: int) -> np.ndarray:
    m = np.arange(1, N + 1)
    return np.sqrt(np.outer(m, m)) * grunsky_alpha_bruteforce(b, N)


def exterior_side_lengths(thetas, gammas, dps: int = 30) -> list[float]:
    """Arc integrals of ``prod |1 - e_j exp(-it)|**gamma_j`` between consecutive prevertices."""
    mp.mp.dps = dps
    th = [mp.mpf(t) for t in thetas]
    gam = [mp.mpf(g) for g in gammas]

    def speed(t):
        return mp.fprod(abs(1 - mp.expj(tj - t)) ** g for tj, g in zip(th, gam))

    ext = th + [th[0] + 2 * mp.pi]
    return [float(mp.quad(speed, [ext[k], ext[k + 1]])) for k in range(len(th))]


def halfplane_side_lengths(a, alpha, dps: int = 30) -> list[float]:
    """Side lengths of the half-plane SC map with finite prevertices a and angles alpha*pi."""
    mp.mp.dps = dps
    a = [mp.mpf(x) for x in a]
    mu = [mp.mpf(x) - 1 for x in alpha]

    def speed(x):
        return mp.fprod(abs(x - aj) ** m for aj, m in zip(a, mu))

    return [float(mp.quad(speed, [a[k], a[k + 1]])) for k in range(len(a) - 1)]


def schwarzian_exact(a, alpha, t, z):
    """Exact value of ``t*b' - b**2/2`` with ``b = sum (alpha_j - 1)/(z - a_j)``."""
    Z = sp.Symbol("Z")
    b = sum((sp.nsimplify(al) - 1) / (Z - aj) for aj, al in zip(a, alpha))
    expr = sp.nsimplify(t) * sp.diff(b, Z) - b ** 2 / 2
    return sp.nsimplify(expr.subs(Z, z))


def square_prevertices_exact():
    k = 3 - 2 * sp.sqrt(2)
    return [-1 / k, sp.Integer(-1), sp.Integer(1), 1 / k]


def monomial_pairing_matrix(coeffs: dict[int, complex], N: int) -> np.ndarray:
    """Pairing matrix for ``mu = sum c_j conj(z)**j`` using ``int_D conj(z)**j z**k dA = pi/(k+1) delta_jk``."""
    mom = np.zeros(2 * N - 1, dtype=complex)
    for j, c in coeffs.items():
        if j < len(mom):
            mom[j] = c * np.pi / (j + 1)
    n = np.arange(1, N + 1)
    return np.sqrt(np.outer(n, n)) * mom[n[:, None] + n[None, :] - 2] / np.pi


def ellipse_np_spectrum(c: float, count: int) -> np.ndarray:
    """Nonzero double-layer eigenvalues ``+-c**n`` of the ellipse with semiaxes 1 +- c."""
    n = np.arange(1, count + 1)
    return np.sort(np.concatenate([c ** n, -(c ** n)]))
