"""Schwarzian derivatives of half-plane Schwarz-Christoffel maps.

For ``f'(z) = prod (z - a_j)**mu_j`` with ``mu_j = alpha_j - 1`` the
pre-Schwarzian is ``b(z) = sum mu_j / (z - a_j)`` and the Schwarzian is
``b' - b**2/2``.  The module also provides B-norm sampling on the upper
half-plane, the harmonic Beltrami coefficients built from a Schwarzian, and
the radius ``r0`` below which scaled Schwarzians stay univalent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, InfiniteNormError

SUM_TOL = 1e-10


def square_prevertices() -> np.ndarray:
    """Symmetric real prevertices of the square: ``(-1/k, -1, 1, 1/k)``, ``k = 3 - 2*sqrt(2)``.

    With interior angles ``pi/2`` these give four equal sides.
    """
    k = 3 - 2 * math.sqrt(2)
    return np.array([-1 / k, -1.0, 1.0, 1 / k])


def _check_upper(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise DomainError("evaluation point must lie in the open upper half-plane")
    return z


@dataclass(frozen=True, eq=False)
class SchwarzianData:
    """Parameters of a half-plane SC map of a convex polygon.

    Attributes
    ----------
    a : ndarray
        Strictly increasing real prevertices.
    alpha_int : ndarray
        Interior angles over pi, each in (0, 1).
    C : ndarray
        Tabulated diagonal coefficients ``mu - mu**2/2`` with ``mu = alpha - 1``.
    Cpair : ndarray
        Products ``mu_j * mu_l``.
    """

    a: np.ndarray
    alpha_int: np.ndarray
    C: np.ndarray
    Cpair: np.ndarray

    @property
    def mu(self) -> np.ndarray:
        return self.alpha_int - 1.0

    def pre_schwarzian(self, z):
        z = _check_upper(z)
        return np.sum(self.mu / (z[..., None] - self.a), axis=-1)

    def __call__(self, z):
        """Schwarzian ``b' - b**2/2`` of the map at points of the upper half-plane."""
        return s_fn_t(self, 1.0)(z)

    def tabulated_form(self, z):
        """The tabulated rational form ``sum C_j/(z-a_j)**2 - sum_{j<l} Cpair_jl/((z-a_j)(z-a_l))``.

        It differs from :meth:`__call__` in the sign of the linear part of
        the diagonal coefficient and corresponds to the reciprocal exponents
        ``f' = prod (z - a_j)**(1 - alpha_j)``.
        """
        z = _check_upper(z)
        d = 1.0 / (z[..., None] - self.a)
        diag = np.sum(self.C * d ** 2, axis=-1)
        iu = np.triu_indices(len(self.a), 1)
        pair = np.sum(self.Cpair[iu] * d[..., iu[0]] * d[..., iu[1]], axis=-1)
        return diag - pair

    def to_json(self) -> dict:
        return {
            "a": self.a.tolist(),
            "alphaInt": self.alpha_int.tolist(),
            "C": self.C.tolist(),
            "Cpair": self.Cpair.tolist(),
            "r0": r0_root(self.alpha_int),
            "r0Exclusive": r0_root(self.alpha_int, inclusive=False),
        }


def _check_convex_params(alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha >= 1) or np.any(alpha <= 0):
        raise DomainError("interior parameters must lie in (0, 1) for a convex polygon")
    if abs(np.sum(alpha - 1) + 2) > SUM_TOL:
        raise DomainError(f"sum of (alpha_j - 1) is {np.sum(alpha - 1):.12g}, expected -2")
    return alpha


def halfplane_schwarzian(a, alpha_int) -> SchwarzianData:
    """Build :class:`SchwarzianData` after checking the angle sum and ordering.

    Raises
    ------
    DomainError
        Non-increasing prevertices, a non-convex angle, or ``sum(alpha-1) != -2``.
    """
    a = np.asarray(a, dtype=float)
    alpha = _check_convex_params(alpha_int)
    if a.shape != alpha.shape:
        raise DomainError("need one prevertex per angle")
    if np.any(np.diff(a) <= 0) or not np.all(np.isfinite(a)):
        raise DomainError("prevertices must be finite and strictly increasing")
    mu = alpha - 1
    return SchwarzianData(a, alpha, mu - mu ** 2 / 2, np.outer(mu, mu))


def s_fn_t(data: SchwarzianData, t: float) -> Callable:
    """Evaluator of ``t*b' - b**2/2``."""

    def evaluate(z):
        z = _check_upper(z)
        d = 1.0 / (z[..., None] - data.a)
        b = np.sum(data.mu * d, axis=-1)
        db = -np.sum(data.mu * d ** 2, axis=-1)
        return t * db - 0.5 * b * b

    return evaluate


def r0_root(alpha_int, inclusive: bool = True) -> float:
    """Positive root of ``A r**2 - sum(mu) r - 2 = 0`` with ``mu = alpha - 1``.

    ``A = (sum mu**2 + sum_{j,l} mu_j mu_l)/2``; the double sum runs over all
    ordered pairs when ``inclusive`` and skips ``j == l`` otherwise.
    """
    alpha = _check_convex_params(alpha_int)
    mu = alpha - 1
    s1, s2 = mu.sum(), np.sum(mu ** 2)
    pairs = s1 ** 2 if inclusive else s1 ** 2 - s2
    A = 0.5 * (s2 + pairs)
    disc = s1 ** 2 + 8 * A
    assert disc > 0 and A > 0
    return float((s1 + math.sqrt(disc)) / (2 * A))


# --------------------------------------------------------------------------
# B-norm sampling


@dataclass(frozen=True)
class SamplerOptions:
    """Grid for sampling the upper half-plane.

    ``x`` is uniform on ``center +- halfwidth``; ``y`` is logarithmic on
    ``y_range``.  Refinement zooms on the running maximizer until halving
    the step changes the estimate by less than ``rtol`` relatively.
    """

    center: float = 0.0
    halfwidth: float = 20.0
    y_range: tuple = (1e-4, 1e3)
    nx: int = 401
    ny: int = 141
    rtol: float = 1e-6
    max_rounds: int = 80
    extensions: int = 4


def _sup_upper(g: Callable, opts: SamplerOptions) -> tuple[float, complex]:
    """Sampled supremum of a nonnegative function on the upper half-plane."""

    def coarse(x0, hw, ylo, yhi):
        x = np.linspace(x0 - hw, x0 + hw, opts.nx)
        y = np.geomspace(ylo, yhi, opts.ny)
        Z = x[None, :] + 1j * y[:, None]
        V = g(Z)
        V = np.where(np.isfinite(V), V, -np.inf)
        i = np.unravel_index(np.argmax(V), V.shape)
        return float(V[i]), complex(Z[i]), i

    x0, hw = opts.center, opts.halfwidth
    ylo, yhi = opts.y_range
    best, zb, idx = coarse(x0, hw, ylo, yhi)
    prev_vals = [best]
    for _ in range(opts.extensions):
        on_edge = idx[0] in (0, opts.ny - 1) or idx[1] in (0, opts.nx - 1)
        if not on_edge:
            break
        ylo, yhi, hw = ylo / 100, yhi * 10, hw * 10
        best, zb, idx = coarse(x0, hw, ylo, yhi)
        prev_vals.append(best)
    else:
        if len(prev_vals) > 2 and prev_vals[-1] > 1.01 * prev_vals[-2] > 1.01 * prev_vals[-3] > 0:
            raise InfiniteNormError("sampled B-norm keeps growing as the domain is enlarged")

    # zoom around the maximizer in (x, log y)
    hx = 2 * hw / (opts.nx - 1)
    hl = math.log(yhi / ylo) / (opts.ny - 1)
    m = 5
    for _ in range(opts.max_rounds):
        xs = zb.real + hx * np.arange(-m, m + 1)
        ys = zb.imag * np.exp(hl * np.arange(-m, m + 1))
        Z = xs[None, :] + 1j * ys[:, None]
        V = g(Z)
        V = np.where(np.isfinite(V), V, -np.inf)
        i = np.unravel_index(np.argmax(V), V.shape)
        val = float(V[i])
        changed = val - best
        if val > best:
            best, zb = val, complex(Z[i])
        if i[0] in (0, 2 * m) or i[1] in (0, 2 * m):
            continue  # still walking toward the maximum
        hx, hl = hx / 2, hl / 2
        if changed <= opts.rtol * best:
            break

    # a last local polish can only raise the lower bound
    def neg(p):
        v = g(np.array([p[0] + 1j * math.exp(p[1])]))[0]
        return -v if np.isfinite(v) else 0.0

    res = minimize(neg, [zb.real, math.log(zb.imag)], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 2000})
    if -res.fun > best:
        best, zb = float(-res.fun), complex(res.x[0] + 1j * math.exp(res.x[1]))
    return best, zb


def bnorm(phi: Callable, opts: SamplerOptions | None = None) -> float:
    """Sampled lower bound for ``sup_H |z - conj(z)|**2 |phi(z)|``.

    Raises
    ------
    InfiniteNormError
        The sampled values grow without bound as the window is enlarged.
    """
    opts = opts or SamplerOptions()
    return _sup_upper(lambda Z: 4 * Z.imag ** 2 * np.abs(phi(Z)), opts)[0]


@dataclass(frozen=True)
class HarmonicBeltrami:
    """Beltrami coefficient ``scale * y**2 * phi(conj(z))`` on the lower half-plane."""

    phi: Callable
    scale: float = -2.0

    def __call__(self, z):
        return ahlfors_weill_mu(self.phi, z, self.scale)


def ahlfors_weill_mu(phi: Callable, z, scale: float = -2.0):
    """Value ``scale * y**2 * phi(conj(z))`` with ``y = Im conj(z)`` for ``Im z < 0``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag >= 0):
        raise DomainError("Beltrami coefficient is evaluated in the lower half-plane")
    w = np.conj(z)
    return scale * w.imag ** 2 * phi(w)


def mu_supnorm(mu: HarmonicBeltrami, opts: SamplerOptions | None = None) -> float:
    """Sampled ``sup |mu|`` over the lower half-plane (same grid as :func:`bnorm`)."""
    opts = opts or SamplerOptions()
    return _sup_upper(lambda Z: np.abs(mu(np.conj(Z))), opts)[0]


def predicted_common_norm(data: SchwarzianData, r: float, opts: SamplerOptions | None = None) -> dict:
    """Scalar ``(r/2) * ||S_{t=r0}||_B`` for ``0 < r < r0``.

    This is the value that the dilatation and the Grunsky norm of the map
    with Schwarzian ``r * S_{t=r0}`` are predicted to share; it is reported,
    not verified.
    """
    r0 = r0_root(data.alpha_int)
    if not 0 < r < r0:
        raise DomainError(f"r must lie in (0, r0) = (0, {r0:.6g})")
    if opts is None:
        opts = SamplerOptions(center=float(np.mean(data.a)),
                              halfwidth=float(np.ptp(data.a)) + 2.0)
    B = bnorm(s_fn_t(data, r0), opts)
    return {"r": r, "r0": r0, "bnorm": B, "predicted": 0.5 * r * B}
