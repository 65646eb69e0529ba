"""Exterior Schwarz-Christoffel maps and Laurent coefficients.

The exterior map of the unit disk onto the complement of a polygon is

    F(z) = d1 * G(z) + d0,   G'(z) = prod_j (1 - e_j / z) ** gamma_j,

with prevertices ``e_j = exp(1j * theta_j)`` and ``gamma_j = alpha_j - 1``,
``sum(gamma_j) = 2``.  ``G(z) = z + O(1/z)`` is fixed by requiring no constant
term, so ``d0`` carries the translation.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import least_squares
from scipy.special import binom, roots_jacobi

from .errors import AccuracyError, ConditioningWarning, DomainError, NonconvergenceError
from .polygeom import Polygon, is_convex, make_polygon

TWO_PI = 2 * np.pi
VERTEX_SNAP = 1e-10


# --------------------------------------------------------------------------
# quadrature helpers


@lru_cache(maxsize=256)
def _jacobi_rule(q: int, right: float, left: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi rule for weight (1 - x)**right * (1 + x)**left on [-1, 1]."""
    if right == 0.0 and left == 0.0:
        x, w = np.polynomial.legendre.leggauss(q)
    else:
        x, w = roots_jacobi(q, right, left)
    return x, w


def _complex_log1p(x: np.ndarray) -> np.ndarray:
    # Kahan's trick; numpy's complex log1p loses relative accuracy near 0
    u = 1.0 + x
    small = u == 1.0
    denom = np.where(small, 1.0, u - 1.0)
    return np.where(small, x, np.log(u) * x / denom)


def _graded_breaks(a: float, b: float, h_left: float | None, h_right: float | None) -> np.ndarray:
    """Breakpoints on [a, b] refined geometrically (ratio 2) toward graded ends."""
    mid = 0.5 * (a + b)
    pts = [a, mid, b]
    if h_left is not None:
        h = min(h_left, 0.25 * (b - a))
        while a + h < mid:
            pts.append(a + h)
            h *= 2
    if h_right is not None:
        h = min(h_right, 0.25 * (b - a))
        while b - h > mid:
            pts.append(b - h)
            h *= 2
    return np.unique(np.array(pts))


def _panel_nodes(breaks: np.ndarray, q: int, left_exp: float, right_exp: float):
    """Nodes and weights on composite panels with Jacobi endpoint weights.

    The returned ``logw`` holds the log of the weight function that the rule
    absorbs at each node; the integrand must be divided by ``exp(logw)``.
    """
    nodes, weights, logw = [], [], []
    last = len(breaks) - 2
    for i, (s0, s1) in enumerate(zip(breaks[:-1], breaks[1:])):
        gl = left_exp if i == 0 else 0.0
        gr = right_exp if i == last else 0.0
        x, w = _jacobi_rule(q, float(gr), float(gl))
        h = 0.5 * (s1 - s0)
        nodes.append(s0 + h * (1 + x))
        weights.append(h * w)
        lw = np.zeros_like(x)
        if gl:
            lw += gl * np.log1p(x)
        if gr:
            lw += gr * np.log1p(-x)
        logw.append(lw)
    return np.concatenate(nodes), np.concatenate(weights), np.concatenate(logw)


def _log_boundary_factor(thetas: np.ndarray, gammas: np.ndarray, t: np.ndarray) -> np.ndarray:
    """log of prod_k (1 - exp(i(theta_k - t)))**gamma_k on the unit circle."""
    u = np.mod(thetas[None, :] - t[:, None], TWO_PI)
    logs = np.log(2 * np.sin(0.5 * u)) + 1j * (0.5 * u - 0.5 * np.pi)
    return logs @ gammas


# --------------------------------------------------------------------------
# Laurent series


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """Coefficients of ``F(z) = z + b[0] + sum_{k>=1} b[k] z**-k``.

    Attributes
    ----------
    b : ndarray
        Complex coefficients ``b_0 .. b_M``.
    source_radius : float or None
        Sampling radius of an FFT extraction; None for exact series.
    method : str
        Provenance tag.
    lead : complex
        Coefficient of ``z`` seen by the extraction (1 for Sigma0 maps).
    consistency : float
        Relative disagreement between two extraction radii (0 when exact).
    """

    b: np.ndarray
    source_radius: float | None = None
    method: str = "exact"
    lead: complex = 1.0
    consistency: float = 0.0

    def __post_init__(self):
        b = np.array(self.b, dtype=complex)
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @property
    def M(self) -> int:
        return len(self.b) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        w = 1.0 / z
        # Horner in 1/z over b_M .. b_1
        acc = np.zeros_like(z)
        for bk in self.b[:0:-1]:
            acc = (acc + bk) * w
        return z + self.b[0] + acc

    def area_sum(self) -> float:
        """``sum_{k>=1} k |b_k|**2``, at most 1 for univalent maps."""
        k = np.arange(1, self.M + 1)
        return float(np.sum(k * np.abs(self.b[1:]) ** 2))

    def dilate(self, t: complex) -> "LaurentSeries":
        """Series of ``t * F(z / t)``."""
        k = np.arange(self.M + 1)
        b = self.b * np.power(complex(t), k + 1)
        return LaurentSeries(b, self.source_radius, self.method + "+dilate", self.lead, self.consistency)

    def rotate(self, theta: float) -> "LaurentSeries":
        """Series of ``exp(-1j*theta) * F(exp(1j*theta) * z)``."""
        k = np.arange(self.M + 1)
        b = self.b * np.exp(-1j * theta * (k + 1))
        return LaurentSeries(b, self.source_radius, self.method + "+rotate", self.lead, self.consistency)

    def translate(self, c: complex) -> "LaurentSeries":
        b = self.b.copy()
        b[0] += c
        return LaurentSeries(b, self.source_radius, self.method, self.lead, self.consistency)

    def to_json(self) -> dict:
        return {
            "b": [[float(v.real), float(v.imag)] for v in self.b],
            "method": self.method,
            "sourceRadius": self.source_radius,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LaurentSeries":
        try:
            b = [complex(float(x), float(y)) for x, y in data["b"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed series JSON: {exc}") from exc
        if not b:
            raise ValueError("series JSON has no coefficients")
        return cls(np.array(b), data.get("sourceRadius"), data.get("method", "file"))


def joukowski_series(c: complex, M: int = 8) -> LaurentSeries:
    """Series of ``z + c/z``, the exterior map onto an ellipse."""
    b = np.zeros(M + 1, dtype=complex)
    if M >= 1:
        b[1] = c
    return LaurentSeries(b, method="closed-form")


def identity_series(M: int = 8) -> LaurentSeries:
    return LaurentSeries(np.zeros(M + 1, dtype=complex), method="closed-form")


def laurent_coeffs(
    f: Callable[[np.ndarray], np.ndarray],
    R: float = 1.2,
    M: int = 32,
    K: int | None = None,
    check: bool = True,
    rtol: float = 1e-6,
) -> LaurentSeries:
    """Extract ``b_0 .. b_M`` of a map of the exterior disk by FFT on ``|z| = R``.

    Parameters
    ----------
    f : callable
        Vectorized map, holomorphic on ``|z| >= R' `` for some ``R' < R``.
    R : float
        Sampling radius, must exceed 1.
    M : int
        Highest coefficient index returned.
    K : int, optional
        Number of samples, defaults to ``8 * M`` (at least ``4 * M``).
    check : bool
        Re-extract at ``1.25 * R`` and raise when the two disagree.
    rtol : float
        Allowed relative disagreement ``max|db| / max(1, max|b|)``.

    Raises
    ------
    AccuracyError
        The two-radius extraction is inconsistent.
    """
    if R <= 1:
        raise DomainError("sampling radius must exceed 1")
    K = K or max(8 * M, 64)
    if K < 4 * M:
        raise ValueError("need at least 4*M samples")

    def extract(radius):
        theta = TWO_PI * np.arange(K) / K
        vals = np.asarray(f(radius * np.exp(1j * theta)), dtype=complex)
        # fft gives sum f exp(-i k theta); negative powers live at +k of ifft
        spec = np.fft.ifft(vals)
        k = np.arange(M + 1)
        b = spec[k] * radius ** k
        lead = np.fft.fft(vals)[1] / K / radius
        return b, lead

    b, lead = extract(R)
    consistency = 0.0
    if check:
        b2, _ = extract(1.25 * R)
        consistency = float(np.max(np.abs(b - b2)) / max(1.0, float(np.max(np.abs(b)))))
        if consistency > rtol:
            raise AccuracyError(
                f"Laurent extraction inconsistent between radii {R:g} and {1.25 * R:g} "
                f"(relative disagreement {consistency:.2e}); increase R or K"
            )
    return LaurentSeries(b, source_radius=R, method="fft", lead=complex(lead), consistency=consistency)


def trace_series(trace: Callable[[np.ndarray], np.ndarray], M: int = 32, K: int = 1024, tol: float = 1e-10):
    """Normalized series of a map of the exterior disk from its boundary trace.

    ``trace(theta)`` must be the boundary value ``F(exp(1j*theta))`` of a map
    ``a*z + c0 + c1/z + ...``.  Positive frequencies above 1 indicate that it
    is not, and raise :class:`AccuracyError`.

    Returns
    -------
    series : LaurentSeries
        Coefficients of ``F / a``.
    a : complex
        Leading coefficient.
    """
    theta = TWO_PI * np.arange(K) / K
    c = np.fft.fft(np.asarray(trace(theta), dtype=complex)) / K
    a = c[1]
    positive = np.abs(c[2 : K // 2]).max(initial=0.0)
    if positive > tol * abs(a):
        raise AccuracyError("trace has positive frequencies above 1; not an exterior map")
    b = np.array([c[0]] + [c[-k] for k in range(1, M + 1)]) / a
    return LaurentSeries(b, source_radius=1.0, method="trace-fft"), complex(a)


# --------------------------------------------------------------------------
# Schwarz-Christoffel map


@dataclass(frozen=True)
class SolverOptions:
    """Options for :func:`solve_parameters`.

    ``tol`` bounds the log side-length-ratio residual, ``sv_tol`` the
    single-valuedness residual ``|sum gamma_j e_j|``.
    """

    tol: float = 1e-9
    sv_tol: float = 1e-8
    vertex_tol: float = 1e-8
    max_iter: int = 200
    nodes: int = 20
    aspect_warn: float = 20.0


@dataclass(frozen=True, eq=False)
class ScExteriorMap:
    """Solved exterior Schwarz-Christoffel map ``F = d1*G + d0``.

    Attributes
    ----------
    thetas : ndarray
        Prevertex angles, ``thetas[0] == 0``, strictly increasing.
    alpha_ext : ndarray
        Exterior parameters; ``alpha_ext - 1`` are the integrand exponents.
    d0, d1 : complex
        Translation and similarity constants.
    polygon : Polygon
        Image polygon (the input polygon scaled by ``similarity``).
    residuals : dict
        Solver residuals.
    similarity : complex
        Factor by which the solved input polygon was multiplied.
    """

    thetas: np.ndarray
    alpha_ext: np.ndarray
    d0: complex
    d1: complex
    polygon: Polygon
    residuals: dict = field(default_factory=dict)
    similarity: complex = 1.0
    nodes: int = 20

    @property
    def gammas(self) -> np.ndarray:
        return np.asarray(self.alpha_ext) - 1.0

    @property
    def prevertices(self) -> np.ndarray:
        return np.exp(1j * np.asarray(self.thetas))

    def to_json(self) -> dict:
        return {
            "thetas": [float(t) for t in self.thetas],
            "alphaExt": [float(a) for a in self.alpha_ext],
            "d0": [self.d0.real, self.d0.imag],
            "d1": [self.d1.real, self.d1.imag],
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "vertices": self.polygon.to_json()["vertices"],
        }

    def laurent_series(self, M: int) -> LaurentSeries:
        """Exact series of the Sigma0-normalized map ``F / d1``.

        Coefficients come from the binomial expansion of the integrand; the
        normalized constant term is ``d0 / d1``.
        """
        c = _integrand_series(self.thetas, self.gammas, M + 1)
        b = np.zeros(M + 1, dtype=complex)
        k = np.arange(1, M + 1)
        b[1:] = c[k + 1] / (-k)
        b[0] = self.d0 / self.d1
        return LaurentSeries(b, method="sc-binomial")


def _integrand_series(thetas, gammas, M: int) -> np.ndarray:
    """Coefficients c_0..c_M of prod_j (1 - e_j w)**gamma_j in powers of w."""
    k = np.arange(M + 1)
    c = np.zeros(M + 1, dtype=complex)
    c[0] = 1.0
    for t, g in zip(thetas, gammas):
        c = np.convolve(c, binom(g, k) * (-np.exp(1j * t)) ** k)[: M + 1]
    return c


def _edge_vectors(thetas: np.ndarray, gammas: np.ndarray, q: int) -> np.ndarray:
    """Complex edge vectors G(e_{j+1}) - G(e_j) by arc integrals of G'."""
    n = len(thetas)
    ext = np.concatenate([thetas, [thetas[0] + TWO_PI]])
    gaps = np.diff(ext)
    out = np.empty(n, dtype=complex)
    for j in range(n):
        t0, t1 = ext[j], ext[j + 1]
        # grade toward each end down to half the neighbouring gap, which
        # resolves nearby prevertices when they crowd
        hl = 0.5 * gaps[j - 1] if n > 2 else None
        hr = 0.5 * gaps[(j + 1) % n] if n > 2 else None
        breaks = _graded_breaks(t0, t1, hl, hr)
        t, w, logw = _panel_nodes(breaks, q, gammas[j], gammas[(j + 1) % n])
        logf = _log_boundary_factor(thetas, gammas, t)
        vals = 1j * np.exp(1j * t + logf - logw)
        out[j] = np.sum(w * vals)
    return out


def _ray_integral(z: np.ndarray, prevertices: np.ndarray, gammas: np.ndarray, q: int,
                  vertex_exp: float | None = None) -> np.ndarray:
    """G(z) for points sharing one grading level, via the ray from infinity.

    ``G(z) = z - z * int_0^1 (G'(z/u) - 1) du / u**2``.
    """
    dist = np.min(np.abs(z[:, None] - prevertices[None, :]))
    if vertex_exp is not None:
        # z is a prevertex: the nearest other prevertex sets the grading
        d = np.abs(z[0] - prevertices)
        dist = np.min(d[d > VERTEX_SNAP])
    breaks = _graded_breaks(0.0, 1.0, None, 0.5 * dist)
    u, w, logw = _panel_nodes(breaks, q, 0.0, vertex_exp or 0.0)
    ratio = prevertices[None, None, :] * u[None, :, None] / z[:, None, None]
    logs = _complex_log1p(-ratio) @ gammas
    if vertex_exp is not None:
        last = u > breaks[-2]
        logs[:, last] -= logw[last]
        vals = np.expm1(logs)
        # the weight (1 - u)**g was absorbed; "- 1" must be integrated separately
        vals[:, last] = np.exp(logs[:, last])
        integral = (vals / u ** 2) @ w
        # exact integral of -1/u**2 over the last panel, Jacobi weight removed
        a, b = breaks[-2], breaks[-1]
        integral -= 1.0 / a - 1.0 / b
        return z - z * integral
    vals = np.expm1(logs) / u[None, :] ** 2
    return z - z * (vals @ w)


def _eval_G(z: np.ndarray, prevertices: np.ndarray, gammas: np.ndarray, q: int) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty_like(z)
    dist = np.min(np.abs(z[:, None] - prevertices[None, :]), axis=1)
    level = np.ceil(np.log2(1.0 / np.maximum(dist, VERTEX_SNAP))).astype(int)
    for lv in np.unique(level):
        sel = level == lv
        out[sel] = _ray_integral(z[sel], prevertices, gammas, q)
    return out


def _vertex_images(prevertices: np.ndarray, gammas: np.ndarray, q: int) -> np.ndarray:
    return np.array([
        _ray_integral(np.array([e]), prevertices, gammas, q, vertex_exp=float(g))[0]
        for e, g in zip(prevertices, gammas)
    ])


def _thetas_from(y: np.ndarray) -> np.ndarray:
    logs = np.concatenate([[0.0], y])
    g = np.exp(logs - logs.max())
    g = g / g.sum() * TWO_PI
    return np.concatenate([[0.0], np.cumsum(g)[:-1]])


def solve_parameters(P: Polygon, opts: SolverOptions | None = None) -> ScExteriorMap:
    """Solve the exterior parameter problem for a polygon.

    Unknowns are the logarithms of the prevertex gaps with ``theta_1 = 0``;
    the equations match side-length ratios and impose single-valuedness
    ``sum gamma_j e_j = 0``.  A Levenberg-Marquardt iteration with a
    finite-difference Jacobian solves them, then ``d0, d1`` follow from a
    linear fit of the vertex images.

    Raises
    ------
    NonconvergenceError
        Residuals above tolerance after ``opts.max_iter`` iterations.
    """
    opts = opts or SolverOptions()
    if not is_convex(P):
        warnings.warn("exterior solver is specified for convex targets", UserWarning, stacklevel=2)
    if P.aspect_ratio > opts.aspect_warn:
        warnings.warn(
            f"aspect ratio {P.aspect_ratio:.1f} > {opts.aspect_warn:g}: prevertex crowding "
            "may degrade conditioning",
            ConditioningWarning,
            stacklevel=2,
        )
    n = P.n
    gam = np.asarray(P.alpha_ext) - 1.0
    L = P.side_lengths
    target = np.log(L[1:] / L[0])

    def residual(y):
        th = _thetas_from(y)
        E = np.abs(_edge_vectors(th, gam, opts.nodes))
        s = np.sum(gam * np.exp(1j * th))
        return np.concatenate([np.log(E[1:] / E[0]) - target, [s.real, s.imag]])

    y0 = np.log(L[1:] / L[0])
    sol = least_squares(residual, y0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=opts.max_iter * (n + 1))
    th = _thetas_from(sol.x)
    r = residual(sol.x)
    side_res = float(np.max(np.abs(r[:-2]))) if n > 1 else 0.0
    sv_res = float(abs(np.sum(gam * np.exp(1j * th))))
    if side_res > opts.tol or sv_res > opts.sv_tol:
        raise NonconvergenceError(
            f"parameter problem did not converge (side residual {side_res:.2e}, "
            f"single-valuedness {sv_res:.2e})",
            best_residual=max(side_res, sv_res),
        )
    e = np.exp(1j * th)
    W = _vertex_images(e, gam, opts.nodes)
    A = np.column_stack([W, np.ones(n)])
    (d1, d0), *_ = np.linalg.lstsq(A, P.z, rcond=None)
    vert_res = float(np.max(np.abs(d1 * W + d0 - P.z)))
    if vert_res > opts.vertex_tol * max(1.0, P.diameter):
        raise NonconvergenceError(f"vertex residual {vert_res:.2e} above tolerance", vert_res)
    residuals = {
        "sideRatio": side_res,
        "singleValuedness": sv_res,
        "vertex": vert_res,
        "iterations": float(sol.nfev),
    }
    return ScExteriorMap(th, np.asarray(P.alpha_ext, dtype=float), complex(d0), complex(d1), P,
                         residuals, 1.0, opts.nodes)


def eval_map(M: ScExteriorMap, z, nodes: int | None = None):
    """Evaluate ``F(z)`` for ``|z| >= 1``.

    Points within ``1e-10`` of a prevertex return the corresponding vertex.

    Raises
    ------
    DomainError
        Some ``|z| < 1``.
    """
    scalar = np.isscalar(z)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z) < 1 - 1e-14):
        raise DomainError("eval_map is defined for |z| >= 1 only")
    e = M.prevertices
    q = nodes or M.nodes
    out = np.empty_like(z)
    d = np.abs(z[:, None] - e[None, :])
    snap = d.min(axis=1) < VERTEX_SNAP
    if np.any(snap):
        out[snap] = M.polygon.z[np.argmin(d[snap], axis=1)]
    if np.any(~snap):
        out[~snap] = M.d1 * _eval_G(z[~snap], e, M.gammas, q) + M.d0
    return complex(out[0]) if scalar else out


def normalize_sigma0(M: ScExteriorMap) -> ScExteriorMap:
    """Rescale so that ``F(z) = z + b0 + O(1/z)``; the image becomes ``P / d1``."""
    if M.d1 == 1:
        return M
    scale = 1.0 / M.d1
    poly = make_polygon(M.polygon.z * scale)
    return replace(M, d0=M.d0 * scale, d1=1.0 + 0j, polygon=poly, similarity=M.similarity * scale)


def boundary_trace(M: ScExteriorMap, per_side: int = 64) -> np.ndarray:
    """Image of points spread between consecutive prevertices on ``|z| = 1``."""
    th = np.asarray(M.thetas)
    ext = np.concatenate([th, [th[0] + TWO_PI]])
    s = (np.arange(per_side) + 0.5) / per_side
    t = np.concatenate([a + (b - a) * s for a, b in zip(ext[:-1], ext[1:])])
    return eval_map(M, np.exp(1j * t))


def hausdorff_to_polygon(points: np.ndarray, P: Polygon) -> float:
    """One-sided distance from sample points to the polygon boundary."""
    z = P.z
    a, b = z, np.roll(z, -1)
    d = b - a
    s = np.clip(((points[:, None] - a[None, :]) * np.conj(d)[None, :]).real / np.abs(d) ** 2, 0, 1)
    return float(np.max(np.min(np.abs(points[:, None] - (a + s * d)[None, :]), axis=1)))


def map_from_json(data: dict, polygon: Polygon) -> ScExteriorMap:
    return ScExteriorMap(
        np.array(data["thetas"]),
        np.array(data["alphaExt"]),
        complex(*data["d0"]),
        complex(*data["d1"]),
        polygon,
        dict(data.get("residuals", {})),
    )


def dumps_map(M: ScExteriorMap) -> str:
    return json.dumps(M.to_json(), sort_keys=True)
