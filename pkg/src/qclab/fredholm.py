"""Double-layer (Neumann-Poincare) spectrum by Nystrom discretization.

The kernel is ``(1/pi) d/dn_zeta log(1/|zeta - z|)`` with the outward normal,
so constants are mapped to themselves and the unit circle has spectrum
``{1, 0, 0, ...}``.  The largest modulus among the remaining eigenvalues is
the reciprocal of the Fredholm eigenvalue of the curve.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse.linalg as sla

from .errors import DomainError, ResolutionError
from .extrapolate import extrapolate_inverse_square
from .polygeom import Polygon, is_simple_closed, signed_area

UNIT_RESOLUTION = 1e-4
MAX_GRADING = 40
LADDER = (1, 2, 3, 4)


# --------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class SmoothCurve:
    """Smooth closed curve ``t -> point(t)`` on ``[0, 2*pi)``, counterclockwise.

    ``deriv`` and ``deriv2`` are the first and second parameter derivatives.
    """

    point: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    deriv2: Callable[[np.ndarray], np.ndarray]
    name: str = "curve"


def make_smooth_curve(point, deriv, deriv2, name: str = "curve", samples: int = 128) -> SmoothCurve:
    """Validate a parametric curve and orient it counterclockwise.

    Raises
    ------
    DomainError
        The sampled curve is not simple.
    """
    t = 2 * np.pi * np.arange(samples) / samples
    z = np.asarray(point(t), dtype=complex)
    if not is_simple_closed(z):
        raise DomainError("curve is not a Jordan curve")
    if signed_area(z) < 0:
        return SmoothCurve(lambda s: point(-s), lambda s: -deriv(-s), lambda s: deriv2(-s), name)
    return SmoothCurve(point, deriv, deriv2, name)


def circle(radius: float = 1.0) -> SmoothCurve:
    return make_smooth_curve(
        lambda t: radius * np.exp(1j * t),
        lambda t: 1j * radius * np.exp(1j * t),
        lambda t: -radius * np.exp(1j * t),
        name=f"circle({radius:g})",
    )


def ellipse(a: float, b: float) -> SmoothCurve:
    """Ellipse with semiaxes a (real direction) and b."""
    if a <= 0 or b <= 0:
        raise DomainError("semiaxes must be positive")
    return make_smooth_curve(
        lambda t: a * np.cos(t) + 1j * b * np.sin(t),
        lambda t: -a * np.sin(t) + 1j * b * np.cos(t),
        lambda t: -a * np.cos(t) - 1j * b * np.sin(t),
        name=f"ellipse({a:g},{b:g})",
    )


def trig_curve(coeffs: dict[int, complex], name: str = "trig") -> SmoothCurve:
    """Curve ``sum_k c_k exp(i k t)`` from a dict of Fourier coefficients."""
    ks = np.array(list(coeffs.keys()))
    cs = np.array(list(coeffs.values()), dtype=complex)

    def point(t, p=0):
        t = np.asarray(t, dtype=float)
        return np.exp(1j * np.multiply.outer(t, ks)) @ (cs * (1j * ks) ** p)

    return make_smooth_curve(lambda t: point(t), lambda t: point(t, 1), lambda t: point(t, 2), name)


# --------------------------------------------------------------------------
# discretization


@dataclass(frozen=True)
class MeshOptions:
    """Nystrom mesh parameters.

    For polygons ``panels`` counts the uniform middle panels of each side and
    ``grading`` the dyadic levels toward each corner.  For smooth curves
    ``panels`` is the total number of equal parameter panels.  ``None`` picks
    the default for the curve type.  The ``auto`` solver computes the full
    spectrum for smooth curves and the ``k`` largest eigenvalues (Arnoldi)
    for polygons.
    """

    panels: int | None = None
    grading: int = 8
    nodes: int | None = None
    solver: str = "auto"
    k: int = 12

    def resolved(self, smooth: bool) -> "MeshOptions":
        panels = self.panels if self.panels is not None else (32 if smooth else 2)
        nodes = self.nodes if self.nodes is not None else (16 if smooth else 10)
        solver = self.solver
        if solver == "auto":
            solver = "dense" if smooth else "arnoldi"
        if solver not in ("dense", "arnoldi"):
            raise ValueError("solver must be 'auto', 'dense' or 'arnoldi'")
        return MeshOptions(panels, self.grading, nodes, solver, self.k)


@dataclass
class Discretization:
    points: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    diag: np.ndarray
    lumps: list = field(default_factory=list)  # (start, end, column)


def discretize_polygon(P: Polygon, grading: int, panels: int, nodes: int) -> Discretization:
    """Graded Gauss-Legendre panels with the innermost corner panels removed.

    Each side is split at ``0.25 * 2**-k`` (k = 1..grading) from both ends plus
    ``panels`` uniform panels in the middle half.  The segment closest to each
    corner carries no nodes; its action on the density is approximated by the
    density at the nearest kept node, with the exact subtended-angle weight
    (see :func:`np_matrix`).
    """
    if not 1 <= grading <= MAX_GRADING:
        raise ValueError(f"grading depth must lie in 1..{MAX_GRADING}")
    x, w = np.polynomial.legendre.leggauss(nodes)
    z = P.z
    n = P.n
    edge = [0.25 * 0.5 ** k for k in range(1, grading + 1)]
    middle = list(np.linspace(0.25, 0.75, panels + 1))
    bp = np.array(sorted(set([0.0] + edge + middle + [1 - e for e in edge] + [1.0])))
    pts, wts, nrm, lumps = [], [], [], []
    offset = 0
    for j in range(n):
        a, b = z[j], z[(j + 1) % n]
        L = abs(b - a)
        normal = -1j * (b - a) / L
        segs = list(zip(bp[1:-2], bp[2:-1]))
        for s0, s1 in segs:
            s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * x
            pts.append(a + s * (b - a))
            wts.append(0.5 * w * (s1 - s0) * L)
            nrm.append(np.full(nodes, normal))
        count = len(segs) * nodes
        h = bp[1]
        lumps.append((a, a + h * (b - a), offset))
        lumps.append((b - h * (b - a), b, offset + count - 1))
        offset += count
    pts = np.concatenate(pts)
    return Discretization(pts, np.concatenate(wts), np.concatenate(nrm), np.zeros(len(pts)), lumps)


def discretize_smooth(C: SmoothCurve, panels: int, nodes: int) -> Discretization:
    """Equal parameter panels with Gauss-Legendre nodes; diagonal from curvature."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    h = 2 * np.pi / panels
    t = (np.arange(panels)[:, None] + 0.5 * (x[None, :] + 1)) * h
    t = t.ravel()
    wt = np.tile(0.5 * w * h, panels)
    d1 = np.asarray(C.deriv(t), dtype=complex)
    d2 = np.asarray(C.deriv2(t), dtype=complex)
    speed = np.abs(d1)
    curvature = (np.conj(d1) * d2).imag / speed ** 3
    weights = wt * speed
    normals = -1j * d1 / speed
    return Discretization(np.asarray(C.point(t), dtype=complex), weights, normals,
                          curvature / (2 * np.pi) * weights)


def np_matrix(D: Discretization) -> np.ndarray:
    """Nystrom matrix ``A[i, j] = K(z_i, z_j) w_j`` of the double-layer operator."""
    z = D.points
    d = z[None, :] - z[:, None]
    nv = D.normals[None, :]
    dist2 = np.abs(d) ** 2
    np.fill_diagonal(dist2, 1.0)
    A = (d.real * nv.real + d.imag * nv.imag) / dist2 / np.pi * D.weights[None, :]
    np.fill_diagonal(A, D.diag)
    for p0, p1, col in D.lumps:
        # (1/pi) times the angle the removed segment subtends at each target
        A[:, col] += np.angle((p1 - z) / (p0 - z)) / np.pi
    return A


def _eigenvalues(A: np.ndarray, solver: str, k: int) -> np.ndarray:
    if solver == "dense" or A.shape[0] <= 4 * k + 40:
        return np.linalg.eigvals(A)
    v0 = np.cos(0.7 * np.arange(A.shape[0])) + 0.1
    return sla.eigs(A, k=k, which="LM", v0=v0, tol=1e-13, ncv=max(3 * k, 40),
                    return_eigenvectors=False)


# --------------------------------------------------------------------------
# spectrum


@dataclass(frozen=True, eq=False)
class FredholmSpectrum:
    """Double-layer spectrum with the extracted value ``1/rho``.

    Attributes
    ----------
    eigenvalues : ndarray
        Real parts at the finest mesh, sorted (only the largest ``k`` with
        the Arnoldi solver).
    inv_rho : float
        Estimate of ``1/rho``; extrapolated over grading depth for polygons.
    inv_rho_raw : float
        Largest nonunit modulus at the finest mesh.
    error_bar : float
        Difference between the estimate and its next-coarser counterpart.
    unit : dict
        The eigenvalue matched to 1 and its deviation.
    stabilized : ndarray
        Nonunit eigenvalues reproduced within ``stab_tol`` on the next-coarser mesh.
    discrete : ndarray
        Stabilized eigenvalues outside the essential band ``[-band, band]``.
    band : float
        Half-width of the essential spectrum (``max |1 - beta_j|``, 0 for
        smooth curves).
    levels : list of dict
        Refinement ladder with the top modulus at each level.
    """

    eigenvalues: np.ndarray
    inv_rho: float
    inv_rho_raw: float
    error_bar: float
    mesh: dict
    unit: dict
    stabilized: np.ndarray
    discrete: np.ndarray
    band: float
    levels: list
    imag_max: float
    kind: str

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "invRho": self.inv_rho,
            "invRhoRaw": self.inv_rho_raw,
            "errorBar": self.error_bar,
            "mesh": self.mesh,
            "unit": self.unit,
            "band": self.band,
            "levels": self.levels,
            "imagMax": self.imag_max,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "stabilized": [float(v) for v in self.stabilized],
            "discrete": [float(v) for v in self.discrete],
        }


def _unit_record(ev: np.ndarray) -> tuple[int, dict]:
    i = int(np.argmin(np.abs(ev - 1.0)))
    dev = float(abs(ev[i] - 1.0))
    near = int(np.sum(np.abs(ev - 1.0) < 1e-6))
    return i, {"value": float(ev[i]), "deviation": dev, "countWithin1e-6": near}


def _level_spectrum(curve, mesh: MeshOptions, level: int):
    if isinstance(curve, Polygon):
        D = discretize_polygon(curve, level, mesh.panels, mesh.nodes)
    else:
        D = discretize_smooth(curve, level, mesh.nodes)
    ev = _eigenvalues(np_matrix(D), mesh.solver, mesh.k)
    imag_max = float(np.max(np.abs(ev.imag)))
    ev = np.sort(ev.real)
    i, unit = _unit_record(ev)
    if unit["deviation"] > UNIT_RESOLUTION:
        raise ResolutionError(
            f"unit eigenvalue off by {unit['deviation']:.2e} at level {level}; refine the mesh"
        )
    rest = np.delete(ev, i)
    top = float(np.max(np.abs(rest))) if rest.size else 0.0
    return ev, rest, unit, top, imag_max, len(D.points)


def np_spectrum(curve, mesh: MeshOptions | None = None, stab_tol: float = 1e-4,
                band_margin: float = 2e-4) -> FredholmSpectrum:
    """Double-layer spectrum of a polygon or smooth curve.

    Polygons are solved on grading depths ``g, 2g, 3g, 4g`` (capped at 40); the top
    modulus is extrapolated in depth from the last three levels and the
    first three give the error bar.  Smooth curves use ``panels`` and
    ``2*panels`` panels and report the finer value.

    Raises
    ------
    ResolutionError
        The eigenvalue for constants deviates from 1 by more than 1e-4.
    """
    smooth = not isinstance(curve, Polygon)
    mesh = (mesh or MeshOptions()).resolved(smooth)
    if smooth:
        levels = [mesh.panels, 2 * mesh.panels]
    else:
        g = mesh.grading
        levels = sorted({min(MAX_GRADING, int(round(g * f))) for f in LADDER})
        if len(levels) < 4:
            levels = [max(1, MAX_GRADING - 3 * 4) + 4 * i for i in range(4)]
    ladder, spectra = [], []
    for lv in levels:
        ev, rest, unit, top, imag_max, size = _level_spectrum(curve, mesh, lv)
        ladder.append({"level": lv, "size": size, "top": top})
        spectra.append((ev, rest, unit, imag_max))
    ev, rest, unit, imag_max = spectra[-1]
    prev = spectra[-2][1]
    tops = np.array([l["top"] for l in ladder])
    raw = float(tops[-1])
    if smooth:
        est, err = raw, float(abs(tops[-1] - tops[-2]))
    else:
        x = np.array(levels, dtype=float)
        fine = extrapolate_inverse_square(x[-3:], tops[-3:])
        coarse = extrapolate_inverse_square(x[:3], tops[:3])
        est, err = fine.limit, float(abs(fine.limit - coarse.limit))
    if prev.size:
        dist = np.min(np.abs(rest[:, None] - prev[None, :]), axis=1)
        stabilized = rest[dist < stab_tol]
    else:
        stabilized = rest[:0]
    band = 0.0 if smooth else curve.essential_edge
    discrete = stabilized[np.abs(stabilized) > band + band_margin]
    est = float(min(max(est, 0.0), np.nextafter(1.0, 0.0)))
    mesh_info = {k: v for k, v in asdict(mesh).items()}
    mesh_info["levels"] = levels
    return FredholmSpectrum(ev, est, raw, err, mesh_info, unit, stabilized, discrete, band,
                            ladder, imag_max, "smooth" if smooth else "polygon")


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float


def fredholm_invrho(S: FredholmSpectrum) -> Estimate:
    """``1/rho`` with its refinement error bar."""
    return Estimate(S.inv_rho, S.error_bar)


def pm_partners(S: FredholmSpectrum, mesh_tol: float = 1e-4) -> list[tuple[float, float]]:
    """For each discrete eigenvalue with ``|lam| > 2*mesh_tol``, the distance
    from ``-lam`` to the nearest nonunit eigenvalue."""
    i = int(np.argmin(np.abs(S.eigenvalues - 1.0)))
    rest = np.delete(S.eigenvalues, i)
    out = []
    for lam in S.discrete:
        if abs(lam) > 2 * mesh_tol:
            out.append((float(lam), float(np.min(np.abs(rest + lam)))))
    return out


def kuhnau_schiffer_residual(kappa: float, inv_rho: float) -> tuple[float, float]:
    """Absolute and relative gap between the Grunsky norm and ``1/rho``."""
    diff = abs(kappa - inv_rho)
    scale = max(abs(kappa), abs(inv_rho))
    return diff, (diff / scale if scale > 0 else 0.0)


def ahlfors_check(inv_rho: float, q_bound: float, tol: float = 1e-6) -> bool:
    """True iff ``1/rho`` does not exceed a known quasireflection bound."""
    return bool(inv_rho <= q_bound + tol)


THEOREM_TAGS = ("T1", "T4", "TA", "none")


def reflection_report(kappa: float, tag: str = "none") -> dict:
    """Quantities licensed by a theorem tag from a measured Grunsky norm.

    With a tag the equalities ``q = 1/rho = kappa`` are reported together with
    the dilatation ``Q = ((1 + kappa)/(1 - kappa))**2``.  Without one only the
    interval ``[kappa, 1)`` for q remains.  Infinite rho is reported as
    ``math.inf``.
    """
    if tag not in THEOREM_TAGS:
        raise ValueError(f"unknown theorem tag {tag!r}")
    if not 0 <= kappa < 1:
        raise DomainError("kappa must lie in [0, 1)")
    rho = math.inf if kappa == 0 else 1.0 / kappa
    if tag == "none":
        return {"tag": tag, "q_interval": [kappa, 1.0], "rho_L": rho, "kappaEqualsK": False}
    out = {
        "tag": tag,
        "q_L": kappa,
        "rho_L": rho,
        "Q": ((1 + kappa) / (1 - kappa)) ** 2,
        "kappaEqualsK": True,
    }
    if tag == "T4":
        # the chain can also be read as rho equal to kappa itself; surfaced, not used
        out["rho_L_alt_reading"] = kappa
    return out
