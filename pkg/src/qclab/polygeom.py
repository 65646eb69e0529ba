"""Polygons, angle bookkeeping, affine deformations and constant Beltrami algebra.

Interior angles are stored as multiples of pi: a vertex with interior angle
``pi * beta`` has exterior-domain parameter ``alpha = 2 - beta``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateVertexError, DomainError

ANGLE_TOL = 1e-12


def _as_complex_array(vertices: Iterable) -> np.ndarray:
    z = np.asarray(list(vertices), dtype=complex)
    if z.ndim != 1:
        raise ValueError("vertices must be a flat sequence of complex numbers")
    if not np.all(np.isfinite(z)):
        raise ValueError("vertex coordinates must be finite")
    return z


def _cross(a: complex, b: complex) -> float:
    return a.real * b.imag - a.imag * b.real


def _segments_cross(p1, p2, q1, q2, eps: float) -> bool:
    """True if closed segments p1p2 and q1q2 touch or intersect."""
    d1 = _cross(q2 - q1, p1 - q1)
    d2 = _cross(q2 - q1, p2 - q1)
    d3 = _cross(p2 - p1, q1 - p1)
    d4 = _cross(p2 - p1, q2 - p1)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    ):
        return True

    def on_segment(a, b, c, d):
        # c collinear with ab (|d| small) and inside its bounding box
        return (
            abs(d) <= eps
            and min(a.real, b.real) - eps <= c.real <= max(a.real, b.real) + eps
            and min(a.imag, b.imag) - eps <= c.imag <= max(a.imag, b.imag) + eps
        )

    return (
        on_segment(q1, q2, p1, d1)
        or on_segment(q1, q2, p2, d2)
        or on_segment(p1, p2, q1, d3)
        or on_segment(p1, p2, q2, d4)
    )


def is_simple_closed(z: np.ndarray, eps_rel: float = 1e-13) -> bool:
    """Check that the closed polyline through ``z`` has no self-intersections."""
    n = len(z)
    scale = max(float(np.max(np.abs(z - z.mean()))), 1e-300)
    eps = eps_rel * scale * scale
    for i in range(n):
        a, b = z[i], z[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue  # adjacent through the wrap-around
            if _segments_cross(a, b, z[j], z[(j + 1) % n], eps):
                return False
    return True


def signed_area(z: np.ndarray) -> float:
    """Shoelace area, positive for counterclockwise vertex order."""
    return 0.5 * float(np.sum(_cross_vec(z, np.roll(z, -1))))


def _cross_vec(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a.real * b.imag - a.imag * b.real


@dataclass(frozen=True)
class Polygon:
    """A simple closed polygon with counterclockwise vertices.

    Attributes
    ----------
    vertices : tuple of complex
        Vertices in counterclockwise order.
    beta : tuple of float
        Interior angle parameters, the angle at vertex j being ``pi * beta[j]``.
        They sum to ``n - 2``.
    alpha_ext : tuple of float
        Exterior-domain parameters ``2 - beta[j]``.
    """

    vertices: tuple
    beta: tuple
    alpha_ext: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha_ext", tuple(2.0 - b for b in self.beta))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def z(self) -> np.ndarray:
        """Vertices as a complex array."""
        return np.array(self.vertices, dtype=complex)

    @property
    def betas(self) -> np.ndarray:
        return np.array(self.beta)

    @property
    def side_lengths(self) -> np.ndarray:
        z = self.z
        return np.abs(np.roll(z, -1) - z)

    @property
    def diameter(self) -> float:
        z = self.z
        return float(np.max(np.abs(z[:, None] - z[None, :])))

    @property
    def aspect_ratio(self) -> float:
        """Diameter over minimal width of the convex hull.

        The width is the smallest extent over the directions normal to the
        hull edges, which is exact for convex polygons.
        """
        z = self.z
        widths = []
        for j in range(self.n):
            t = z[(j + 1) % self.n] - z[j]
            nrm = -1j * t / abs(t)
            proj = (z * np.conj(nrm)).real
            widths.append(proj.max() - proj.min())
        return self.diameter / min(widths)

    @property
    def essential_edge(self) -> float:
        """Largest ``|1 - beta_j|``, the corner contribution to the spectral radius
        of the double-layer operator."""
        return float(np.max(np.abs(1.0 - self.betas)))

    def to_json(self) -> dict:
        return {"vertices": [[v.real, v.imag] for v in self.vertices]}


def interior_angles(z: np.ndarray) -> np.ndarray:
    """Interior angle parameters of a counterclockwise polygon (angle / pi)."""
    prev = np.roll(z, 1) - z
    nxt = np.roll(z, -1) - z
    return np.mod(np.angle(prev / nxt), 2 * np.pi) / np.pi


def make_polygon(vertices: Iterable) -> Polygon:
    """Build a validated :class:`Polygon` from a vertex list.

    Parameters
    ----------
    vertices : iterable of complex
        At least three vertices in either orientation.

    Returns
    -------
    Polygon
        Vertices reordered counterclockwise, angle parameters renormalized so
        that they sum to ``n - 2`` exactly.

    Raises
    ------
    DegenerateVertexError
        Repeated vertices or an angle parameter within ``1e-12`` of 0, 1 or 2.
    DomainError
        Self-intersecting boundary.
    """
    z = _as_complex_array(vertices)
    n = len(z)
    if n < 3:
        raise ValueError("a polygon needs at least three vertices")
    scale = float(np.max(np.abs(z - z.mean())))
    gaps = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(gaps, np.inf)
    if scale == 0.0 or gaps.min() <= ANGLE_TOL * scale:
        raise DegenerateVertexError("repeated vertices")
    if signed_area(z) < 0:
        z = z[::-1].copy()
    beta = interior_angles(z)
    for k in (0.0, 1.0, 2.0):
        bad = np.flatnonzero(np.abs(beta - k) < ANGLE_TOL)
        if bad.size:
            raise DegenerateVertexError(
                f"degenerate vertex {int(bad[0])}: angle parameter {k:g} "
                "(collinear or folded edges)"
            )
    if not is_simple_closed(z):
        raise DomainError("polygon boundary is self-intersecting")
    residual = (n - 2) - beta.sum()
    if abs(residual) > 1e-8:
        raise DomainError("angle sum inconsistent with a simple polygon")
    beta = beta + residual * beta / beta.sum()
    return Polygon(tuple(complex(v) for v in z), tuple(float(b) for b in beta))


def is_convex(P: Polygon) -> bool:
    """True iff every interior angle is less than pi."""
    return bool(np.all(P.betas < 1.0))


def regular_polygon(n: int, radius: float = 1.0) -> Polygon:
    """Regular n-gon inscribed in a circle, first vertex on the positive axis."""
    return make_polygon(radius * np.exp(2j * np.pi * np.arange(n) / n))


def unit_square() -> Polygon:
    return make_polygon([0, 1, 1 + 1j, 1j])


def load_polygon(path: str | Path) -> Polygon:
    """Read a polygon from JSON ``{"vertices": [[x, y], ...]}``."""
    data = json.loads(Path(path).read_text())
    return polygon_from_json(data)


def polygon_from_json(data: dict) -> Polygon:
    try:
        pts = data["vertices"]
        z = [complex(float(x), float(y)) for x, y in pts]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed polygon JSON: {exc}") from exc
    return make_polygon(z)


@dataclass(frozen=True)
class AffineDeformation:
    """Real-linear map ``w -> c1*w + c2*conj(w) + c3``.

    It is sense preserving and quasiconformal exactly when ``|c2| < |c1|``;
    its complex dilatation is ``c = c2 / c1``.
    """

    c1: complex = 1.0
    c2: complex = 0.0
    c3: complex = 0.0

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if not abs(self.c2) < abs(self.c1):
            raise DomainError(
                "affine deformation must satisfy |c2| < |c1| "
                "(otherwise it reverses orientation or degenerates)"
            )

    @property
    def c(self) -> complex:
        return self.c2 / self.c1

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        return self.c1 * w + self.c2 * np.conj(w) + self.c3

    def inverse(self) -> "AffineDeformation":
        det = abs(self.c1) ** 2 - abs(self.c2) ** 2
        a = np.conj(self.c1) / det
        b = -self.c2 / det
        return AffineDeformation(a, b, -(a * self.c3 + b * np.conj(self.c3)))


def affine_apply(A: AffineDeformation, P: Polygon) -> Polygon:
    """Image of a polygon under an affine deformation, angles recomputed."""
    return make_polygon(A(P.z))


@dataclass(frozen=True)
class BeltramiConst:
    """A constant Beltrami coefficient, ``|value| < 1``."""

    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        if not abs(self.value) < 1:
            raise DomainError("Beltrami coefficient must have modulus < 1")

    def __complex__(self):
        return self.value


def _beltrami_value(x) -> complex:
    return x.value if isinstance(x, BeltramiConst) else BeltramiConst(x).value


def beltrami_compose(nu, mu_tilde) -> BeltramiConst:
    """Dilatation of a composition with constant coefficients.

    Parameters
    ----------
    nu : BeltramiConst or complex
        Coefficient of the inner stretch.
    mu_tilde : BeltramiConst or complex
        Coefficient of the outer map, already transported through the inner
        one (for ``w = z + nu*conj(z)`` no transport is needed).

    Returns
    -------
    BeltramiConst
        ``(nu + mu_tilde) / (1 + conj(nu) * mu_tilde)``.
    """
    a = _beltrami_value(nu)
    b = _beltrami_value(mu_tilde)
    return BeltramiConst((a + b) / (1 + np.conj(a) * b))


def stretch_ellipse_axes(c: float) -> tuple[float, float]:
    """Semiaxes of the unit disk's image under ``z + c*conj(z)`` for real c."""
    return 1 + abs(c), 1 - abs(c)
