"""Limit extrapolation for slowly converging refinement sequences.

Corner singularities make both the Grunsky truncations and the double-layer
discretizations approach their limit like ``A / (x + B)**2`` in a refinement
variable x (``log N`` for Grunsky orders, the grading depth for meshes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares


@dataclass(frozen=True)
class Extrapolation:
    """Fitted limit of ``y(x) = limit - A/(x + B)**2 + C/(x + B)**4``."""

    limit: float
    A: float
    B: float
    fitted: bool
    C: float = 0.0

    def __call__(self, x):
        s = np.asarray(x) + self.B
        return self.limit - self.A / s ** 2 + self.C / s ** 4


def extrapolate_inverse_square(x, y, quartic: bool = False) -> Extrapolation:
    """Fit ``y = limit - A/(x+B)**2`` (plus ``C/(x+B)**4`` when ``quartic``).

    Needs at least three points, four with the quartic term.  Falls back to
    the last value when the data are already converged, not monotone, or
    the fit misses the data, since the model then has no meaning.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    npar = 4 if quartic else 3
    if len(x) < npar:
        raise ValueError(f"need at least {npar} refinement levels")
    d = np.diff(y)
    fallback = Extrapolation(float(y[-1]), 0.0, 0.0, False)
    if np.max(np.abs(d)) < 1e-12 or not (np.all(d > 0) or np.all(d < 0)):
        return fallback

    def resid(p):
        s = x + p[2]
        r = p[0] - p[1] / s ** 2 - y
        return r + p[3] / s ** 4 if quartic else r

    lo = -0.9 * x.min()
    start = [y[-1] + (y[-1] - y[-2]), (y[-1] - y[0]) * x[-1] ** 2, 0.0, 0.0][:npar]
    inf = np.inf
    bounds = ([-inf, -inf, lo, -inf][:npar], [inf, inf, 1e3 * x.max(), inf][:npar])
    sol = least_squares(resid, start, bounds=bounds, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=5000)
    if not sol.success or np.max(np.abs(sol.fun)) > 1e-6 * max(1.0, np.max(np.abs(y))):
        return fallback
    C = float(sol.x[3]) if quartic else 0.0
    return Extrapolation(float(sol.x[0]), float(sol.x[1]), float(sol.x[2]), True, C)
