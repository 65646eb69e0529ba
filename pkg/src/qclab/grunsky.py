"""Grunsky coefficients, the Grunsky norm, and the quadratic-differential pairing.

Conventions: for ``F(z) = z + b0 + b1/z + ...``

    log((F(z) - F(zeta)) / (z - zeta)) = -sum_{m,n>=1} alpha[m,n] z**-m zeta**-n,

and the Grunsky matrix is ``beta[m,n] = sqrt(m*n) * alpha[m,n]`` (1-based).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import svdvals

from .errors import AccuracyError, DomainError, SamplingDensityError
from .ext_scmap import LaurentSeries


@dataclass(frozen=True, eq=False)
class GrunskyMatrix:
    """Truncated Grunsky matrix.

    Attributes
    ----------
    beta : ndarray, shape (N, N)
        Complex symmetric matrix ``sqrt(m n) alpha_mn``.
    provenance : dict
        Source and extraction method, including the cross-check result.
    """

    beta: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        b = np.array(self.beta, dtype=complex)
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)

    @property
    def N(self) -> int:
        return self.beta.shape[0]

    @property
    def alpha(self) -> np.ndarray:
        m = np.arange(1, self.N + 1)
        return self.beta / np.sqrt(np.outer(m, m))

    def row_norms(self) -> np.ndarray:
        """l2 norms of the rows; at most 1 for univalent maps."""
        return np.sqrt(np.sum(np.abs(self.beta) ** 2, axis=1))

    def to_json(self) -> dict:
        flat = self.beta.ravel()
        return {
            "N": self.N,
            "beta": [[float(v.real), float(v.imag)] for v in flat],
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GrunskyMatrix":
        N = int(data["N"])
        vals = np.array([complex(x, y) for x, y in data["beta"]]).reshape(N, N)
        return cls(vals, dict(data.get("provenance", {})))


# --------------------------------------------------------------------------
# extraction


def faber_alpha(b: np.ndarray, N: int) -> np.ndarray:
    """Grunsky coefficients ``alpha[m-1, n-1]`` by the Faber recursion.

    Write ``Phi_p(F(zeta)) = zeta**p + sum_n B[p, n] zeta**-n`` with
    ``B[p, n] = p * alpha_pn``.  The Faber polynomials satisfy
    ``w Phi_p = Phi_{p+1} + b0 Phi_p + sum_{k=1}^{p} b_k Phi_{p-k} + p b_p``;
    composing with F and comparing negative powers gives

        B[p+1, n] = B[p, n+1] + b_{p+n} + sum_{k=1}^{n-1} b_k B[p, n-k]
                    - sum_{k=1}^{p-1} b_k B[p-k, n].

    ``b0`` never enters, so the result is translation invariant.
    """
    b = np.asarray(b, dtype=complex)
    W = 2 * N + 1  # columns n = 0..2N, column 0 unused
    bb = np.zeros(2 * W + 1, dtype=complex)
    m = min(len(b) - 1, len(bb) - 1)
    bb[1 : m + 1] = b[1 : m + 1]
    B = np.zeros((N + 1, W), dtype=complex)
    B[1, 1:] = bb[1:W]
    bvec = bb[:W].copy()
    bvec[0] = 0.0
    nfft = 1 << int(np.ceil(np.log2(2 * W)))
    bhat = np.fft.fft(bvec, nfft)
    n = np.arange(W)
    for p in range(1, N):
        row = B[p]
        new = np.zeros(W, dtype=complex)
        new[:-1] = row[1:]
        new[1:] += bb[p + n[1:]]
        new += np.fft.ifft(bhat * np.fft.fft(row, nfft))[:W]
        if p > 1:
            new -= np.dot(bb[p - 1 : 0 : -1].copy(), B[1:p])  # contiguous copy keeps BLAS
        new[0] = 0.0
        B[p + 1] = new
    return B[1:, 1 : N + 1] / np.arange(1, N + 1)[:, None]


def fft_alpha(
    F: Callable[[np.ndarray], np.ndarray],
    N: int,
    radii: tuple[float, float] = (1.1, 1.2),
    K: int = 256,
) -> np.ndarray:
    """Grunsky coefficients by a 2-D FFT of the log difference quotient.

    ``g(z, zeta) = log((F(z) - F(zeta)) / (z - zeta))`` is sampled on the torus
    ``|z| = R1, |zeta| = R2`` with ``R1 != R2``, so the removable diagonal is
    never sampled.  The phase is unwrapped along both grid directions and its
    branch fixed by the vanishing mean of ``g``.

    Raises
    ------
    SamplingDensityError
        Adjacent samples differ in phase by more than pi/2, or a sampling loop
        winds around the origin.
    """
    R1, R2 = radii
    if R1 == R2:
        raise ValueError("sampling radii must differ")
    if K < 4 * N:
        raise ValueError("need K >= 4N samples per circle")
    theta = 2 * np.pi * np.arange(K) / K
    z = R1 * np.exp(1j * theta)
    zeta = R2 * np.exp(1j * theta)
    Fz = np.asarray(F(z), dtype=complex)
    Fw = np.asarray(F(zeta), dtype=complex)
    q = (Fz[:, None] - Fw[None, :]) / (z[:, None] - zeta[None, :])
    if np.any(q == 0):
        raise SamplingDensityError("difference quotient vanishes on the sampling torus")
    logmod = np.log(np.abs(q))
    phase = np.angle(q)

    def unwrap(a, axis):
        d = np.diff(a, axis=axis, append=np.take(a, [0], axis=axis))
        jumps = np.round(d / (2 * np.pi))
        d -= 2 * np.pi * jumps
        if np.max(np.abs(d)) > 0.5 * np.pi:
            raise SamplingDensityError("phase jump above pi/2 between samples; raise K")
        closing = np.sum(d, axis=axis)
        if np.max(np.abs(closing)) > 1e-6:
            raise SamplingDensityError("difference quotient winds around 0 on a sampling loop")
        return d

    # unwrap first column down axis 0, then every row along axis 1
    dcol = unwrap(phase[:, :1], 0)
    col = phase[0, 0] + np.concatenate([[0.0], np.cumsum(dcol[:-1, 0])])
    drow = unwrap(phase, 1)
    ph = col[:, None] + np.concatenate([np.zeros((K, 1)), np.cumsum(drow[:, :-1], axis=1)], axis=1)
    ph -= 2 * np.pi * np.round(ph.mean() / (2 * np.pi))
    g = logmod + 1j * ph
    c = np.fft.ifft2(g)
    m = np.arange(1, N + 1)
    return -c[1 : N + 1, 1 : N + 1] * np.outer(R1 ** m, R2 ** m)


def grunsky_from_series(
    S: LaurentSeries,
    N: int,
    check_block: int = 24,
    radii: tuple[float, float] = (1.1, 1.2),
    K: int = 256,
    atol: float = 1e-8,
    check: bool = True,
) -> GrunskyMatrix:
    """Grunsky matrix of order N from a Laurent series.

    The Faber recursion provides the full matrix.  A 2-D FFT of the log
    difference quotient recomputes the leading ``check_block`` block
    independently; entrywise disagreement above ``atol`` raises.  FFT entries
    are amplified by ``R1**m * R2**n``, so only a leading block is compared.

    Raises
    ------
    AccuracyError
        Cross-method disagreement or pre-symmetrization asymmetry above
        ``atol``.
    """
    if N < 1:
        raise ValueError("order must be positive")
    if 2 * N > S.M + 1:
        raise ValueError(f"order {N} needs at least {2 * N - 1} series coefficients")
    alpha = faber_alpha(S.b, N)
    m = np.arange(1, N + 1)
    beta = np.sqrt(np.outer(m, m)) * alpha
    asym = float(np.max(np.abs(beta - beta.T)))
    if asym > atol:
        raise AccuracyError(f"Faber matrix asymmetric by {asym:.2e}")
    prov = {"series": S.method, "method": "faber", "asymmetry": asym}
    if check and check_block > 0:
        nb = min(N, check_block)
        # the truncated series shares alpha_mn with the map for m + n <= M + 1
        a2 = fft_alpha(S, nb, radii, K)
        diff = float(np.max(np.abs(a2 - alpha[:nb, :nb])))
        prov.update({"method": "faber+fft2", "crossCheckBlock": nb, "crossCheckDiff": diff})
        if diff > atol:
            raise AccuracyError(f"Faber and 2-D FFT Grunsky coefficients differ by {diff:.2e}")
    beta = 0.5 * (beta + beta.T)
    return GrunskyMatrix(beta, prov)


@dataclass(frozen=True)
class GrunskyNorm:
    """Largest singular value of a Grunsky truncation and its nested history."""

    kappa: float
    by_size: tuple


def nested_sizes(N: int) -> list[int]:
    return sorted({max(1, N // 4), max(1, N // 2), N})


def grunsky_norm(G: GrunskyMatrix, sizes: Sequence[int] | None = None) -> GrunskyNorm:
    """Norm of the truncated Grunsky operator.

    For complex symmetric ``B`` the supremum of ``|x^T B x|`` over unit vectors
    equals the largest singular value (Takagi factorization), computed here on
    nested leading blocks of sizes N/4, N/2 and N.
    """
    sizes = list(sizes) if sizes is not None else nested_sizes(G.N)
    by = []
    for s in sizes:
        sv = svdvals(G.beta[:s, :s])[0] if s > 0 else 0.0
        by.append((int(s), float(sv)))
    return GrunskyNorm(by[-1][1], tuple(by))


def takagi_vector(B: np.ndarray) -> tuple[float, np.ndarray]:
    """Unit vector x with ``x^T B x = sigma_max(B)`` for complex symmetric B."""
    U, s, Vh = np.linalg.svd(B)
    x = np.conj(Vh[0])
    val = x @ B @ x
    x = x * np.exp(-0.5j * np.angle(val))
    return float(s[0]), x


def homotopy_scale(G: GrunskyMatrix, t: complex) -> GrunskyMatrix:
    """Grunsky matrix of ``F_t(z) = t F(z/t)``: entries times ``t**(m+n)``."""
    if abs(t) > 1:
        raise DomainError("homotopy parameter must satisfy |t| <= 1")
    m = np.arange(1, G.N + 1)
    scale = np.power(complex(t), m[:, None] + m[None, :])
    prov = dict(G.provenance, homotopy=[complex(t).real, complex(t).imag])
    return GrunskyMatrix(G.beta * scale, prov)


# --------------------------------------------------------------------------
# quadratic differentials and the pairing


@dataclass(frozen=True, eq=False)
class QuadDifferential:
    """``psi(z) = (1/pi) sum sqrt(mn) x_m x_n z**(m+n-2)``, i.e. ``omega**2 / pi``.

    Attributes
    ----------
    x : ndarray
        Coefficient vector.
    psi_coeffs : ndarray
        Polynomial coefficients of psi in increasing powers of z.
    a1_norm : float
        Area integral of ``|psi|`` over the unit disk.
    a1_error : float
        Change of ``a1_norm`` under a coarser quadrature rule.
    """

    x: np.ndarray
    psi_coeffs: np.ndarray
    a1_norm: float
    a1_error: float

    @property
    def omega_coeffs(self) -> np.ndarray:
        n = np.arange(1, len(self.x) + 1)
        return np.sqrt(n) * self.x

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.psi_coeffs)


def _disk_rule(nr: int, nt: int):
    """Polar rule on the unit disk: Gauss-Legendre in r times trapezoid in angle."""
    x, w = np.polynomial.legendre.leggauss(nr)
    r = 0.5 * (x + 1)
    wr = 0.5 * w * r
    t = 2 * np.pi * np.arange(nt) / nt
    z = r[:, None] * np.exp(1j * t[None, :])
    wt = wr[:, None] * (2 * np.pi / nt) * np.ones((1, nt))
    return z.ravel(), wt.ravel()


def _a1_norm(coeffs: np.ndarray, nr: int, nt: int) -> float:
    z, w = _disk_rule(nr, nt)
    return float(np.sum(w * np.abs(np.polynomial.polynomial.polyval(z, coeffs))))


def quad_differential(x: Sequence[complex]) -> QuadDifferential:
    """Quadratic differential attached to a coefficient vector.

    The coefficients are the self-convolution of ``omega = sum sqrt(n) x_n z**(n-1)``
    divided by pi.  Since ``|psi| = |omega|**2 / pi`` is a trigonometric
    polynomial in the angle and a polynomial in r, the polar rule below is
    exact once it has enough nodes; the reported error compares two rules.
    """
    x = np.asarray(x, dtype=complex).ravel()
    n = np.arange(1, len(x) + 1)
    omega = np.sqrt(n) * x
    coeffs = np.convolve(omega, omega) / np.pi
    deg = max(len(x), 1)
    fine = _a1_norm(coeffs, deg + 4, 4 * deg + 8)
    coarse = _a1_norm(coeffs, deg + 2, 4 * deg + 4)
    return QuadDifferential(x, coeffs, fine, abs(fine - coarse))


@dataclass(frozen=True)
class BeltramiField:
    """A measurable Beltrami coefficient on the unit disk with a sup-norm bound.

    ``evaluator`` maps an array of disk points to complex values.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    sup_norm: float

    def __post_init__(self):
        if not 0 <= self.sup_norm < 1:
            raise DomainError("Beltrami coefficient needs sup norm < 1")

    def __call__(self, z):
        return self.evaluator(np.asarray(z, dtype=complex))

    @classmethod
    def constant(cls, c: complex) -> "BeltramiField":
        c = complex(c)
        return cls(lambda z: np.full(np.shape(z), c, dtype=complex), abs(c))


def disk_moments(mu: BeltramiField, kmax: int, tol: float = 1e-12, max_level: int = 6) -> np.ndarray:
    """``int_D mu(z) z**k dA`` for k = 0..kmax with an adaptively refined polar rule."""
    nr, nt = 16 + kmax // 2, 64 + 4 * kmax
    prev = None
    for _ in range(max_level):
        z, w = _disk_rule(nr, nt)
        vals = mu(z) * w
        mom = np.array([np.sum(vals * z ** k) for k in range(kmax + 1)])
        if prev is not None and np.max(np.abs(mom - prev)) < tol:
            return mom
        prev = mom
        nr, nt = 2 * nr, 2 * nt
    return prev


def pairing(mu: BeltramiField, psi: QuadDifferential) -> complex:
    """Area pairing ``int_D mu * psi dA``."""
    deg = len(psi.psi_coeffs) - 1
    mom = disk_moments(mu, deg)
    return complex(np.dot(psi.psi_coeffs, mom))


def pairing_matrix(mu: BeltramiField, N: int) -> np.ndarray:
    """Symmetric matrix with ``<mu, psi(x)> = x^T M x`` for x of length N."""
    mom = disk_moments(mu, 2 * N - 2)
    n = np.arange(1, N + 1)
    return np.sqrt(np.outer(n, n)) * mom[n[:, None] + n[None, :] - 2] / np.pi


@dataclass(frozen=True)
class AlphaResult:
    value: float
    x: np.ndarray
    iterations: int


def alpha_functional(
    mu: BeltramiField,
    N: int,
    restarts: int = 8,
    seed: int = 0,
    max_iter: int = 2000,
    tol: float = 1e-14,
) -> AlphaResult:
    """Lower bound for ``sup |<mu, psi>|`` over unit-norm quadratic differentials.

    The search runs over coefficient vectors of length N on the unit sphere,
    where ``||psi(x)||_A1 = ||x||**2 = 1``.  Each restart performs projected
    gradient ascent on ``|x^T M x|**2``: the full normalized gradient step is
    tried first and halved steps are the fallback.  Restarts are reduced in a
    fixed order so the result is deterministic.
    """
    M = pairing_matrix(mu, N)
    rng = np.random.default_rng(seed)
    starts = [np.eye(N, dtype=complex)[0]]
    for _ in range(max(restarts - 1, 0)):
        v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        starts.append(v / np.linalg.norm(v))
    best, best_x, total = -1.0, starts[0], 0
    for x in starts:
        val = abs(x @ M @ x)
        step = 1.0
        for _ in range(max_iter):
            grad = (x @ M @ x) * np.conj(M @ x)
            gnorm = np.linalg.norm(grad)
            if gnorm == 0:
                break
            g = grad / gnorm
            # the infinite-step limit is a Takagi power step
            y, v = g, abs(g @ M @ g)
            eta = step
            while eta > 1e-14:
                cand = x + eta * g
                cand /= np.linalg.norm(cand)
                cv = abs(cand @ M @ cand)
                if cv > val:
                    if cv > v:
                        y, v = cand, cv
                    break
                eta *= 0.5
            step = min(2 * eta, 1e3)
            total += 1
            if v <= val:
                break
            gain = v - val
            x, val = y, v
            if gain < tol * val:
                break
        if val > best:
            best, best_x = val, x
    return AlphaResult(float(best), best_x, total)
