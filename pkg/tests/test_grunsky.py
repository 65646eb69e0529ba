import numpy as np
import pytest

from oracles import grunsky_matrix_bruteforce, monomial_pairing_matrix
from qclab.errors import AccuracyError, DomainError
from qclab.ext_scmap import LaurentSeries, identity_series, joukowski_series, solve_parameters
from qclab.grunsky import (
    BeltramiField,
    GrunskyMatrix,
    alpha_functional,
    faber_alpha,
    grunsky_from_series,
    grunsky_norm,
    homotopy_scale,
    pairing,
    pairing_matrix,
    quad_differential,
    takagi_vector,
)
from qclab.polygeom import make_polygon, unit_square

# sigma_max of leading blocks of the square's Grunsky matrix, computed with the
# brute-force bivariate log-series oracle in tests/oracles.py
SQUARE_SIGMA = {8: 0.3852813852813853, 16: 0.41520886486903746, 32: 0.4344627536869324}


@pytest.fixture(scope="module")
def square_series():
    return solve_parameters(unit_square()).laurent_series(96)


@pytest.fixture(scope="module")
def quad_series():
    return solve_parameters(make_polygon([0.9 + 0.1j, 0.2 + 0.8j, -0.7 + 0.3j, -0.1 - 0.9j])).laurent_series(96)


def test_ellipse_diagonal():
    G = grunsky_from_series(joukowski_series(0.4, 80), 32)
    np.testing.assert_allclose(G.beta, np.diag(0.4 ** np.arange(1, 33)), atol=1e-15)
    assert grunsky_norm(G).kappa == pytest.approx(0.4, abs=1e-15)


def test_identity_and_translation_give_zero():
    assert np.max(np.abs(grunsky_from_series(identity_series(40), 16).beta)) == 0
    b = np.zeros(41, dtype=complex)
    b[0] = 3 - 2j
    assert np.max(np.abs(grunsky_from_series(LaurentSeries(b), 16).beta)) < 1e-15


def test_matches_bruteforce_oracle(quad_series):
    G = grunsky_from_series(quad_series, 24)
    B = grunsky_matrix_bruteforce(quad_series.b, 24)
    assert np.max(np.abs(G.beta - B)) < 1e-12


def test_square_frozen_sigma(square_series):
    G = grunsky_from_series(square_series, 32)
    norm = grunsky_norm(G, sizes=[8, 16, 32])
    for n, s in norm.by_size:
        assert s == pytest.approx(SQUARE_SIGMA[n], abs=1e-10)


def test_cross_check_recorded(square_series):
    G = grunsky_from_series(square_series, 32)
    assert G.provenance["method"] == "faber+fft2"
    assert G.provenance["crossCheckDiff"] < 1e-8
    assert G.provenance["asymmetry"] < 1e-8
    np.testing.assert_array_equal(G.beta, G.beta.T)


def test_translation_invariance(quad_series):
    a = grunsky_from_series(quad_series, 24).beta
    b = grunsky_from_series(quad_series.translate(5 - 1j), 24).beta
    assert np.max(np.abs(a - b)) < 1e-10


def test_rotation_covariance(quad_series):
    theta = 0.7
    G = grunsky_from_series(quad_series, 24)
    R = grunsky_from_series(quad_series.rotate(theta), 24)
    m = np.arange(1, 25)
    phase = np.exp(-1j * theta * (m[:, None] + m[None, :]))
    assert np.max(np.abs(R.beta - G.beta * phase)) < 1e-10
    assert abs(grunsky_norm(R).kappa - grunsky_norm(G).kappa) < 1e-10


def test_non_univalent_series_is_flagged():
    with pytest.raises(AccuracyError):
        grunsky_from_series(joukowski_series(1.5, 40), 8)


def test_order_needs_enough_coefficients():
    with pytest.raises(ValueError):
        grunsky_from_series(joukowski_series(0.4, 10), 8)


def test_norm_nested_sizes_monotone(square_series):
    norm = grunsky_norm(grunsky_from_series(square_series, 32))
    sizes = [n for n, _ in norm.by_size]
    vals = [s for _, s in norm.by_size]
    assert sizes == [8, 16, 32]
    assert all(np.diff(vals) >= 0)
    assert norm.kappa <= 1 + 1e-6


def test_zero_matrix_norm():
    assert grunsky_norm(GrunskyMatrix(np.zeros((4, 4)))).kappa == 0


def test_row_norms_bounded(quad_series):
    assert grunsky_from_series(quad_series, 48).row_norms().max() <= 1 + 1e-6


def test_homotopy_examples():
    G = grunsky_from_series(joukowski_series(0.4, 80), 16)
    np.testing.assert_array_equal(homotopy_scale(G, 1).beta, G.beta)
    assert np.max(np.abs(homotopy_scale(G, 0).beta)) == 0
    assert grunsky_norm(homotopy_scale(G, 0.5)).kappa == pytest.approx(0.1, abs=1e-15)
    with pytest.raises(DomainError):
        homotopy_scale(G, 1.01)


def test_homotopy_law(square_series):
    G = grunsky_from_series(square_series, 24)
    for t in (0.3, 0.6, 0.9):
        Gt = grunsky_from_series(square_series.dilate(t), 24)
        assert np.max(np.abs(Gt.beta - homotopy_scale(G, t).beta)) < 1e-8


def test_matrix_json_roundtrip(square_series):
    G = grunsky_from_series(square_series, 8)
    H = GrunskyMatrix.from_json(G.to_json())
    np.testing.assert_array_equal(G.beta, H.beta)
    assert H.provenance == G.provenance


def test_faber_alpha_ellipse_direct():
    a = faber_alpha(np.array([0, 0.3]), 5)
    np.testing.assert_allclose(np.diag(a), 0.3 ** np.arange(1, 6) / np.arange(1, 6), atol=1e-16)


def test_takagi_vector():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    B = A + A.T
    s, x = takagi_vector(B)
    assert np.linalg.norm(x) == pytest.approx(1)
    assert x @ B @ x == pytest.approx(s)


# --------------------------------------------------------------------------
# quadratic differentials


def test_quad_differential_basis_vectors():
    psi = quad_differential([1.0])
    np.testing.assert_allclose(psi.psi_coeffs, [1 / np.pi])
    assert psi.a1_norm == pytest.approx(1, abs=1e-12)
    psi = quad_differential([0, 1.0])
    np.testing.assert_allclose(psi.psi_coeffs, [0, 0, 2 / np.pi], atol=1e-16)
    assert psi.a1_norm == pytest.approx(1, abs=1e-12)
    for n in range(1, 7):
        x = np.zeros(n)
        x[-1] = 1
        q = quad_differential(x)
        assert abs(q.a1_norm - 1) < 1e-8
        assert q.a1_error < 1e-9


def test_quad_differential_zero():
    assert quad_differential([0, 0, 0]).a1_norm == 0


def test_quad_differential_is_a_square():
    x = np.array([0.3, -0.2j, 0.5, 0.1 + 0.1j])
    q = quad_differential(x)
    np.testing.assert_allclose(q.psi_coeffs, np.convolve(q.omega_coeffs, q.omega_coeffs) / np.pi)


def test_a1_norm_equals_squared_l2_norm():
    # the A1 norm of omega**2/pi is the Bergman norm of omega, i.e. ||x||**2
    rng = np.random.default_rng(4)
    for _ in range(5):
        x = rng.normal(size=5) + 1j * rng.normal(size=5)
        x *= rng.uniform(0.2, 2) / np.linalg.norm(x)
        assert quad_differential(x).a1_norm == pytest.approx(np.linalg.norm(x) ** 2, rel=1e-12)


def test_pairing_constant():
    rng = np.random.default_rng(0)
    c = 0.3 - 0.2j
    mu = BeltramiField.constant(c)
    for _ in range(10):
        x = rng.normal(size=6) + 1j * rng.normal(size=6)
        x /= np.linalg.norm(x)
        assert abs(pairing(mu, quad_differential(x)) - c * x[0] ** 2) < 1e-8


def test_pairing_zero_and_symmetric_field():
    psi = quad_differential([1.0, 0.5])
    assert pairing(BeltramiField.constant(0), psi) == 0
    radial = BeltramiField(lambda z: 0.5 * np.conj(z) / np.maximum(np.abs(z), 1e-300), 0.5)
    assert abs(pairing(radial, quad_differential([1.0]))) < 1e-12


def test_beltrami_field_sup_norm():
    with pytest.raises(DomainError):
        BeltramiField.constant(1.0)


def test_alpha_constant_field():
    for c in (0.0, 0.25, 0.5j, 0.6 + 0.3j):
        res = alpha_functional(BeltramiField.constant(c), 8)
        assert abs(res.value - abs(c)) < 1e-6
    res = alpha_functional(BeltramiField.constant(0.5), 6)
    assert abs(abs(res.x[0]) - 1) < 1e-6


def test_alpha_matches_pairing_matrix_oracle():
    coeffs = {0: 0.3, 2: 0.4}
    mu = BeltramiField(lambda z: 0.3 + 0.4 * np.conj(z) ** 2, 0.7)
    for N in (3, 6):
        oracle = np.linalg.svd(monomial_pairing_matrix(coeffs, N), compute_uv=False)[0]
        np.testing.assert_allclose(pairing_matrix(mu, N), monomial_pairing_matrix(coeffs, N), atol=1e-12)
        assert alpha_functional(mu, N).value == pytest.approx(oracle, abs=1e-6)


def test_alpha_holder_bound_and_monotone():
    mu = BeltramiField(lambda z: 0.5 * np.conj(z) * z + 0.2 * z ** 3, 0.7)
    prev = 0.0
    for N in (2, 4, 8):
        val = alpha_functional(mu, N).value
        assert val <= mu.sup_norm + 1e-8
        assert val >= prev - 1e-12
        prev = val
