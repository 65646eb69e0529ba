import warnings
from dataclasses import replace

import numpy as np
import pytest

from oracles import exterior_side_lengths
from qclab.errors import AccuracyError, ConditioningWarning, DomainError, NonconvergenceError
from qclab.ext_scmap import (
    LaurentSeries,
    boundary_trace,
    eval_map,
    hausdorff_to_polygon,
    identity_series,
    joukowski_series,
    laurent_coeffs,
    normalize_sigma0,
    solve_parameters,
    trace_series,
)
from qclab.polygeom import make_polygon, regular_polygon, unit_square

QUAD = [0.9 + 0.1j, 0.2 + 0.8j, -0.7 + 0.3j, -0.1 - 0.9j]


@pytest.fixture(scope="module")
def square_map():
    return solve_parameters(unit_square())


@pytest.fixture(scope="module")
def quad_map():
    return solve_parameters(make_polygon(QUAD))


def test_square_prevertices_equally_spaced(square_map):
    np.testing.assert_allclose(square_map.thetas, np.pi / 2 * np.arange(4), atol=1e-12)


def test_hexagon_prevertices_equally_spaced():
    M = solve_parameters(regular_polygon(6))
    np.testing.assert_allclose(np.diff(M.thetas), np.pi / 3, atol=1e-10)


def test_side_ratios_match_independent_quadrature(quad_map):
    # arc lengths by adaptive mpmath quadrature, independent of the panel rules
    L = np.array(exterior_side_lengths(quad_map.thetas, quad_map.gammas))
    P = quad_map.polygon
    np.testing.assert_allclose(L / L[0], P.side_lengths / P.side_lengths[0], atol=1e-9)
    np.testing.assert_allclose(abs(quad_map.d1) * L, P.side_lengths, rtol=1e-9)


def test_single_valuedness_and_vertices(quad_map):
    assert abs(np.sum(quad_map.gammas * quad_map.prevertices)) < 1e-8
    np.testing.assert_allclose(eval_map(quad_map, quad_map.prevertices * (1 + 1e-13)),
                               quad_map.polygon.z, atol=1e-8)
    assert quad_map.residuals["vertex"] < 1e-8


def test_eval_snaps_to_vertex(quad_map):
    z = quad_map.prevertices[2] * np.exp(1e-12j)
    assert eval_map(quad_map, z) == quad_map.polygon.z[2]


def test_eval_far_field_normalized(quad_map):
    N = normalize_sigma0(quad_map)
    z = 1e6 * np.exp(0.3j)
    assert abs(eval_map(N, z) / z - 1) < 1e-5


def test_eval_inside_disk_rejected(square_map):
    with pytest.raises(DomainError):
        eval_map(square_map, 0.5)


def test_quadrature_doubling(quad_map):
    z = np.array([1.1, 1.3j, -2 + 0.5j, 1.1 * np.exp(2.0j), 5 - 5j])
    a = eval_map(quad_map, z)
    b = eval_map(quad_map, z, nodes=2 * quad_map.nodes)
    assert np.max(np.abs(a - b)) < 1e-10


def test_reconstruction_hausdorff(quad_map):
    pts = boundary_trace(quad_map, 64)
    assert hausdorff_to_polygon(pts, quad_map.polygon) < 1e-6 * quad_map.polygon.diameter


def test_normalize_sigma0(square_map):
    N = normalize_sigma0(square_map)
    assert N.d1 == 1
    assert normalize_sigma0(N) is N
    doubled = replace(N, d1=2.0 + 0j, d0=2 * N.d0, polygon=make_polygon(2 * N.polygon.z))
    back = normalize_sigma0(doubled)
    assert back.d1 == 1
    np.testing.assert_allclose(back.polygon.z, N.polygon.z, atol=1e-14)
    S = laurent_coeffs(lambda z: eval_map(N, z), R=1.2, M=16)
    assert abs(S.lead - 1) < 1e-10


def test_laurent_joukowski():
    S = laurent_coeffs(lambda z: z + 0.4 / z, R=1.2, M=12)
    expected = np.zeros(13)
    expected[1] = 0.4
    np.testing.assert_allclose(S.b, expected, atol=1e-12)


def test_laurent_identity():
    S = laurent_coeffs(lambda z: z, M=8)
    assert np.max(np.abs(S.b)) < 1e-14


def test_laurent_inconsistent_radii():
    with pytest.raises(AccuracyError):
        laurent_coeffs(lambda z: z + 0.5 / (z - 1.3), R=1.2, M=16)


def test_laurent_radius_domain():
    with pytest.raises(DomainError):
        laurent_coeffs(lambda z: z, R=1.0)


def test_exact_series_matches_fft(square_map):
    N = normalize_sigma0(square_map)
    exact = square_map.laurent_series(24)
    fft = laurent_coeffs(lambda z: eval_map(N, z), R=1.2, M=24)
    assert np.max(np.abs(exact.b - fft.b)) < 1e-10
    # square: b_3 = 1/6 for the normalized map, odd-free symmetry kills b_1
    assert exact.b[3].real == pytest.approx(1 / 6, abs=1e-14)
    assert abs(exact.b[1]) < 1e-14


def test_area_theorem_on_square(square_map):
    assert square_map.laurent_series(512).area_sum() <= 1 + 1e-6


def test_series_json_roundtrip(square_map):
    S = square_map.laurent_series(10)
    T = LaurentSeries.from_json(S.to_json())
    np.testing.assert_array_equal(S.b, T.b)
    with pytest.raises(ValueError):
        LaurentSeries.from_json({"b": []})


def test_series_dilate_rotate():
    S = joukowski_series(0.4, 4)
    z = 1.7 * np.exp(0.4j)
    assert S.dilate(0.5)(z) == pytest.approx(0.5 * S(z / 0.5))
    assert S.rotate(0.9)(z) == pytest.approx(np.exp(-0.9j) * S(np.exp(0.9j) * z))
    assert identity_series(3)(z) == z


def test_trace_series_recovers_leading_coefficient():
    S, a = trace_series(lambda t: 1.2 * np.exp(1j * t) + 0.6 * np.exp(-1j * t), M=8)
    assert a == pytest.approx(1.2)
    assert S.b[1] == pytest.approx(0.5)
    with pytest.raises(AccuracyError):
        trace_series(lambda t: np.exp(1j * t) + 0.3 * np.exp(2j * t))


def test_sliver_warns_and_may_fail():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        try:
            solve_parameters(make_polygon([0, 50, 50.5 + 1j, 0.5 + 1j]))
        except NonconvergenceError as exc:
            assert exc.best_residual > 0
    assert any(issubclass(w.category, ConditioningWarning) for w in rec)


def test_nonconvex_warns():
    with pytest.warns(UserWarning, match="convex"):
        try:
            solve_parameters(make_polygon([0, 2, 2 + 2j, 1 + 0.5j, 2j]))
        except NonconvergenceError:
            pass
