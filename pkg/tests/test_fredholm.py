import math

import numpy as np
import pytest

from oracles import ellipse_np_spectrum
from qclab.errors import DomainError, ResolutionError
from qclab.fredholm import (
    MeshOptions,
    ahlfors_check,
    circle,
    discretize_polygon,
    ellipse,
    fredholm_invrho,
    kuhnau_schiffer_residual,
    make_smooth_curve,
    np_matrix,
    np_spectrum,
    pm_partners,
    reflection_report,
    trig_curve,
)
from qclab.polygeom import make_polygon, stretch_ellipse_axes, unit_square


@pytest.fixture(scope="module")
def square_spectrum():
    return np_spectrum(unit_square())


def test_circle_spectrum():
    S = np_spectrum(circle(2.0))
    assert S.unit["deviation"] < 1e-8
    assert np.max(np.abs(np.delete(S.eigenvalues, np.argmin(np.abs(S.eigenvalues - 1))))) < 1e-8
    assert S.inv_rho < 1e-8
    assert S.discrete.size == 0


@pytest.mark.parametrize("c", [0.2, 0.4, 0.6])
def test_ellipse_spectrum_matches_closed_form(c):
    S = np_spectrum(ellipse(*stretch_ellipse_axes(c)))
    expected = ellipse_np_spectrum(c, 6)
    for lam in expected:
        if abs(lam) > 1e-6:
            assert np.min(np.abs(S.eigenvalues - lam)) < 1e-8
    assert S.inv_rho == pytest.approx(c, abs=1e-9)
    assert all(d < 1e-8 for _, d in pm_partners(S))


def test_ellipse_orientation_and_axes():
    a = np_spectrum(ellipse(1.4, 0.6)).inv_rho
    b = np_spectrum(ellipse(0.6, 1.4)).inv_rho
    assert a == pytest.approx(0.4, abs=1e-9)
    assert b == pytest.approx(0.4, abs=1e-9)


def test_trig_curve_matches_ellipse():
    C = trig_curve({1: 1.3, -1: 0.3})
    assert np_spectrum(C).inv_rho == pytest.approx(0.3 / 1.3, abs=1e-9)


def test_figure_eight_rejected():
    with pytest.raises(DomainError):
        make_smooth_curve(lambda t: np.sin(t) + 1j * np.sin(2 * t),
                          lambda t: np.cos(t) + 2j * np.cos(2 * t),
                          lambda t: -np.sin(t) - 4j * np.sin(2 * t))


def test_coarse_mesh_raises_resolution_error():
    with pytest.raises(ResolutionError):
        np_spectrum(ellipse(1.9, 0.1), MeshOptions(panels=4, nodes=4))


def test_polygon_rows_sum_to_one():
    D = discretize_polygon(make_polygon([0, 3, 2 + 1j, 0.3 + 0.8j]), 12, 2, 10)
    A = np_matrix(D)
    np.testing.assert_allclose(A.sum(axis=1), 1.0, atol=1e-12)


def test_square_spectrum(square_spectrum):
    S = square_spectrum
    assert S.unit["deviation"] < 1e-12
    assert S.band == pytest.approx(0.5)
    assert S.inv_rho == pytest.approx(0.5, abs=1e-3)
    assert S.error_bar < 1e-3
    assert S.kind == "polygon"
    assert [l["level"] for l in S.levels] == [8, 16, 24, 32]


def test_square_agrees_with_grunsky_value(square_spectrum):
    # extrapolated Grunsky norm of the square at orders up to 1024
    kappa = 0.49890
    abs_gap, rel_gap = kuhnau_schiffer_residual(kappa, square_spectrum.inv_rho)
    assert abs_gap < 5e-3
    assert rel_gap < 1e-2


def test_arnoldi_matches_dense():
    P = make_polygon([0, 2, 1.6 + 1.1j, 0.1 + 0.9j])
    a = np_spectrum(P, MeshOptions(grading=4, solver="arnoldi"))
    d = np_spectrum(P, MeshOptions(grading=4, solver="dense"))
    assert a.inv_rho == pytest.approx(d.inv_rho, abs=1e-10)


def test_refinement_changes_little():
    P = make_polygon([0, 2, 1.6 + 1.1j, 0.1 + 0.9j])
    a = np_spectrum(P, MeshOptions(grading=8)).inv_rho
    b = np_spectrum(P, MeshOptions(grading=10)).inv_rho
    assert abs(a - b) < 1e-3


def test_affine_invariance_of_dilated_copy():
    P = make_polygon([0, 2, 1.6 + 1.1j, 0.1 + 0.9j])
    Q = make_polygon(3 * np.exp(0.4j) * np.asarray(P.z) + 1 - 2j)
    # the graded mesh is similarity invariant; residual differences come from the eigensolver
    assert np_spectrum(P).inv_rho == pytest.approx(np_spectrum(Q).inv_rho, abs=1e-4)


def test_estimate_and_json(square_spectrum):
    e = fredholm_invrho(square_spectrum)
    assert e.value == square_spectrum.inv_rho
    assert e.error == square_spectrum.error_bar
    j = square_spectrum.to_json()
    assert set(j) >= {"invRho", "errorBar", "levels", "eigenvalues", "unit", "discrete"}


def test_residual_helpers():
    assert kuhnau_schiffer_residual(0.4, 0.4) == (0.0, 0.0)
    assert kuhnau_schiffer_residual(0.0, 0.0) == (0.0, 0.0)
    abs_gap, rel_gap = kuhnau_schiffer_residual(0.5, 0.4)
    assert abs_gap == pytest.approx(0.1)
    assert rel_gap == pytest.approx(0.2)
    assert ahlfors_check(0.3, 0.4)
    assert not ahlfors_check(0.5, 0.4)


def test_reflection_report_tags():
    r = reflection_report(0.4, "none")
    assert r["q_interval"] == [0.4, 1.0]
    assert r["kappaEqualsK"] is False
    r = reflection_report(0.4, "T1")
    assert r["Q"] == pytest.approx((1.4 / 0.6) ** 2)
    assert r["rho_L"] == pytest.approx(2.5)
    assert "rho_L_alt_reading" not in r
    assert reflection_report(0.4, "T4")["rho_L_alt_reading"] == 0.4
    assert reflection_report(0.0, "TA")["rho_L"] == math.inf
    with pytest.raises(ValueError):
        reflection_report(0.4, "T9")
    with pytest.raises(DomainError):
        reflection_report(1.0, "T1")
