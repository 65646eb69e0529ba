import json

import numpy as np
import pytest

from qclab.errors import DegenerateVertexError, DomainError
from qclab.polygeom import (
    AffineDeformation,
    BeltramiConst,
    affine_apply,
    beltrami_compose,
    is_convex,
    load_polygon,
    make_polygon,
    polygon_from_json,
    regular_polygon,
    signed_area,
    unit_square,
)


def test_unit_square_angles():
    P = unit_square()
    np.testing.assert_allclose(P.beta, [0.5] * 4, atol=1e-15)
    np.testing.assert_allclose(P.alpha_ext, [1.5] * 4, atol=1e-15)


def test_right_isosceles_triangle_angles():
    P = make_polygon([0, 1, 1j])
    np.testing.assert_allclose(P.beta, [0.5, 0.25, 0.25], atol=1e-14)


def test_collinear_vertices_rejected():
    with pytest.raises(DegenerateVertexError):
        make_polygon([0, 1, 2, 3])


def test_straight_vertex_rejected():
    with pytest.raises(DegenerateVertexError):
        make_polygon([0, 1, 2, 2 + 1j, 1j])


def test_repeated_vertex_rejected():
    with pytest.raises(DegenerateVertexError):
        make_polygon([0, 1, 1, 1j])


def test_self_intersection_rejected():
    with pytest.raises(DomainError):
        make_polygon([0, 1, 1j, 1 + 1j])


def test_too_few_vertices():
    with pytest.raises(ValueError):
        make_polygon([0, 1])


def test_clockwise_input_is_reoriented():
    P = make_polygon([0, 1j, 1 + 1j, 1])
    assert signed_area(P.z) > 0
    np.testing.assert_allclose(P.beta, [0.5] * 4)


def test_angle_sum_invariant_on_random_polygons():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = rng.integers(3, 9)
        th = np.sort(rng.uniform(0, 2 * np.pi, n))
        r = rng.uniform(0.3, 1.0, n)
        try:
            P = make_polygon(r * np.exp(1j * th))
        except (DegenerateVertexError, DomainError):
            continue
        assert abs(sum(P.beta) - (P.n - 2)) < 1e-10
        assert all(a + b == 2.0 for a, b in zip(P.alpha_ext, P.beta))
        assert abs(sum(P.alpha_ext) - (P.n + 2)) < 1e-10
        assert all(0 < b < 2 for b in P.beta)


def test_convexity():
    assert is_convex(unit_square())
    assert not is_convex(make_polygon([0, 2, 2 + 1j, 1 + 1j, 1 + 2j, 2j]))
    assert is_convex(make_polygon([0, 3, 0.2 + 0.1j]))
    assert is_convex(regular_polygon(7))


def test_affine_identity():
    P = make_polygon([0, 2, 1.5 + 1j, 0.2 + 0.7j])
    Q = affine_apply(AffineDeformation(1, 0, 0), P)
    np.testing.assert_allclose(Q.z, P.z)


def test_affine_square_stretch():
    # v + conj(v)/2 on (0, 1, 1+i, i)
    Q = affine_apply(AffineDeformation(1, 0.5, 0), unit_square())
    np.testing.assert_allclose(Q.z, [0, 1.5, 1.5 + 0.5j, 0.5j], atol=1e-15)
    assert is_convex(Q)


def test_affine_admissibility():
    with pytest.raises(DomainError):
        AffineDeformation(1, 1, 0)
    with pytest.raises(DomainError):
        AffineDeformation(1, 2j, 0)


def test_affine_inverse_roundtrip():
    A = AffineDeformation(1.2 - 0.3j, 0.4 + 0.5j, 0.7 - 2j)
    P = make_polygon([0, 2, 1.5 + 1j, 0.2 + 0.7j])
    Q = affine_apply(A, affine_apply(A.inverse(), P))
    np.testing.assert_allclose(Q.z, P.z, atol=1e-12)
    assert A.c == pytest.approx((0.4 + 0.5j) / (1.2 - 0.3j))


def test_beltrami_compose_examples():
    assert complex(beltrami_compose(0.3 + 0.2j, 0)) == pytest.approx(0.3 + 0.2j)
    assert complex(beltrami_compose(0.3, 0.2)).real == pytest.approx(0.5 / 1.06, abs=1e-15)
    assert abs(complex(beltrami_compose(0.4 - 0.1j, -0.4 + 0.1j))) < 1e-15


def test_beltrami_compose_associative_on_reals():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b, c = rng.uniform(-0.9, 0.9, 3)
        left = complex(beltrami_compose(beltrami_compose(a, b), c))
        right = complex(beltrami_compose(a, beltrami_compose(b, c)))
        assert abs(left - right) < 1e-14


def test_beltrami_compose_bound():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = rng.uniform(0, 0.9) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        b = rng.uniform(0, 0.9) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        bound = (abs(a) + abs(b)) / (1 + abs(a) * abs(b))
        assert abs(complex(beltrami_compose(a, b))) <= bound + 1e-15
    assert abs(complex(beltrami_compose(0.3, 0.5))) == pytest.approx(0.8 / 1.15, abs=1e-15)


def test_beltrami_const_domain():
    with pytest.raises(DomainError):
        BeltramiConst(1.0)


def test_polygon_json(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(unit_square().to_json()))
    assert load_polygon(path).vertices == unit_square().vertices
    with pytest.raises(ValueError):
        polygon_from_json({"vertices": [[0, 0], [1]]})
    with pytest.raises(ValueError):
        polygon_from_json({"points": []})


def test_aspect_ratio():
    P = make_polygon([0, 50, 50 + 1j, 1j])
    assert P.aspect_ratio == pytest.approx(np.hypot(50, 1), rel=1e-12)
