import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hammersley_lpp.geometry import (Cone, ShapeFunction, TruncatedCylinder, cone_contains, curvature_gap,
                                     cylinder_side_edge_points, line_distance, norm, shape_value,
                                     straightness_cone, transversal_deviation)
from hammersley_lpp.points import ConfigurationError

F = ShapeFunction(2.0)
nonneg = st.floats(0, 100, allow_nan=False)


def rotate(v, angle):
    c, s = math.cos(angle), math.sin(angle)
    return (c * v[0] - s * v[1], s * v[0] + c * v[1])


def test_shape_values():
    assert shape_value(F, 1, 1) == 2.0
    assert shape_value(F, 4, 1) == 4.0
    assert shape_value(F, 3 * 2, 5 / 3) == pytest.approx(shape_value(F, 2, 5), rel=1e-15)
    assert F(0, 7) == 0.0


def test_shape_rejects_negative():
    with pytest.raises(ConfigurationError):
        shape_value(F, -1, 1)
    with pytest.raises(ConfigurationError):
        ShapeFunction(0.0)


def test_curvature_gap_examples():
    assert curvature_gap(F, (1, 1), (2, 2)) == pytest.approx(0.0, abs=1e-12)
    # sqrt(3*1) - sqrt(2*0) - sqrt(1*1)
    g = ShapeFunction(1.0)
    assert curvature_gap(g, (1, 1), (3, 1)) == pytest.approx(math.sqrt(3) - 1, rel=1e-12)
    assert curvature_gap(F, (1, 1), (3, 1)) == pytest.approx(2 * 0.7320508075688772, rel=1e-12)


def test_curvature_gap_rejects_unordered():
    with pytest.raises(ConfigurationError):
        curvature_gap(F, (2, 1), (1, 3))
    with pytest.raises(ConfigurationError):
        curvature_gap(F, (-1, 0), (1, 3))


@st.composite
def ordered_pairs(draw):
    p = (draw(nonneg), draw(nonneg))
    q = (p[0] + draw(nonneg), p[1] + draw(nonneg))
    return p, q


@settings(max_examples=500)
@given(ordered_pairs())
def test_superadditive(pq):
    p, q = pq
    assert F(*q) >= F(*p) + F(q[0] - p[0], q[1] - p[1]) - 1e-9 * (1 + F(*q))


@settings(max_examples=300)
@given(st.floats(0.01, 50), st.floats(0.01, 50), st.floats(1.01, 20))
def test_gap_vanishes_on_rays(x, t, k):
    assert abs(curvature_gap(F, (x, t), (k * x, k * t))) <= 1e-12 * (1 + F(k * x, k * t))


@settings(max_examples=300)
@given(ordered_pairs())
def test_gap_positive_off_rays(pq):
    p, q = pq
    gap = curvature_gap(F, p, q)
    collinear = abs(p[0] * q[1] - p[1] * q[0]) <= 1e-12 * (1 + norm(p) * norm(q))
    assert gap >= -1e-9 * (1 + F(*q))
    if not collinear and min(p) > 1e-3 and min(q[0] - p[0], q[1] - p[1]) > 1e-3:
        assert gap > 0


def test_cone_examples():
    cone = Cone((0, 0), (1, 1), 0.1)
    assert cone_contains(cone, (5, 5))
    assert cone_contains(cone, (0, 0))
    assert cone_contains(cone, rotate((3, 3), 0.05))
    assert not cone_contains(cone, rotate((3, 3), 0.2))
    assert not cone_contains(cone, rotate((3, 3), -0.2))
    assert not cone_contains(cone, (-1, -1))


def test_cone_validation():
    for bad in (0.0, math.pi / 4, 1.0):
        with pytest.raises(ConfigurationError):
            Cone((0, 0), (1, 1), bad)
    with pytest.raises(ConfigurationError):
        Cone((0, 0), (1, -1), 0.1)


def test_translated_cone():
    cone = Cone((10, 0), (1, 2), 0.1)
    assert cone_contains(cone, (11, 2))
    assert not cone_contains(cone, (1, 2))


@settings(max_examples=300)
@given(st.floats(-3, 3), st.floats(0.01, 10), st.floats(1e-3, 1e3), st.floats(0.01, 0.7))
def test_cone_scale_invariant(off, length, scale, half):
    cone = Cone((2.0, -1.0), (1.0, 3.0), half)
    d = rotate((length / math.sqrt(10), 3 * length / math.sqrt(10)), off)
    assume(abs(abs(off) - half) > 1e-9)
    a = cone_contains(cone, (2.0 + d[0], -1.0 + d[1]))
    b = cone_contains(cone, (2.0 + scale * d[0], -1.0 + scale * d[1]))
    assert a == b


def test_straightness_cone():
    cone = straightness_cone((100, 100), 0.2)
    assert cone.apex == (0.0, 0.0)
    assert cone.half_angle == pytest.approx(norm((100, 100)) ** -0.2)


def test_cylinder_infeasible():
    assert cylinder_side_edge_points(TruncatedCylinder((10, 10), 100.0), 50) == []


def test_cylinder_points_on_edges():
    p = (10.0, 10.0)
    pts = cylinder_side_edge_points(TruncatedCylinder(p, 2.0), 64)
    assert len(pts) == 128
    for q in pts:
        assert line_distance(q, p) == pytest.approx(2.0, abs=1e-9)
        assert q[0] >= p[0] and q[1] >= p[1]
        assert norm(q) <= 2 * norm(p) + 1e-9


def test_cylinder_off_diagonal_anchor():
    p = (30.0, 10.0)
    pts = cylinder_side_edge_points(TruncatedCylinder(p, 3.0), 40)
    assert pts
    for q in pts:
        assert line_distance(q, p) == pytest.approx(3.0, abs=1e-9)
        assert q[0] >= p[0] and q[1] >= p[1] and norm(q) <= 2 * norm(p) + 1e-9


def test_cylinder_validation():
    with pytest.raises(ConfigurationError):
        TruncatedCylinder((1, 1), 0.0)
    with pytest.raises(ConfigurationError):
        cylinder_side_edge_points(TruncatedCylinder((1, 1), 0.1), 1)


def brute_gap_sweep(p, width, n=20001):
    """Independent sweep: walk both edge lines finely and keep feasible points."""
    u = np.array(p) / norm(p)
    nrm = np.array([-u[1], u[0]])
    s = np.linspace(0, 2 * norm(p), n)
    ratios = []
    for sign in (1, -1):
        q = s[:, None] * u + sign * width * nrm
        ok = (q[:, 0] >= p[0]) & (q[:, 1] >= p[1]) & (np.hypot(q[:, 0], q[:, 1]) <= 2 * norm(p))
        for x, t in q[ok]:
            ratios.append(curvature_gap(F, p, (x, t)))
    return np.array(ratios)


def test_side_edge_gap_sweep():
    p, delta = (50.0, 50.0), 0.2
    width = norm(p) ** (1 - delta)
    pts = cylinder_side_edge_points(TruncatedCylinder(p, width), 400)
    assert pts
    gaps = np.array([curvature_gap(F, p, q) for q in pts])
    assert np.all(gaps >= 0)
    ratio = gaps / norm(p) ** (1 - 2 * delta)
    oracle = brute_gap_sweep(p, width) / norm(p) ** (1 - 2 * delta)
    assert ratio.min() > 0.1
    assert ratio.min() == pytest.approx(oracle.min(), rel=1e-3)


def test_transversal_deviation_examples():
    geo = SimpleNamespace(start=(0, 0), end=(2, 2), chain=[])
    assert transversal_deviation(geo) == 0.0
    geo = SimpleNamespace(start=(0, 0), end=(2, 2), chain=[(1, 1, 1.0)])
    assert transversal_deviation(geo) == pytest.approx(0.0, abs=1e-15)
    geo = SimpleNamespace(start=(0, 0), end=(3, 3), chain=[(1, 2, 1.0)])
    assert transversal_deviation(geo) == pytest.approx(math.sqrt(2) / 2, rel=1e-12)


def test_transversal_deviation_takes_max():
    geo = SimpleNamespace(start=(0, 0), end=(4, 4), chain=[(1, 2, 1.0), (2, 4, 1.0), (3, 3.5, 1.0)])
    assert transversal_deviation(geo) == pytest.approx(2 / math.sqrt(2), rel=1e-12)
