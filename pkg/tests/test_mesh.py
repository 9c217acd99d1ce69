import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from faberpt.conformal import ConformalMap
from faberpt.errors import GeometryError, InputError
from faberpt.mesh import (FourierCurve, find_self_intersection, fourier_derivative, make_curve,
                          mesh_from_parametric, uniform_grid)


def test_disk_geometry():
    m = ConformalMap(2.0, []).mesh(64)
    assert m.perimeter == pytest.approx(4 * np.pi, rel=1e-14)
    assert m.area == pytest.approx(4 * np.pi, rel=1e-14)
    assert np.allclose(m.curvature, 0.5)
    # outward normals
    assert np.allclose(m.normals, m.points / 2)


def test_ellipse_perimeter():
    m = mesh_from_parametric("ellipse", {"a": 2, "b": 1}, 256)
    assert m.perimeter == pytest.approx(oracles.ELLIPSE_2_1_PERIMETER, rel=1e-12)


def test_kite_perimeter_and_area(kite_mesh):
    assert kite_mesh.perimeter == pytest.approx(oracles.KITE_PERIMETER, rel=1e-10)
    assert kite_mesh.area == pytest.approx(oracles.KITE_AREA, rel=1e-10)


def test_rolled_mesh_integrals(kite_mesh):
    f = kite_mesh.x**2 - kite_mesh.y
    rolled = kite_mesh.rolled(37)
    g = rolled.x**2 - rolled.y
    assert rolled.integrate(g) == pytest.approx(kite_mesh.integrate(f), rel=1e-13)


def test_transforms(kite_mesh):
    moved = kite_mesh.translated(0.3 - 0.1j).rotated(0.4).scaled(2.0)
    assert moved.perimeter == pytest.approx(2 * kite_mesh.perimeter, rel=1e-13)
    assert moved.area == pytest.approx(4 * kite_mesh.area, rel=1e-12)


def test_odd_mesh_rejected():
    with pytest.raises(InputError):
        make_curve("kite").mesh(63)


def test_unknown_kind_and_parameter():
    with pytest.raises(InputError):
        make_curve("star")
    with pytest.raises(InputError):
        make_curve("kite", {"radius": 2})


def test_figure_eight_reports_crossing():
    curve = FourierCurve([1, -1, 2], [1.0, 0.0, 1.2])
    with pytest.raises(GeometryError) as exc:
        curve.mesh(64)
    assert exc.value.crossing is not None


def test_clockwise_rejected():
    curve = FourierCurve([-1], [1.0])
    with pytest.raises(GeometryError, match="clockwise"):
        curve.mesh(64)


def test_find_self_intersection_square():
    square = np.array([0, 1, 1 + 1j, 1j])
    assert find_self_intersection(square) is None
    bowtie = np.array([0, 1 + 1j, 1, 1j])
    assert find_self_intersection(bowtie) is not None


def test_cap_is_simple_with_rounding_metadata():
    m = make_curve("cap").mesh(256)
    assert 0 < m.metadata["rounding_radius"] < 0.2
    assert np.all(m.y >= -0.2 - 1e-9)


def test_arclength_reparametrization_uniform_speed(kite_mesh):
    curve = FourierCurve.from_samples(kite_mesh.points).arclength_reparametrized(256)
    m = curve.mesh(256)
    assert np.std(m.speed) / np.mean(m.speed) < 1e-3
    assert m.perimeter == pytest.approx(kite_mesh.perimeter, rel=1e-6)


def test_grid_and_dense_derivatives_agree(kite_mesh):
    curve = FourierCurve.from_samples(kite_mesh.points, max_mode=40)
    t = uniform_grid(128)
    fast = curve.derivatives(t)
    e = np.exp(1j * np.outer(t, curve.modes))
    ik = 1j * curve.modes
    for p, values in enumerate(fast):
        assert np.allclose(values, e @ (ik**p * curve.coeffs), atol=1e-11)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 20))
def test_fourier_derivative_exact_for_trig(k):
    t = uniform_grid(64)
    d = fourier_derivative(np.sin(k * t))
    assert np.allclose(d, k * np.cos(k * t), atol=1e-11 * k)
