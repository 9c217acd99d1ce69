import numpy as np
from scipy import integrate, special

import oracles


def test_single_layer_cos_by_quad():
    f = lambda t: np.log(np.hypot(2 - np.cos(t), np.sin(t))) * np.cos(t) / (2 * np.pi)
    val, _ = integrate.quad(f, 0, 2 * np.pi, epsabs=1e-13)
    assert abs(val - oracles.SINGLE_LAYER_COS_AT_2) < 1e-12


def test_ellipse_perimeter_by_ellipe():
    assert abs(8 * special.ellipe(0.75) - oracles.ELLIPSE_2_1_PERIMETER) < 1e-13


def test_kite_perimeter_by_quad():
    g = lambda t: np.hypot(-np.sin(t) - 1.3 * np.sin(2 * t), 1.5 * np.cos(t))
    val, _ = integrate.quad(g, 0, 2 * np.pi, limit=200)
    assert abs(val - oracles.KITE_PERIMETER) < 1e-10


def test_point_source_image_satisfies_transmission():
    # continuity and flux jump on the circle, checked by finite differences
    s, p = 4.0, 1.3 + 0.2j
    t = np.linspace(0, 2 * np.pi, 7)
    x = np.exp(1j * t)
    kappa = (s - 1) / (s + 1)
    H = lambda z: np.log(np.abs(z - p)) / (2 * np.pi)
    # interior field: every nonconstant mode scaled by 2/(s+1) = 1 - kappa
    inner = lambda z: (1 - kappa) * (H(z) - H(0j)) + H(0j)
    outer = lambda z: oracles.point_source_exterior(z, p, s)
    h = 1e-6
    assert np.allclose(inner(x), outer(x), atol=1e-12)
    d_out = (outer(x * (1 + h)) - outer(x)) / h
    d_in = (inner(x) - inner(x * (1 - h))) / h
    assert np.allclose(d_out, s * d_in, atol=1e-5)
