import numpy as np
import pytest

import oracles
from faberpt.conformal import ConformalMap, faber_coefficients
from faberpt.errors import DomainError, InputError
from faberpt.gpt import (HarmonicExpansion, compute_contracted, compute_fpt_grunsky,
                         compute_fpt_quadrature, compute_gpt, compute_gpt_table, contract_from_real,
                         first_order_from_contracted, fpt_from_contracted, geometric_field,
                         invert_map, multipole_field)
from faberpt.layerpot import Contrast, solve_exterior
from faberpt.mesh import make_curve
from faberpt.polynomials import Polynomial2D
from faberpt.shapes import KITE_MAP

X1 = Polynomial2D.monomial((1, 0))


@pytest.mark.parametrize("lam", [0.5, -0.5, 0.75, -2.0])
def test_disk_contracted(lam):
    r = 1.5
    m = ConformalMap(r, []).mesh(128)
    t = compute_gpt_table(m, Contrast.from_lambda(lam), 3, real=False)
    assert np.allclose(t.N1, 0, atol=1e-12)
    expected = np.diag([oracles.disk_n2(r, lam, k) for k in (1, 2, 3)])
    assert np.allclose(t.N2, expected, rtol=1e-12, atol=1e-11)


def test_disk_first_order_tensor():
    m = ConformalMap(1.0, []).mesh(64)
    lam = 11 / 18
    M = compute_gpt_table(m, 10.0, 1).first_order()
    assert np.allclose(M, np.pi / lam * np.eye(2), atol=1e-13)


def test_symmetry_for_harmonic_sources(kite_mesh):
    t = compute_gpt_table(kite_mesh, 4.0, 3)
    assert np.allclose(t.N1, t.N1.T, atol=1e-12)
    assert np.allclose(t.N2, t.N2.conj().T, atol=1e-12)
    harmonic = [(1, 0), (0, 1), (1, 1)]
    for a in harmonic:
        for b in harmonic:
            assert t.M[(a, b)] == pytest.approx(t.M[(b, a)], rel=1e-10, abs=1e-12)
    # a non-harmonic source breaks the symmetry
    assert abs(t.M[((2, 0), (1, 0))] - t.M[((1, 0), (2, 0))]) > 1.0


def test_single_entry_matches_table(kite_mesh):
    t = compute_gpt_table(kite_mesh, 4.0, 2)
    assert compute_gpt(kite_mesh, 4.0, (1, 1), (2, 0)) == pytest.approx(t.M[((1, 1), (2, 0))])
    n1, n2 = compute_contracted(kite_mesh, 4.0, 2, 1)
    assert n1 == pytest.approx(t.N1[1, 0])
    assert n2 == pytest.approx(t.N2[1, 0])


def test_contracted_from_real(kite_mesh):
    t = compute_gpt_table(kite_mesh, 4.0, 3)
    for m in (1, 2, 3):
        for k in (1, 2, 3):
            n1, n2 = contract_from_real(t.M, m, k)
            assert n1 == pytest.approx(t.N1[m - 1, k - 1], rel=1e-9, abs=1e-9)
            assert n2 == pytest.approx(t.N2[m - 1, k - 1], rel=1e-9, abs=1e-9)
    assert np.allclose(first_order_from_contracted(t.N1[0, 0], t.N2[0, 0]), t.first_order())


def test_extreme_table_skips_incompatible_sources(kite_mesh):
    t = compute_gpt_table(kite_mesh, np.inf, 2)
    assert [2, 0] in t.metadata["M_skipped_sources"]
    assert ((1, 0), (1, 0)) in t.M


def test_bad_indices(kite_mesh):
    with pytest.raises(InputError):
        compute_gpt(kite_mesh, 2.0, (0, 0), (1, 0))


@pytest.mark.parametrize("lam", [0.5, -0.5, 0.75, -0.75, 2.0])
def test_two_path_fpt_complex_map(complex_map, lam):
    quad = compute_fpt_quadrature(complex_map.mesh(512), complex_map, Contrast.from_lambda(lam), 5)
    grun = compute_fpt_grunsky(complex_map, Contrast.from_lambda(lam), 5)
    scale = np.max(np.abs(quad.F2))
    assert np.max(np.abs(quad.F1 - grun.F1)) < 1e-9 * scale
    assert np.max(np.abs(quad.F2 - grun.F2)) < 1e-9 * scale


def test_fpt_from_contracted(complex_map):
    c = Contrast.from_lambda(0.75)
    mesh = complex_map.mesh(256)
    table = compute_gpt_table(mesh, c, 5, real=False)
    a = fpt_from_contracted(table, faber_coefficients(complex_map, 5))
    b = compute_fpt_quadrature(mesh, complex_map, c, 5)
    assert np.allclose(a.F1, b.F1, atol=1e-9)
    assert np.allclose(a.F2, b.F2, atol=1e-9)


def test_disk_fpt_closed_form():
    g = 0.8
    f = compute_fpt_grunsky(ConformalMap(g, [0.1]), Contrast.from_lambda(-0.75), 4)
    assert np.allclose(f.F1, 0, atol=1e-14)
    k = np.arange(1, 5)
    assert np.allclose(np.diag(f.F2), 2 * np.pi * k * g ** (2 * k) / -0.75)


def test_harmonic_expansion_reproduces_polynomial(complex_map):
    fb = faber_coefficients(complex_map, 6)
    H = Polynomial2D.re_zpow(3) + Polynomial2D.im_zpow(2) * 0.5 + X1
    ex = HarmonicExpansion.from_polynomial(H, fb)
    z = np.array([0.2 + 0.3j, -1.0 + 0.5j])
    assert np.allclose(ex.value(z), H.value(z), atol=1e-12)
    with pytest.raises(InputError):
        HarmonicExpansion.from_polynomial(Polynomial2D.monomial((2, 0)), fb)


def test_invert_map(complex_map):
    w = 1.3 * np.exp(0.4j)
    assert invert_map(complex_map, complex_map(w)) == pytest.approx(w)
    with pytest.raises(DomainError):
        invert_map(complex_map, complex_map.a(0))


def test_multipole_far_field_and_domain_check():
    mesh = make_curve("ellipse", {"a": 1.0, "b": 0.6}).mesh(256)
    s = 5.0
    t = compute_gpt_table(mesh, s, 8)
    z = 4.0 + 1.0j
    ref = solve_exterior(mesh, s, X1, z)
    val = multipole_field(t, X1, z)
    assert float(val) == pytest.approx(ref, abs=1e-7)
    assert val.tail_estimate < 1e-5
    with pytest.raises(DomainError):
        multipole_field(t, X1, 0.9)


def test_geometric_field_near_kite():
    mesh = KITE_MAP.mesh(512)
    s = 10.0
    fpt = compute_fpt_grunsky(KITE_MAP, s, 48)
    ex = HarmonicExpansion.from_polynomial(X1, faber_coefficients(KITE_MAP, 48))
    z0 = mesh.points[40] + 0.3 * mesh.normals[40]
    u = geometric_field(fpt, KITE_MAP, ex, z0)
    assert float(u) == pytest.approx(solve_exterior(mesh, s, X1, z0), abs=1e-6)
