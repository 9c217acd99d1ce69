import numpy as np
import pytest
import scipy.linalg

from faberpt.conformal import ConformalMap
from faberpt.errors import ContrastError, InputError, UnsupportedContrastError
from faberpt.gpt import compute_gpt_table
from faberpt.layerpot import TransmissionSolver
from faberpt.mesh import FourierCurve, make_curve
from faberpt.layerpot import Contrast
from faberpt.optim import (DualSolver, ReconOptions, ReconProblem, ReconState, cost, descent_step,
                           dual_solve, pair_values, polynomial_pairs, reconstruct, remesh,
                           shape_gradient)
from faberpt.polynomials import Polynomial2D


def disk(r, n=256):
    return ConformalMap(r, []).mesh(n)


def perturbed(mesh, h, eps):
    return FourierCurve.from_samples(mesh.points + eps * h * mesh.normals).mesh(mesh.n)


def smooth_field(mesh, rng, modes=5, size=0.2):
    k = np.arange(1, modes + 1)
    a, b = rng.normal(size=(2, modes))
    return size * (a @ np.cos(np.outer(k, mesh.theta)) + b @ np.sin(np.outer(k, mesh.theta)))


def test_pairs_are_harmonic_and_complete():
    pairs = polynomial_pairs(3)
    assert len(pairs) == 36
    assert all(p.H.is_harmonic() and p.F.is_harmonic() for p in pairs)
    assert pairs[1].label == "(Re z^1, Im z^1)"


def test_pair_values_match_direct_integrals(kite_mesh):
    s, K = 4.0, 2
    t = compute_gpt_table(kite_mesh, s, K, real=False)
    V = pair_values(t.N1, t.N2, K).ravel()
    ts = TransmissionSolver(kite_mesh, s)
    for p, v in zip(polynomial_pairs(K), V):
        direct = kite_mesh.integrate(p.F.value(kite_mesh.points) * ts.density(p.H))
        assert v == pytest.approx(direct, rel=1e-10, abs=1e-10)


def test_cost_zero_and_disk_closed_form():
    s = 10.0
    lam = 11 / 18
    target = compute_gpt_table(disk(1.0), s, 2, real=False)
    assert cost(disk(1.0), s, target, 2) == 0.0
    expected = 0.5 * 2 * (np.pi * (1 - 1.1**2) / lam) ** 2
    assert cost(disk(1.1), s, target, 1) == pytest.approx(expected, rel=1e-10)


def test_cost_invariant_under_node_relabeling(kite_mesh):
    target = compute_gpt_table(disk(1.0), 10.0, 3, real=False)
    a = cost(kite_mesh, 10.0, target, 3)
    assert cost(kite_mesh.rolled(41), 10.0, target, 3) == pytest.approx(a, rel=1e-12)


def test_cost_order_check(kite_mesh):
    target = compute_gpt_table(disk(1.0), 10.0, 2, real=False)
    with pytest.raises(InputError):
        cost(kite_mesh, 10.0, target, 3)


def test_dual_constant_gives_zero(kite_mesh):
    dvdn, dvdt = dual_solve(kite_mesh, 3.0, Polynomial2D.constant(2.0))
    assert np.allclose(dvdn, 0, atol=1e-10) and np.allclose(dvdt, 0, atol=1e-10)


def test_dual_disk_closed_form():
    s = 3.0
    m = disk(1.0, 128)
    dvdn, dvdt = dual_solve(m, s, Polynomial2D.monomial((1, 0)))
    assert np.allclose(dvdn, 2 * s / (s + 1) * np.cos(m.theta), atol=1e-12)
    assert np.allclose(dvdt, -2 * s / (s + 1) * np.sin(m.theta), atol=1e-11)


def test_dual_jump_and_flux_conditions(kite_mesh):
    s = 10.0
    F = Polynomial2D.zpow(3)
    ds = DualSolver(kite_mesh, s)
    Fb = F.value(kite_mesh.points)
    psi = scipy.linalg.lu_solve(ds._lu, Fb)
    outer = Fb - 0.5 * psi + ds.K @ psi
    dvdn, dvdt, inner = ds.solve(F)
    assert np.max(np.abs(s * outer - inner)) < 1e-10 * np.max(np.abs(inner))
    # v equals sigma0 times the transmission solution for F inside the inclusion
    tr = TransmissionSolver(kite_mesh, s).traces(F)
    scale = np.max(np.abs(dvdn))
    assert np.max(np.abs(dvdn - s * tr.dudn)) < 1e-9 * scale
    assert np.max(np.abs(dvdt - s * tr.dudt)) < 1e-9 * scale


@pytest.mark.parametrize("sigma0", [0.0, np.inf])
def test_dual_rejects_extreme_contrast(kite_mesh, sigma0):
    with pytest.raises(UnsupportedContrastError):
        dual_solve(kite_mesh, sigma0, Polynomial2D.monomial((1, 0)))


def test_gradient_zero_at_truth(kite_mesh):
    target = compute_gpt_table(kite_mesh, 10.0, 3, real=False)
    g = shape_gradient(kite_mesh, 10.0, target, 3)
    assert g.cost == 0.0 and g.is_zero and not np.any(g.values)


def test_disk_first_variation_second_order():
    s, r = 10.0, 1.0
    m = disk(r)
    target = compute_gpt_table(m, s, 1, real=False)
    g = shape_gradient(m, s, target, 1)
    dM = m.integrate(g.basis[0])  # pair (Re z, Re z), normal speed h = 1
    assert dM == pytest.approx(4 * np.pi * r * (s - 1) / (s + 1), rel=1e-10)
    m11 = lambda rad: compute_gpt_table(disk(rad), s, 1).first_order()[0, 0]
    errs = [abs(m11(r + e) - m11(r) - e * dM) for e in (1e-2, 1e-3, 1e-4)]
    order = np.polyfit(np.log10([1e-2, 1e-3, 1e-4]), np.log10(errs), 1)[0]
    assert order == pytest.approx(2.0, abs=0.1)


def test_kite_directional_derivative(kite_mesh, rng):
    s, K = 10.0, 3
    target = compute_gpt_table(ConformalMap(1.3, [0, 0.2]).mesh(256), s, K, real=False)
    g = shape_gradient(kite_mesh, s, target, K)
    for _ in range(3):
        h = smooth_field(kite_mesh, rng)
        fd = (cost(perturbed(kite_mesh, h, 1e-4), s, target, K) - g.cost) / 1e-4
        d = g.directional(kite_mesh, h)
        assert abs(fd - d) < 1e-2 * abs(d)


def test_descent_step_zero_gradient_keeps_state(kite_mesh):
    target = compute_gpt_table(kite_mesh, 10.0, 2, real=False)
    state = ReconState(kite_mesh, ReconProblem(target, Contrast.from_sigma0(10.0), 2), costs=[0.0])
    g = shape_gradient(kite_mesh, 10.0, target, 2)
    out = descent_step(state, g)
    assert out.mesh is kite_mesh and "converged" in out.flags


def test_remesh_preserves_curve(kite_mesh):
    m = remesh(kite_mesh.points, 256)
    assert m.area == pytest.approx(kite_mesh.area, rel=1e-6)
    # the low-pass filter after resampling leaves a small speed ripple
    assert np.std(m.speed) / np.mean(m.speed) < 1e-2


def test_disk_to_disk_descent():
    s = 10.0
    target = compute_gpt_table(disk(1.0), s, 2, real=False)
    st = reconstruct(target, s, 2, init=disk(1.2), opts=ReconOptions(max_iter=50))
    assert np.max(np.abs(np.abs(st.mesh.points) - 1.0)) < 1e-3
    assert np.all(np.diff(st.costs) < 0)
    assert st.log[0]["flags"] == ["init"] and {"iter", "cost", "step", "rank", "flags"} <= set(st.log[1])


@pytest.mark.parametrize("init", ["ellipse", "reference"])
def test_disk_target_both_inits(init):
    target = compute_gpt_table(disk(1.0), 10.0, 2, real=False)
    st = reconstruct(target, 10.0, 2, init=init, opts=ReconOptions(max_iter=60))
    assert np.max(np.abs(np.abs(st.mesh.points) - 1.0)) < 1e-3
    assert st.cost < 1e-8


def test_stationary_at_truth(kite_mesh):
    target = compute_gpt_table(kite_mesh, 10.0, 3, real=False)
    st = reconstruct(target, 10.0, 3, init=kite_mesh)
    assert st.cost < 1e-10 and np.max(np.abs(st.mesh.points - kite_mesh.points)) < 1e-8
    assert "converged" in st.flags


@pytest.mark.parametrize("sigma0", [-1.0, 0.0, 1.0])
def test_degenerate_contrast_guard(kite_mesh, sigma0):
    target = compute_gpt_table(kite_mesh, 10.0, 2, real=False)
    with pytest.raises(ContrastError):
        reconstruct(target, sigma0, 2)


def test_bad_init_name(kite_mesh):
    target = compute_gpt_table(kite_mesh, 10.0, 2, real=False)
    with pytest.raises(InputError):
        reconstruct(target, 10.0, 2, init="circle")


def test_reference_order_reduction_and_fallback():
    t = compute_gpt_table(make_curve("kite").mesh(512), 0.5, 6, real=False)
    opts = ReconOptions(max_iter=0)
    st = reconstruct(t, 0.5, 6, init="reference", opts=opts)
    assert st.init["reference"]["simple_curve"] is False
    assert st.init["reference_order"] < 6
    st = reconstruct(t, 0.5, 6, init="reference", opts=ReconOptions(max_iter=0, reduce_reference_order=False))
    assert st.init["fallback"] == "ellipse"
