"""Regenerate the frozen Laurent coefficients of the built-in kite and
perturbed-circle maps (faberpt/shapes.py).

For a perfect conductor, F1_m1 = 4 pi m a_m where F_m are the Faber
polynomials of a_0..a_{m-1}; evaluating F_m on the boundary by its recursion
keeps every step well conditioned, so the coefficients are computed one at a
time directly from boundary quadrature on a fine mesh.

    python scripts/fit_builtin_maps.py
"""

import numpy as np

from faberpt.conformal import FaberBasis
from faberpt.layerpot import DensitySolver
from faberpt.mesh import make_curve


def fit(kind, n=2048, order=40, tol=1e-7):
    mesh = make_curve(kind).mesh(n)
    solver = DensitySolver(mesh, 0.5)
    z, nu, w = mesh.points, mesh.normals, mesh.weights
    zbar_data = np.conj(nu)
    n2_11 = np.sum(z * solver.solve(zbar_data) * w)
    n2_21 = np.sum(z * solver.solve(np.conj(2 * z * nu)) * w)
    gamma = np.sqrt(n2_11.real / (4 * np.pi))
    a = [np.conj(n2_21) / (2 * n2_11.real)]
    for m in range(1, order + 1):
        faber = FaberBasis(np.zeros((m + 1, m + 1)), np.array(a + [0j]))
        F, dF = faber.evaluate(z, derivative=True)
        phi = solver.solve(dF[m] * nu)
        a.append(np.sum((z - a[0]) * phi * w) / (4 * np.pi * m))
    a = np.array(a)
    last = np.max(np.nonzero(np.abs(a) * gamma ** (-np.arange(a.size)) > tol)[0])
    return gamma, a[: last + 1]


if __name__ == "__main__":
    for kind in ("kite", "perturbed_circle"):
        gamma, a = fit(kind)
        print(kind, repr(float(gamma)))
        print("  [" + ",\n   ".join(f"({c.real:.12e}, {c.imag:.12e})" for c in a) + "]")
