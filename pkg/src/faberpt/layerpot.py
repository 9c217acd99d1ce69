"""Nystrom discretization of the Laplace layer potentials on a closed curve.

Conventions: Gamma(x) = ln|x| / (2 pi); the Neumann-Poincare operator is

    K*[phi](x) = (1/2pi) p.v. int <x - y, nu_x> / |x - y|^2 phi(y) ds(y),

and ``+`` / ``-`` traces are exterior / interior limits, so that
d S[phi]/d nu |_{+-} = (+-1/2 I + K*) phi.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import AssemblyError, CompatibilityError, ContrastError
from .mesh import BoundaryMesh


class NearBoundaryWarning(UserWarning):
    """Evaluation point within one mesh spacing of the boundary."""


@dataclass(frozen=True)
class Contrast:
    sigma0: float
    lam: float

    @classmethod
    def from_sigma0(cls, sigma0: float) -> "Contrast":
        sigma0 = float(sigma0)
        if not sigma0 >= 0 or sigma0 == 1:
            raise ContrastError(f"conductivity must lie in [0, inf] and differ from 1, got {sigma0}")
        if np.isinf(sigma0):
            return cls(sigma0, 0.5)
        return cls(sigma0, (sigma0 + 1) / (2 * (sigma0 - 1)))

    @classmethod
    def from_lambda(cls, lam: float) -> "Contrast":
        lam = float(lam)
        if not abs(lam) >= 0.5:
            raise ContrastError(f"|lambda| must be >= 1/2, got {lam}")
        if lam == 0.5:
            return cls(np.inf, lam)
        return cls((2 * lam + 1) / (2 * lam - 1), lam)

    @property
    def extreme(self) -> bool:
        return abs(self.lam) == 0.5


def as_contrast(value) -> Contrast:
    """Accept a Contrast or a bare sigma0."""
    return value if isinstance(value, Contrast) else Contrast.from_sigma0(value)


# --- assembly ---------------------------------------------------------------


def _differences(mesh: BoundaryMesh):
    d = mesh.points[:, None] - mesh.points[None, :]
    r2 = np.abs(d) ** 2
    np.fill_diagonal(r2, 1.0)
    if np.any(r2 < 1e-28 * mesh.perimeter**2):
        raise AssemblyError("coincident boundary nodes")
    return d, r2


@dataclass(frozen=True, eq=False)
class NpMatrix:
    matrix: np.ndarray
    mesh: BoundaryMesh

    @property
    def n(self) -> int:
        return self.mesh.n

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


def assemble_np(mesh: BoundaryMesh) -> NpMatrix:
    """K* with the smooth diagonal limit kappa / (4 pi)."""
    d, r2 = _differences(mesh)
    nu = mesh.normals
    K = (d.real * nu.real[:, None] + d.imag * nu.imag[:, None]) / r2 / (2 * np.pi)
    np.fill_diagonal(K, mesh.curvature / (4 * np.pi))
    return NpMatrix(K * mesh.weights[None, :], mesh)


def assemble_double_layer(mesh: BoundaryMesh) -> np.ndarray:
    """Boundary double-layer operator K (the L2 adjoint of K*)."""
    d, r2 = _differences(mesh)
    nu = mesh.normals
    K = -(d.real * nu.real[None, :] + d.imag * nu.imag[None, :]) / r2 / (2 * np.pi)
    np.fill_diagonal(K, mesh.curvature / (4 * np.pi))
    return K * mesh.weights[None, :]


def _kress_log_weights(n: int) -> np.ndarray:
    """Circulant weights R(t_i - t_j) for int ln(4 sin^2((t-s)/2)) f(s) ds."""
    p = n // 2
    tau = 2 * np.pi * np.arange(n) / n
    m = np.arange(1, p)
    R = -(2 * np.pi / p) * (np.cos(np.outer(tau, m)) / m).sum(axis=1) \
        - (np.pi / p**2) * np.cos(p * tau)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return R[idx]


def single_layer_boundary_matrix(mesh: BoundaryMesh) -> np.ndarray:
    """S on the boundary itself, spectrally accurate via log-singularity splitting."""
    n = mesh.n
    t = mesh.theta
    dt = t[:, None] - t[None, :]
    s2 = 4 * np.sin(dt / 2) ** 2
    np.fill_diagonal(s2, 1.0)
    d = np.abs(mesh.points[:, None] - mesh.points[None, :]) ** 2
    np.fill_diagonal(d, 1.0)
    L = np.log(d / s2)
    np.fill_diagonal(L, np.log(mesh.speed**2))
    R = _kress_log_weights(n)
    return (R + (2 * np.pi / n) * L) * mesh.speed[None, :] / (4 * np.pi)


# --- density solve ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Density:
    values: np.ndarray
    mesh: BoundaryMesh
    lam: float


class DensitySolver:
    """Factorized (lam I - A) for repeated right-hand sides.

    With ``adjoint=True`` the operator is the double layer K instead of K*.
    At |lam| = 1/2 the system is bordered with the constraint
    int phi ds = 0 and a Lagrange multiplier on the constant vector.
    """

    def __init__(self, mesh: BoundaryMesh, lam: float, kstar: NpMatrix | None = None,
                 adjoint: bool = False):
        if not abs(lam) >= 0.5:
            raise ContrastError(f"|lambda| must be >= 1/2, got {lam}")
        self.mesh = mesh
        self.lam = float(lam)
        self.extreme = abs(self.lam) == 0.5
        if adjoint:
            A = assemble_double_layer(mesh)
        else:
            A = (kstar if kstar is not None else assemble_np(mesh)).matrix
        n = mesh.n
        system = self.lam * np.eye(n) - A
        if self.extreme:
            bordered = np.zeros((n + 1, n + 1))
            bordered[:n, :n] = system
            bordered[:n, n] = 1.0
            bordered[n, :n] = mesh.weights
            system = bordered
        self._lu = scipy.linalg.lu_factor(system)

    def solve(self, data: np.ndarray) -> np.ndarray:
        data = np.asarray(data)
        if self.extreme:
            w = self.mesh.weights
            mean = np.tensordot(w, data, axes=(0, 0))
            scale = np.tensordot(w, np.abs(data), axes=(0, 0))
            bad = np.abs(mean) > 1e-8 * scale + 1e-300
            if np.any(bad):
                worst = np.max(np.abs(np.atleast_1d(mean)))
                raise CompatibilityError(
                    f"data must integrate to zero at |lambda| = 1/2; residual mean {worst:.3e}",
                    residual_mean=worst)
            pad = np.zeros((1,) + data.shape[1:], dtype=data.dtype)
            return scipy.linalg.lu_solve(self._lu, np.concatenate([data, pad]))[: self.mesh.n]
        return scipy.linalg.lu_solve(self._lu, data)


def solve_density(kstar: NpMatrix, lam: float, data: np.ndarray) -> Density:
    """phi with (lam I - K*) phi = data (mean-zero branch at |lam| = 1/2)."""
    solver = DensitySolver(kstar.mesh, lam, kstar=kstar)
    return Density(solver.solve(data), kstar.mesh, float(lam))


# --- potentials -------------------------------------------------------------


def _near_boundary(mesh: BoundaryMesh, z: np.ndarray) -> np.ndarray:
    dist = np.min(np.abs(z[..., None] - mesh.points), axis=-1)
    return dist < mesh.spacing


def single_layer(mesh: BoundaryMesh, density, z):
    """S[phi](z) off the boundary by the trapezoidal rule."""
    phi = density.values if isinstance(density, Density) else np.asarray(density)
    z_arr = np.asarray(z, dtype=complex)
    near = _near_boundary(mesh, z_arr)
    if np.any(near):
        warnings.warn(f"{int(np.sum(near))} evaluation point(s) within one mesh spacing of the "
                      "boundary; quadrature accuracy is degraded", NearBoundaryWarning, stacklevel=2)
    logs = np.log(np.abs(z_arr[..., None] - mesh.points))
    out = (logs * (phi * mesh.weights)).sum(-1) / (2 * np.pi)
    return out.item() if out.ndim == 0 else out


def solve_exterior(mesh: BoundaryMesh, contrast, H, z):
    """u(z) = H(z) + S[phi](z) for the transmission problem with background H."""
    c = as_contrast(contrast)
    kstar = assemble_np(mesh)
    dens = solve_density(kstar, c.lam, H.normal_derivative(mesh))
    z_arr = np.asarray(z, dtype=complex)
    out = H.value(z_arr) + single_layer(mesh, dens, z_arr)
    return out.item() if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class BoundaryTraces:
    """Interior traces of the transmission solution u = H + S[phi]."""

    dudn: np.ndarray
    dudt: np.ndarray
    density: Density
    value: np.ndarray

    def __iter__(self):
        return iter((self.dudn, self.dudt))


class TransmissionSolver:
    """All boundary quantities for one mesh and contrast, sharing one factorization."""

    def __init__(self, mesh: BoundaryMesh, contrast):
        self.mesh = mesh
        self.contrast = as_contrast(contrast)
        self.kstar = assemble_np(mesh)
        self.solver = DensitySolver(mesh, self.contrast.lam, kstar=self.kstar)

    @cached_property
    def single_layer_matrix(self) -> np.ndarray:
        return single_layer_boundary_matrix(self.mesh)

    def density(self, H) -> np.ndarray:
        return self.solver.solve(H.normal_derivative(self.mesh))

    def traces(self, H) -> BoundaryTraces:
        mesh = self.mesh
        phi = self.density(H)
        dudn = H.normal_derivative(mesh) + (self.kstar.matrix @ phi - 0.5 * phi)
        value = H.value(mesh.points) + self.single_layer_matrix @ phi
        dudt = mesh.tangential_derivative(value)
        return BoundaryTraces(dudn, dudt, Density(phi, mesh, self.contrast.lam), value)


def boundary_gradients(mesh: BoundaryMesh, contrast, H):
    """Interior normal and tangential derivatives (du/dnu|-, du/dT|-) at the nodes."""
    tr = TransmissionSolver(mesh, contrast).traces(H)
    return tr.dudn, tr.dudt
