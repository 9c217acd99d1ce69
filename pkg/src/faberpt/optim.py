"""Shape reconstruction by matching contracted polarization tensors.

The cost pairs harmonic polynomials H, F drawn from {Re z^m, Im z^m : m <= K}
and compares the pairing int F (lam I - K*)^{-1}[dH/dnu] ds between the
current shape D and the target data.  Its shape derivative in the normal
direction h is

    sum_HF delta_HF int h (sigma0 - 1) [dv/dnu dU/dnu + dv/dT dU/dT / sigma0] ds

with U the transmission solution for H and v the dual solution for F,
both interior traces.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .conformal import mesh_from_map
from .errors import (ContrastError, FaberPTError, GeometryError, InitializationError,
                     InputError, UnsupportedContrastError)
from .gpt import GptTable, contracted_tensors
from .inversion import equivalent_ellipse_from_table, reference_shape
from .layerpot import Contrast, TransmissionSolver, as_contrast, assemble_double_layer
from .mesh import BoundaryMesh, FourierCurve
from .polynomials import Polynomial2D

log = logging.getLogger(__name__)

# Re(c z^m): c = 1 gives Re z^m, c = -i gives Im z^m
_PHASES = (1.0 + 0j, -1j)


@dataclass(frozen=True, eq=False)
class PolynomialPair:
    """Source H = Re(c z^m) and test F = Re(d z^k)."""

    m: int
    c: complex
    k: int
    d: complex

    @staticmethod
    def _poly(m, c) -> Polynomial2D:
        return Polynomial2D.re_zpow(m) if c == 1 else Polynomial2D.im_zpow(m)

    @property
    def H(self) -> Polynomial2D:
        return self._poly(self.m, self.c)

    @property
    def F(self) -> Polynomial2D:
        return self._poly(self.k, self.d)

    @property
    def label(self) -> str:
        name = {1: "Re", -1j: "Im"}
        return f"({name[self.c]} z^{self.m}, {name[self.d]} z^{self.k})"


def _sources(K: int):
    return [(m, c) for m in range(1, K + 1) for c in _PHASES]


def polynomial_pairs(K: int) -> list[PolynomialPair]:
    """All 4 K^2 pairs, H-major."""
    if K < 1:
        raise InputError("K must be >= 1")
    src = _sources(K)
    return [PolynomialPair(m, c, k, d) for m, c in src for k, d in src]


def pair_values(N1: np.ndarray, N2: np.ndarray, K: int) -> np.ndarray:
    """Pairing values V[i, j] for source i and test j (indices of ``_sources``).

    For H = Re(c z^m), F = Re(d z^k) the pairing is
    Re(d c N1_mk + d conj(c) N2_mk) / 2.
    """
    src = _sources(K)
    m = np.array([s[0] for s in src]) - 1
    c = np.array([s[1] for s in src])
    n1 = N1[np.ix_(m, m)]
    n2 = N2[np.ix_(m, m)]
    return 0.5 * (c[None, :] * c[:, None] * n1 + c[None, :] * np.conj(c)[:, None] * n2).real


def _check_contrast(contrast, dual: bool = False) -> Contrast:
    if isinstance(contrast, Contrast):
        c = contrast
    else:
        s = float(contrast)
        if not s >= 0 or s == 1:
            raise ContrastError(f"conductivity must be positive and differ from 1, got {s}")
        c = Contrast.from_sigma0(s)
    if dual and (c.sigma0 == 0 or np.isinf(c.sigma0)):
        raise UnsupportedContrastError(
            "the shape derivative needs a finite nonzero conductivity (sigma0 in {0, inf} unsupported)")
    return c


def _table_values(table: GptTable, K: int) -> np.ndarray:
    if table.order < K:
        raise InputError(f"target table order {table.order} < K = {K}")
    return pair_values(table.N1, table.N2, K)


def cost(mesh: BoundaryMesh, contrast, target_gpts: GptTable, K: int) -> float:
    """J_K = (1/2) sum over pairs of (pairing on D - pairing in the target)^2."""
    c = as_contrast(contrast)
    target = _table_values(target_gpts, K)
    ts = TransmissionSolver(mesh, c)
    N1, N2 = contracted_tensors(mesh, ts.solver, K)
    delta = pair_values(N1, N2, K) - target
    return 0.5 * float(np.sum(delta**2))


# --- dual problem -----------------------------------------------------------


class DualSolver:
    """Dual transmission problem sigma0 v|+ = v|-, dv/dnu|+ = dv/dnu|-, v - F = O(1/|x|).

    Represented as v = F + D[psi] with (lam I - K) psi = F, where D is the
    double-layer potential and K its boundary operator; the interior normal
    derivative uses d D[psi]/dnu = d/dT S[d psi/dT].
    """

    def __init__(self, mesh: BoundaryMesh, contrast, single_layer_matrix: np.ndarray | None = None):
        self.mesh = mesh
        self.contrast = _check_contrast(contrast, dual=True)
        self.K = assemble_double_layer(mesh)
        self._lu = scipy.linalg.lu_factor(self.contrast.lam * np.eye(mesh.n) - self.K)
        self._S = single_layer_matrix

    @cached_property
    def S(self) -> np.ndarray:
        from .layerpot import single_layer_boundary_matrix
        return self._S if self._S is not None else single_layer_boundary_matrix(self.mesh)

    def solve(self, F):
        """(dv/dnu|-, dv/dT|-, v|-) at the nodes."""
        mesh = self.mesh
        Fb = F.value(mesh.points)
        psi = scipy.linalg.lu_solve(self._lu, Fb)
        inner = Fb + 0.5 * psi + self.K @ psi
        dvdn = F.normal_derivative(mesh) + mesh.tangential_derivative(
            self.S @ mesh.tangential_derivative(psi))
        return dvdn, mesh.tangential_derivative(inner), inner


def dual_solve(mesh: BoundaryMesh, contrast, F):
    """Interior boundary gradients (dv/dnu|-, dv/dT|-) of the dual solution for F."""
    dvdn, dvdt, _ = DualSolver(mesh, contrast).solve(F)
    return dvdn, dvdt


# --- gradient ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ShapeGradient:
    values: np.ndarray  # steepest-descent normal speed sum delta_HF phi_HF
    basis: np.ndarray  # phi_HF, one row per pair
    deltas: np.ndarray  # current minus target pairing values
    cost: float
    pairs: list

    def directional(self, mesh: BoundaryMesh, h: np.ndarray) -> float:
        """<d_S J, h> = int gradient * h ds."""
        return float(mesh.integrate(self.values * h))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.deltas)


def _gradient_fields(mesh: BoundaryMesh, c: Contrast, K: int):
    ts = TransmissionSolver(mesh, c)
    ds = DualSolver(mesh, c, ts.single_layer_matrix)
    N1, N2 = contracted_tensors(mesh, ts.solver, K)
    u, v = [], []
    for m in range(1, K + 1):
        z = Polynomial2D.zpow(m)
        tr = ts.traces(z)
        dvdn, dvdt, _ = ds.solve(z)
        for ph in _PHASES:
            u.append(((ph * tr.dudn).real, (ph * tr.dudt).real))
            v.append(((ph * dvdn).real, (ph * dvdt).real))
    return pair_values(N1, N2, K), u, v


def shape_gradient(mesh: BoundaryMesh, contrast, target_gpts: GptTable, K: int) -> ShapeGradient:
    if K < 1:
        raise InputError("K must be >= 1")
    c = _check_contrast(contrast, dual=True)
    target = _table_values(target_gpts, K)
    values, u, v = _gradient_fields(mesh, c, K)
    delta = values - target
    s = c.sigma0
    basis = np.array([(s - 1) * (vn * un + vt * ut / s) for un, ut in u for vn, vt in v])
    grad = delta.ravel() @ basis
    return ShapeGradient(grad, basis, delta.ravel(), 0.5 * float(np.sum(delta**2)), polynomial_pairs(K))


# --- descent ----------------------------------------------------------------


@dataclass
class ReconOptions:
    max_iter: int = 100
    n: int = 256
    max_halvings: int = 20
    stagnation_tol: float = 1e-10
    stagnation_window: int = 5
    cost_tol: float = 1e-20  # relative to (1/2) sum of squared target pairings
    svd_cutoff: float = 1e-10
    max_move: float = 0.1  # cap on the trial displacement, as a fraction of the diameter
    max_mode: int | None = None  # Fourier modes kept when re-meshing, default n // 4
    reduce_reference_order: bool = True


@dataclass(eq=False)
class ReconProblem:
    target: GptTable
    contrast: Contrast
    K: int
    options: ReconOptions = field(default_factory=ReconOptions)

    @cached_property
    def cost_floor(self) -> float:
        scale = 0.5 * float(np.sum(_table_values(self.target, self.K) ** 2))
        return self.options.cost_tol * max(scale, 1.0)


@dataclass(eq=False)
class ReconState:
    mesh: BoundaryMesh
    problem: ReconProblem
    iteration: int = 0
    costs: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    ranks: list = field(default_factory=list)
    flags: set = field(default_factory=set)
    log: list = field(default_factory=list)
    init: dict = field(default_factory=dict)

    @property
    def cost(self) -> float:
        return self.costs[-1]

    @property
    def done(self) -> bool:
        return bool(self.flags & {"converged", "stagnated", "stuck"})


def remesh(points: np.ndarray, n: int, max_mode: int | None = None) -> BoundaryMesh:
    """Uniform-in-arclength mesh of the trigonometric interpolant through ``points``."""
    max_mode = max_mode or n // 4
    curve = FourierCurve.from_samples(points, max_mode=max_mode)
    return curve.arclength_reparametrized(n, max_mode=max_mode).mesh(n)


def _orthonormal_projection(mesh: BoundaryMesh, basis: np.ndarray, g: np.ndarray, cutoff: float):
    sw = np.sqrt(mesh.weights)
    _, s, vt = np.linalg.svd(basis * sw, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros_like(g), 0.0, 0
    rank = int(np.sum(s > cutoff * s[0]))
    q = vt[:rank]
    coef = q @ (g * sw)
    return (coef @ q) / sw, float(coef @ coef), rank


def descent_step(state: ReconState, gradient: ShapeGradient) -> ReconState:
    """One normalized steepest-descent update with backtracking and validity checks."""
    if not np.all(np.isfinite(gradient.values)):
        raise FaberPTError("non-finite shape gradient")
    prob = state.problem
    opts = prob.options
    mesh = state.mesh
    J = gradient.cost
    state.iteration += 1
    record = {"iter": state.iteration, "cost": J, "step": 0.0, "rank": 0, "flags": []}
    if J <= prob.cost_floor or gradient.is_zero:
        state.flags.add("converged")
        record["flags"] = ["converged"]
        state.log.append(record)
        return state
    proj, norm2, rank = _orthonormal_projection(mesh, gradient.basis, gradient.values, opts.svd_cutoff)
    record["rank"] = rank
    state.ranks.append(rank)
    if norm2 == 0 or not np.any(proj):
        state.flags.add("converged")
        record["flags"] = ["converged"]
        state.log.append(record)
        return state
    h = -(J / norm2) * proj
    t = min(1.0, opts.max_move * mesh.diameter / np.max(np.abs(h)))
    flags = []
    for _ in range(opts.max_halvings + 1):
        if t * np.max(np.abs(h)) < 1e-12 * mesh.diameter:
            break
        try:
            trial = remesh(mesh.points + t * h * mesh.normals, opts.n, opts.max_mode)
            J_new = cost(trial, prob.contrast, prob.target, prob.K)
        except GeometryError:
            flags.append("invalid_curve")
            t /= 2
            continue
        if np.isfinite(J_new) and J_new < J:
            state.mesh = trial
            state.costs.append(J_new)
            state.steps.append(t)
            record.update(cost=J_new, step=t)
            record["flags"] = sorted(set(flags))
            state.log.append(record)
            return state
        t /= 2
    state.flags.add("stuck")
    record["flags"] = sorted(set(flags) | {"stuck"})
    state.log.append(record)
    return state


def _stagnated(costs: list, window: int, tol: float) -> bool:
    if len(costs) <= window:
        return False
    old, new = costs[-window - 1], costs[-1]
    return abs(old - new) <= tol * abs(old)


def initial_mesh(target: GptTable, contrast: Contrast, K: int, init: str, n: int,
                 reduce_order: bool = True):
    """Initial mesh and a diagnostics dict for ``init`` in {'ellipse', 'reference'}.

    A self-intersecting reference shape of order K is retried at orders
    K-1, ..., 1 when ``reduce_order`` is set; the equivalent ellipse is the
    last resort.
    """
    info: dict = {"init": init}
    if init == "reference":
        N = min(K, target.order)
        rec = reference_shape(target, contrast, N)
        info["reference"] = rec.diagnostics()
        psi = rec.map if rec.simple else None
        while psi is None and reduce_order and N > 1:
            N -= 1
            lower = reference_shape(target, contrast, N)
            if lower.simple:
                psi = lower.map
        info["reference_order"] = N if psi is not None else None
        if psi is None:
            if rec.fallback is None:
                raise InitializationError("reference shape self-intersects and no fallback is available")
            info["fallback"] = "ellipse"
            psi = rec.fallback.to_map()
    elif init == "ellipse":
        ell = equivalent_ellipse_from_table(target, contrast)
        info["ellipse"] = ell.to_json()
        psi = ell.to_map()
    else:
        raise InputError(f"init must be 'ellipse' or 'reference', got {init!r}")
    try:
        base = mesh_from_map(psi, n)
        return remesh(base.points, n), info
    except GeometryError as exc:
        raise InitializationError(f"initial curve is invalid: {exc}") from exc


def reconstruct(target: GptTable, contrast, K: int, init="reference",
                opts: ReconOptions | None = None) -> ReconState:
    """Initialize (ellipse, reference shape, or a given mesh) then descend.

    Stops on convergence, on cost stagnation (relative change below
    ``stagnation_tol`` over ``stagnation_window`` steps), when no trial step
    is accepted, or after ``max_iter`` iterations.
    """
    opts = opts or ReconOptions()
    c = _check_contrast(contrast, dual=True)
    if K < 1 or target.order < K:
        raise InputError(f"need 1 <= K <= table order ({target.order}), got K={K}")
    if isinstance(init, BoundaryMesh):
        mesh, info = init, {"init": "mesh"}
    else:
        mesh, info = initial_mesh(target, c, K, init, opts.n, opts.reduce_reference_order)
    prob = ReconProblem(target, c, K, opts)
    state = ReconState(mesh, prob, init=info)
    state.costs.append(cost(mesh, c, target, K))
    state.log.append({"iter": 0, "cost": state.costs[0], "step": 0.0, "rank": 0, "flags": ["init"]})
    while state.iteration < opts.max_iter and not state.done:
        grad = shape_gradient(state.mesh, c, target, K)
        descent_step(state, grad)
        if _stagnated(state.costs, opts.stagnation_window, opts.stagnation_tol):
            state.flags.add("stagnated")
        log.debug("iter %d cost %.6e", state.iteration, state.cost)
    if not state.done:
        state.flags.add("max_iter")
    return state
