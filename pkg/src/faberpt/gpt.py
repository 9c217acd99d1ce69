"""Generalized and Faber-polynomial polarization tensors.

Index conventions follow the tensor definitions: for the contracted tensors
``N1[m-1, k-1]`` pairs the source z^m with the test function z^k, and
``N2[m-1, k-1]`` pairs the source conj(z^m) with z^k.  The FPT matrices are
laid out the same way with F_m / F_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .conformal import ConformalMap, FaberBasis, faber_coefficients, grunsky_matrix
from .errors import CompatibilityError, DomainError, InputError, ResolutionError, ResonanceError
from .layerpot import DensitySolver, TransmissionSolver, as_contrast
from .mesh import BoundaryMesh
from .polynomials import Polynomial2D, multi_indices


@dataclass(eq=False)
class GptTable:
    lam: float
    order: int
    N1: np.ndarray
    N2: np.ndarray
    M: dict = field(default_factory=dict)
    sigma0: float | None = None
    radius: float | None = None  # circumscribing radius about the origin
    metadata: dict = field(default_factory=dict)

    def contracted(self, m: int, k: int) -> tuple[complex, complex]:
        return complex(self.N1[m - 1, k - 1]), complex(self.N2[m - 1, k - 1])

    def first_order(self) -> np.ndarray:
        """2x2 block [[M_(1,0)(1,0), M_(1,0)(0,1)], [M_(0,1)(1,0), M_(0,1)(0,1)]]."""
        if self.M:
            e = [(1, 0), (0, 1)]
            return np.array([[self.M[(a, b)] for b in e] for a in e])
        return first_order_from_contracted(self.N1[0, 0], self.N2[0, 0])

    def truncated(self, K: int) -> "GptTable":
        M = {k: v for k, v in self.M.items() if sum(k[0]) <= K and sum(k[1]) <= K}
        return GptTable(self.lam, K, self.N1[:K, :K].copy(), self.N2[:K, :K].copy(), M,
                        self.sigma0, self.radius, dict(self.metadata))


@dataclass(eq=False)
class FptMatrices:
    F1: np.ndarray
    F2: np.ndarray
    provenance: str
    lam: float

    @property
    def order(self) -> int:
        return self.F1.shape[0]


def _complex_normal_data(mesh: BoundaryMesh, m: int) -> np.ndarray:
    """d z^m / d nu = m z^{m-1} nu on the boundary (complex normal)."""
    return m * mesh.points ** (m - 1) * mesh.normals


def compute_gpt(mesh: BoundaryMesh, contrast, alpha, beta) -> float:
    """M_{alpha beta} = int y^alpha (lam I - K*)^{-1}[nu . grad y^beta] ds."""
    if sum(alpha) < 1 or sum(beta) < 1:
        raise InputError("multi-indices must have |alpha|, |beta| >= 1")
    solver = TransmissionSolver(mesh, contrast)
    phi = solver.density(Polynomial2D.monomial(beta))
    return float(mesh.integrate(Polynomial2D.monomial(alpha).value(mesh.points) * phi))


def compute_contracted(mesh: BoundaryMesh, contrast, m: int, k: int) -> tuple[complex, complex]:
    """(N1_mk, N2_mk)."""
    if m < 1 or k < 1:
        raise InputError("m, k must be >= 1")
    solver = TransmissionSolver(mesh, contrast).solver
    data = _complex_normal_data(mesh, m)
    phi = solver.solve(np.stack([data, np.conj(data)], axis=1))
    zk = mesh.points**k * mesh.weights
    return complex(zk @ phi[:, 0]), complex(zk @ phi[:, 1])


def contracted_tensors(mesh: BoundaryMesh, solver: DensitySolver, K: int):
    """N1, N2 (K x K) sharing one factorization."""
    data = np.stack([_complex_normal_data(mesh, m) for m in range(1, K + 1)], axis=1)
    phi = solver.solve(np.concatenate([data, np.conj(data)], axis=1))
    tests = np.stack([mesh.points**k for k in range(1, K + 1)], axis=0) * mesh.weights
    vals = tests @ phi  # [k, source]
    return vals[:, :K].T.copy(), vals[:, K:].T.copy()


def compute_gpt_table(mesh: BoundaryMesh, contrast, K: int, real: bool = True) -> GptTable:
    """Contracted tensors to order K and, optionally, all real M_{alpha beta}.

    At |lambda| = 1/2 only sources with mean-zero normal data are admissible,
    so M_{alpha beta} is tabulated only for those beta.
    """
    c = as_contrast(contrast)
    ts = TransmissionSolver(mesh, c)
    N1, N2 = contracted_tensors(mesh, ts.solver, K)
    M = {}
    skipped = []
    if real:
        idx = multi_indices(K)
        tests = np.stack([Polynomial2D.monomial(a).value(mesh.points) for a in idx]) * mesh.weights
        for beta in idx:
            try:
                phi = ts.density(Polynomial2D.monomial(beta))
            except CompatibilityError:
                skipped.append(beta)
                continue
            col = tests @ phi
            for a, v in zip(idx, col):
                M[(a, beta)] = float(v)
    radius = float(np.max(np.abs(mesh.points)))
    meta = {"n": mesh.n}
    if skipped:
        meta["M_skipped_sources"] = [list(b) for b in skipped]
    return GptTable(c.lam, K, N1, N2, M, c.sigma0, radius, meta)


# --- real <-> contracted bookkeeping ------------------------------------------


def zpow_multi_coeffs(m: int, conjugate: bool = False) -> dict:
    return Polynomial2D.zpow(m, conjugate).coeffs


def contract_from_real(M: dict, m: int, k: int) -> tuple[complex, complex]:
    """N1_mk, N2_mk as linear combinations of real GPTs."""
    src = zpow_multi_coeffs(m)
    src_bar = zpow_multi_coeffs(m, conjugate=True)
    tst = zpow_multi_coeffs(k)
    n1 = sum(ca * cb * M[(a, b)] for a, ca in tst.items() for b, cb in src.items())
    n2 = sum(ca * cb * M[(a, b)] for a, ca in tst.items() for b, cb in src_bar.items())
    return complex(n1), complex(n2)


def first_order_from_contracted(n1_11: complex, n2_11: complex) -> np.ndarray:
    """Invert N1_11 = M11 - M22 + i(M12 + M21), N2_11 = M11 + M22 + i(M21 - M12).

    Here M12 = M_(1,0)(0,1), i.e. test x1 with source x2.
    """
    m11 = (n1_11.real + n2_11.real) / 2
    m22 = (n2_11.real - n1_11.real) / 2
    m12 = (n1_11.imag - n2_11.imag) / 2
    m21 = (n1_11.imag + n2_11.imag) / 2
    return np.array([[m11, m12], [m21, m22]])


# --- Faber polynomial polarization tensors -------------------------------------


def compute_fpt_quadrature(mesh: BoundaryMesh, psi: ConformalMap, contrast, N: int) -> FptMatrices:
    """F1_mk = int F_k (lam - K*)^{-1}[dF_m/dnu], F2_mk likewise with conj(F_m)."""
    c = as_contrast(contrast)
    faber = faber_coefficients(psi, N)
    F, dF = faber.evaluate(mesh.points, derivative=True)
    data = (dF[1:] * mesh.normals).T
    solver = DensitySolver(mesh, c.lam)
    phi = solver.solve(np.concatenate([data, np.conj(data)], axis=1))
    vals = (F[1:] * mesh.weights) @ phi
    return FptMatrices(vals[:, :N].T.copy(), vals[:, N:].T.copy(), "quadrature", c.lam)


def fpt_from_contracted(table: GptTable, faber: FaberBasis) -> FptMatrices:
    """F1 = A N1 A^T, F2 = conj(A) N2 A^T with A[m, n] = a_mn (m, n >= 1)."""
    K = min(table.order, faber.order)
    A = faber.table[1 : K + 1, 1 : K + 1]
    F1 = A @ table.N1[:K, :K] @ A.T
    F2 = np.conj(A) @ table.N2[:K, :K] @ A.T
    return FptMatrices(F1, F2, "contracted", table.lam)


def _grunsky_block(psi: ConformalMap, lam: float, size: int):
    # Scaled Grunsky matrix C~ = gamma^{-k} C gamma^{-k}.  The resolvents pair it with its
    # conjugate, (C~ conj C~) for F1 and (conj C~ C~) for F2; both equal C~^2 for real maps.
    C = grunsky_matrix(psi, size).matrix
    k = np.arange(1, size + 1)
    g = psi.gamma**k
    Ct = C / g[:, None] / g[None, :]
    eye = lam**2 * np.eye(size)
    A1 = eye - (Ct @ np.conj(Ct)) / 4
    A2 = eye - (np.conj(Ct) @ Ct) / 4
    for A in (A1, A2):
        if np.linalg.cond(A) > 1e12:
            raise ResonanceError("lambda^2 I - (C/2)(C/2)* is numerically singular")
    kk = 4 * np.pi * k[None, :]
    F1 = kk * (C + (0.25 - lam**2) * g[:, None] * np.linalg.solve(A1, Ct) * g[None, :])
    F2 = kk * (2 * lam * np.diag(g**2)
               + (0.25 - lam**2) * 2 * lam * g[:, None] * np.linalg.inv(A2) * g[None, :])
    return F1, F2


def compute_fpt_grunsky(psi: ConformalMap, contrast, N: int, size: int | None = None,
                        tol: float = 1e-6, max_size: int | None = None) -> FptMatrices:
    """FPTs from the Grunsky matrix (closed form in C, gamma and lambda).

    The infinite matrices are truncated to a leading size x size block,
    starting at 2N and grown by 4 until the requested N x N block changes by
    less than ``tol`` (relative to its largest entry).
    """
    c = as_contrast(contrast)
    size = 2 * N if size is None else size
    max_size = max(8 * N, size + 40) if max_size is None else max_size
    F1, F2 = _grunsky_block(psi, c.lam, size)
    while True:
        if size + 4 > max_size:
            raise ResolutionError(f"Grunsky truncation did not stabilize up to size {max_size}")
        G1, G2 = _grunsky_block(psi, c.lam, size + 4)
        scale = max(np.max(np.abs(G1[:N, :N])), np.max(np.abs(G2[:N, :N])))
        change = max(np.max(np.abs(G1[:N, :N] - F1[:N, :N])), np.max(np.abs(G2[:N, :N] - F2[:N, :N])))
        F1, F2, size = G1, G2, size + 4
        if change <= tol * scale:
            break
    out = FptMatrices(F1[:N, :N].copy(), F2[:N, :N].copy(), "grunsky", c.lam)
    return out


# --- field expansions ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FieldValue:
    """Truncated-series value with the magnitude of its last included term."""

    value: float
    tail_estimate: float

    def __float__(self):
        return float(self.value)


def _gamma_derivative(alpha, z: complex) -> float:
    n = alpha[0] + alpha[1]
    d = (-1) ** (n - 1) * factorial(n - 1) / z**n
    return float((1j ** alpha[1] * d).real / (2 * np.pi))


def multipole_field(gpts: GptTable, H: Polynomial2D, z: complex) -> FieldValue:
    """Classical multipole expansion of u at a far point z."""
    z = complex(z)
    if gpts.radius is not None and abs(z) <= gpts.radius:
        raise DomainError(f"|z| = {abs(z):.4g} is inside the circumscribing disk "
                          f"(radius {gpts.radius:.4g}); the multipole series does not converge")
    u = float(np.real(H.value(z)))
    last = 0.0
    for order in range(1, gpts.order + 1):
        term = 0.0
        for alpha in multi_indices(gpts.order):
            if sum(alpha) != order:
                continue
            coef = (-1) ** order / (factorial(alpha[0]) * factorial(alpha[1]))
            dG = _gamma_derivative(alpha, z)
            for (a, beta), value in gpts.M.items():
                if a == alpha:
                    term += coef * dG * value * H.taylor_coefficient(beta).real
        u += term
        last = abs(term)
    return FieldValue(u, last)


@dataclass(frozen=True, eq=False)
class HarmonicExpansion:
    """H = const + sum_{m>=1} alpha_m F_m + beta_m conj(F_m)."""

    alphas: np.ndarray  # index m-1
    betas: np.ndarray
    constant: complex
    faber: FaberBasis

    @classmethod
    def from_polynomial(cls, H: Polynomial2D, faber: FaberBasis) -> "HarmonicExpansion":
        if not H.is_harmonic():
            raise InputError("background potential must be harmonic")
        # collect coefficients of z^p conj(z)^q
        zz = {}
        for (i, j), v in H.coeffs.items():
            # x^i y^j = ((z + zb)/2)^i ((z - zb)/(2i))^j
            for a in range(i + 1):
                for b in range(j + 1):
                    p, q = a + b, (i - a) + (j - b)
                    c = v * comb(i, a) * comb(j, b) * (-1) ** (j - b) / (2**i * (2j) ** j)
                    zz[(p, q)] = zz.get((p, q), 0) + c
        M = faber.order
        if H.degree > M:
            raise InputError(f"polynomial degree {H.degree} exceeds Faber order {M}")
        P = np.zeros(M + 1, dtype=complex)
        Q = np.zeros(M + 1, dtype=complex)
        for (p, q), v in zz.items():
            if p and q:
                if abs(v) > 1e-12:
                    raise InputError("polynomial is not harmonic")
                continue
            if q == 0:
                P[p] += v
            else:
                Q[q] += v
        # z^n = sum_m B[n, m] F_m; the table is lower triangular, so only the
        # leading block up to the degree is needed (the full inverse is badly conditioned)
        d = H.degree + 1
        B = np.linalg.inv(faber.table[:d, :d])
        alpha = np.zeros(M + 1, dtype=complex)
        beta = np.zeros(M + 1, dtype=complex)
        alpha[:d] = P[:d] @ B
        beta[:d] = Q[:d] @ np.conj(B)
        return cls(alpha[1:], beta[1:], alpha[0] + beta[0], faber)

    def value(self, z):
        F = self.faber.evaluate(z)[1 : self.alphas.size + 1]
        return self.constant + np.tensordot(self.alphas, F, 1) + np.tensordot(self.betas, np.conj(F), 1)


def invert_map(psi: ConformalMap, z: complex, max_iter: int = 50, tol: float = 1e-14) -> complex:
    """w with Psi(w) = z and |w| >= gamma, or DomainError when z is inside the curve."""
    z = complex(z)

    def newton(w, target):
        for _ in range(max_iter):
            with np.errstate(all="ignore"):
                f, df, _ = psi.derivatives(np.array([w]))
                step = (f[0] - target) / df[0]
            if not np.isfinite(step):
                return w, False
            w -= step
            if abs(step) <= tol * max(1.0, abs(w)):
                return w, True
        return w, False

    w, ok = newton(z - psi.a(0), z)
    if ok and abs(w) >= psi.gamma * (1 - 1e-12):
        return w
    # continuation inward along the ray from a far point, where Psi ~ identity
    direction = (z - psi.a(0)) / abs(z - psi.a(0)) if z != psi.a(0) else 1.0
    far = psi.a(0) + direction * (abs(z - psi.a(0)) + 10 * psi.gamma + 10 * np.sum(np.abs(psi.coeffs)))
    w = far - psi.a(0)
    for s in np.linspace(0, 1, 201)[1:]:
        w, _ = newton(w, far + s * (z - far))
    f = psi.derivatives(np.array([w]))[0][0]
    if abs(f - z) > 1e-10 * max(1.0, abs(z)) or abs(w) < psi.gamma * (1 - 1e-12):
        raise DomainError(f"z = {z} is not in the exterior of the inclusion")
    return w


def geometric_field(fpts: FptMatrices, psi: ConformalMap, expansion: HarmonicExpansion,
                    z: complex) -> FieldValue:
    """u(z) from the Faber-polynomial expansion, valid everywhere outside the inclusion.

    u = H - (1/4pi) sum_k (1/k) [A_k w^{-k} + conj(A_k) conj(w^{-k})] with
    A_k = sum_m alpha_m F1_mk + beta_m F2_mk, for H real.
    """
    w = invert_map(psi, z)
    N = min(fpts.order, expansion.alphas.size)
    al = np.zeros(fpts.order, dtype=complex)
    be = np.zeros(fpts.order, dtype=complex)
    al[:N] = expansion.alphas[:N]
    be[:N] = expansion.betas[:N]
    A = al @ fpts.F1 + be @ fpts.F2
    B = al @ np.conj(fpts.F2) + be @ np.conj(fpts.F1)
    k = np.arange(1, fpts.order + 1)
    terms = (A * w ** (-k) + B * np.conj(w ** (-k))) / (4 * np.pi * k)
    H = complex(expansion.value(np.array([z]))[0])
    u = H - terms.sum()
    return FieldValue(float(u.real), float(abs(terms[-1])))
