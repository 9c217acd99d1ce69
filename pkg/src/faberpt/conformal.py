"""Exterior conformal maps, Faber polynomials and Grunsky coefficients.

A shape is represented by the exterior map

    Psi(w) = w + a_0 + a_1 / w + ... + a_N / w^N,    |w| >= gamma,

whose boundary curve is Psi(gamma e^{it}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError, ResolutionError
from .mesh import BoundaryMesh, Curve, FourierCurve


@dataclass(frozen=True, eq=False)
class ConformalMap:
    gamma: float
    coeffs: np.ndarray  # a_0 .. a_N

    def __post_init__(self):
        if not self.gamma > 0:
            raise InputError(f"conformal radius must be positive, got {self.gamma}")
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def a(self, n: int) -> complex:
        return complex(self.coeffs[n]) if n < self.coeffs.size else 0j

    def __call__(self, w):
        return evaluate_map(self, w)

    def derivatives(self, w):
        """Psi(w), Psi'(w), Psi''(w) without the domain check."""
        w = np.asarray(w, dtype=complex)
        n = np.arange(1, self.coeffs.size)
        an = self.coeffs[1:]
        inv = 1.0 / w[..., None]
        powers = inv ** n
        z = w + self.coeffs[0] + (powers * an).sum(-1)
        dz = 1 - (n * an * powers * inv).sum(-1)
        d2z = (n * (n + 1) * an * powers * inv**2).sum(-1)
        return z, dz, d2z

    def translated(self, c: complex) -> "ConformalMap":
        coeffs = self.coeffs.copy()
        coeffs[0] += c
        return ConformalMap(self.gamma, coeffs)

    def rotated(self, angle: float) -> "ConformalMap":
        n = np.arange(self.coeffs.size)
        return ConformalMap(self.gamma, self.coeffs * np.exp(1j * (n + 1) * angle))

    def scaled(self, s: float) -> "ConformalMap":
        n = np.arange(self.coeffs.size)
        return ConformalMap(self.gamma * s, self.coeffs * s ** (n + 1))

    def curve(self) -> "MapCurve":
        return MapCurve(self)

    def mesh(self, n: int) -> BoundaryMesh:
        return mesh_from_map(self, n)

    def area(self) -> float:
        """Enclosed area pi (gamma^2 - sum_n n |a_n|^2 gamma^{-2n}) of the truncated map."""
        n = np.arange(1, self.coeffs.size)
        return float(np.pi * (self.gamma**2 - np.sum(n * np.abs(self.coeffs[1:]) ** 2
                                                       * self.gamma ** (-2.0 * n))))

    def to_json(self) -> dict:
        return {"type": "conformal", "gamma": self.gamma,
                "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}


def evaluate_map(psi: ConformalMap, w):
    """Psi(w) for |w| >= gamma."""
    w_arr = np.asarray(w, dtype=complex)
    if np.any(np.abs(w_arr) < psi.gamma * (1 - 1e-14)):
        raise DomainError(f"|w| < gamma = {psi.gamma}: point inside the map's disk of definition")
    z = psi.derivatives(w_arr)[0]
    return complex(z) if np.ndim(z) == 0 else z


class MapCurve(Curve):
    """Boundary curve t -> Psi(gamma e^{it})."""

    def __init__(self, psi: ConformalMap):
        self.psi = psi

    def derivatives(self, t):
        w = self.psi.gamma * np.exp(1j * np.asarray(t, dtype=float))
        z, d1, d2 = self.psi.derivatives(w)
        return z, 1j * w * d1, -(w**2) * d2 - w * d1

    def to_fourier(self) -> FourierCurve:
        n = np.arange(1, self.psi.coeffs.size)
        modes = np.concatenate([[1, 0], -n])
        coeffs = np.concatenate([[self.psi.gamma, self.psi.coeffs[0]],
                                 self.psi.coeffs[1:] * self.psi.gamma ** (-n)])
        return FourierCurve(modes, coeffs)

    def metadata(self):
        return {"kind": "conformal", "gamma": self.psi.gamma, "order": self.psi.order}


def mesh_from_map(psi: ConformalMap, n: int) -> BoundaryMesh:
    if n < 32 or n % 2:
        raise InputError(f"map meshes need an even node count >= 32, got {n}")
    return MapCurve(psi).mesh(n)


# --- Faber polynomials ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FaberBasis:
    """F_m(z) = sum_{n<=m} table[m, n] z^n for m = 0..order."""

    table: np.ndarray
    map_coeffs: np.ndarray

    @property
    def order(self) -> int:
        return self.table.shape[0] - 1

    def polynomial(self, m: int) -> np.ndarray:
        return self.table[m, : m + 1]

    def evaluate(self, z, derivative: bool = False):
        """Values (and z-derivatives) of F_0..F_M at z, by the three-term-free recursion.

        Evaluating the recursion on values avoids the cancellation of the
        monomial form when |a_0| or gamma is large.
        """
        z = np.asarray(z, dtype=complex)
        M = self.order
        a = np.zeros(M + 1, dtype=complex)
        a[: min(M + 1, self.map_coeffs.size)] = self.map_coeffs[: M + 1]
        F = np.zeros((M + 1,) + z.shape, dtype=complex)
        dF = np.zeros_like(F)
        F[0] = 1.0
        for n in range(M):
            s = sum(a[j] * F[n - j] for j in range(n + 1))
            F[n + 1] = z * F[n] - n * a[n] - s
            if derivative:
                ds = sum(a[j] * dF[n - j] for j in range(n + 1))
                dF[n + 1] = F[n] + z * dF[n] - ds
        return (F, dF) if derivative else F


def faber_coefficients(psi: ConformalMap, M: int) -> FaberBasis:
    """Coefficient table of F_0..F_M from

        F_{n+1}(z) = z F_n(z) - n a_n - sum_{s=0}^{n} a_s F_{n-s}(z).
    """
    if M < 1:
        raise InputError("Faber order must be >= 1")
    a = np.array([psi.a(j) for j in range(M + 1)])
    T = np.zeros((M + 1, M + 1), dtype=complex)
    T[0, 0] = 1.0
    for n in range(M):
        row = np.zeros(M + 1, dtype=complex)
        row[1 : n + 2] = T[n, : n + 1]
        row[0] -= n * a[n]
        for s in range(n + 1):
            row -= a[s] * T[n - s]
        T[n + 1] = row
    return FaberBasis(T, a)


# --- Grunsky coefficients ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class GrunskyMatrix:
    """c[m-1, k-1] = coefficient of w^{-k} in F_m(Psi(w)), m, k = 1..N."""

    matrix: np.ndarray

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    def c(self, m: int, k: int) -> complex:
        return complex(self.matrix[m - 1, k - 1])


def grunsky_matrix(psi: ConformalMap, N: int, truncation: int | None = None) -> GrunskyMatrix:
    """Grunsky coefficients by truncated Laurent composition.

    Works on the exponent window [-truncation, N]; composing F_m with Psi
    loses one exact negative exponent per multiplication by Psi, so the
    window must reach at least 2N below zero.
    """
    if N < 1:
        raise InputError("Grunsky order must be >= 1")
    T = 2 * N + 1 if truncation is None else truncation
    if T < 2 * N:
        raise ResolutionError(
            f"Laurent truncation {T} cannot resolve Grunsky order {N} (needs >= {2 * N})")
    lo = -T
    size = N - lo + 1  # exponents lo..N, index = exponent - lo
    psi_terms = [(1, 1.0 + 0j), (0, psi.a(0))] + [(-n, psi.a(n)) for n in range(1, psi.order + 1)]
    a = [psi.a(j) for j in range(N + 1)]

    def times_psi(G):
        out = np.zeros(size, dtype=complex)
        for p, coeff in psi_terms:
            if coeff == 0:
                continue
            if p >= 0:
                out[p:] += coeff * G[: size - p]
            else:
                out[: size + p] += coeff * G[-p:]
        return out

    G = [np.zeros(size, dtype=complex)]
    G[0][0 - lo] = 1.0
    for n in range(N):
        nxt = times_psi(G[n])
        nxt[0 - lo] -= n * a[n]
        for s in range(n + 1):
            nxt -= a[s] * G[n - s]
        G.append(nxt)
    C = np.zeros((N, N), dtype=complex)
    for m in range(1, N + 1):
        for k in range(1, N + 1):
            C[m - 1, k - 1] = G[m][-k - lo]
    return GrunskyMatrix(C)
