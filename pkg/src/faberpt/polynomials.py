"""Polynomials in (x1, x2) used as background potentials and test functions."""

from __future__ import annotations

from math import comb

import numpy as np

from .errors import InputError


class Polynomial2D:
    """sum_{(i, j)} c_ij x1^i x2^j with real or complex coefficients."""

    def __init__(self, coeffs: dict | None = None):
        self.coeffs = {tuple(map(int, k)): complex(v) for k, v in (coeffs or {}).items() if v != 0}

    # constructors
    @classmethod
    def monomial(cls, alpha, coeff=1.0):
        return cls({tuple(alpha): coeff})

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def zpow(cls, m: int, conjugate: bool = False, coeff: complex = 1.0):
        """coeff * z^m (or coeff * conj(z)^m) expanded in monomials."""
        sign = -1 if conjugate else 1
        return cls({(m - j, j): coeff * comb(m, j) * (sign * 1j) ** j for j in range(m + 1)})

    @classmethod
    def re_zpow(cls, m: int):
        return (cls.zpow(m) + cls.zpow(m, conjugate=True)) * 0.5

    @classmethod
    def im_zpow(cls, m: int):
        return (cls.zpow(m) - cls.zpow(m, conjugate=True)) * (-0.5j)

    # algebra
    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return Polynomial2D(out)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, s):
        return Polynomial2D({k: v * s for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.coeffs), default=0)

    @property
    def is_real(self) -> bool:
        return all(abs(v.imag) <= 1e-14 * max(1.0, abs(v)) for v in self.coeffs.values())

    def derivative(self, axis: int) -> "Polynomial2D":
        out = {}
        for (i, j), v in self.coeffs.items():
            if axis == 0 and i:
                out[(i - 1, j)] = out.get((i - 1, j), 0) + i * v
            elif axis == 1 and j:
                out[(i, j - 1)] = out.get((i, j - 1), 0) + j * v
        return Polynomial2D(out)

    def laplacian(self) -> "Polynomial2D":
        return self.derivative(0).derivative(0) + self.derivative(1).derivative(1)

    def is_harmonic(self) -> bool:
        return all(abs(v) < 1e-12 for v in self.laplacian().coeffs.values())

    # evaluation
    def value(self, z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        out = np.zeros(z.shape, dtype=complex)
        for (i, j), v in self.coeffs.items():
            out = out + v * x**i * y**j
        return out.real if self.is_real else out

    def gradient(self, z):
        return self.derivative(0).value(z), self.derivative(1).value(z)

    def normal_derivative(self, mesh):
        gx, gy = self.gradient(mesh.points)
        return gx * mesh.normals.real + gy * mesh.normals.imag

    def tangential_derivative(self, mesh):
        gx, gy = self.gradient(mesh.points)
        return gx * mesh.tangents.real + gy * mesh.tangents.imag

    def taylor_coefficient(self, beta) -> complex:
        """d^beta P(0) / beta!, i.e. the stored coefficient."""
        return self.coeffs.get(tuple(beta), 0j)

    def __repr__(self):
        return f"Polynomial2D({self.coeffs})"


class AnalyticFunction:
    """Boundary data for f(z) or conj(f(z)) with f analytic, given values and f'."""

    def __init__(self, f, df, conjugate: bool = False):
        self.f, self.df, self.conjugate = f, df, conjugate

    def value(self, z):
        v = self.f(z)
        return np.conj(v) if self.conjugate else v

    def gradient(self, z):
        d = self.df(z)
        gx, gy = d, 1j * d
        if self.conjugate:
            return np.conj(gx), np.conj(gy)
        return gx, gy

    def normal_derivative(self, mesh):
        gx, gy = self.gradient(mesh.points)
        return gx * mesh.normals.real + gy * mesh.normals.imag

    def tangential_derivative(self, mesh):
        gx, gy = self.gradient(mesh.points)
        return gx * mesh.tangents.real + gy * mesh.tangents.imag


def multi_indices(order: int):
    """All (a1, a2) with 1 <= a1 + a2 <= order, graded then lexicographic."""
    if order < 1:
        raise InputError("order must be >= 1")
    return [(d - j, j) for d in range(1, order + 1) for j in range(d + 1)]
