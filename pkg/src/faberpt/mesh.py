"""Boundary meshes and closed parametric curves.

Every curve here is 2*pi-periodic in its parameter ``t`` and is sampled on a
uniform grid in ``t``; the trapezoidal rule on such a grid is spectrally
accurate for the smooth periodic integrands produced by layer potentials.
Points in the plane are stored as complex numbers ``x1 + i x2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import GeometryError, InputError


@dataclass(frozen=True, eq=False)
class BoundaryMesh:
    """Quadrature nodes on a closed curve, counterclockwise.

    ``normals`` and ``tangents`` are unit complex numbers with
    ``normal = -1j * tangent`` (outward for a counterclockwise curve).
    ``weights`` are arclength weights ``|z'(t_j)| * 2 pi / n``.
    """

    theta: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    curvature: np.ndarray
    weights: np.ndarray
    speed: np.ndarray
    source: Any = field(default=None, repr=False)
    metadata: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.points.size

    @property
    def x(self) -> np.ndarray:
        return self.points.real

    @property
    def y(self) -> np.ndarray:
        return self.points.imag

    @property
    def perimeter(self) -> float:
        return float(self.weights.sum())

    @property
    def area(self) -> float:
        dz = self.tangents * self.speed
        return float(0.5 * np.sum(np.imag(np.conj(self.points) * dz)) * 2 * np.pi / self.n)

    @property
    def spacing(self) -> float:
        """Largest distance between consecutive nodes."""
        return float(np.max(np.abs(np.diff(np.append(self.points, self.points[0])))))

    @property
    def diameter(self) -> float:
        z = self.points
        return float(np.max(np.abs(z[:, None] - z[None, :])))

    def integrate(self, values: np.ndarray) -> Any:
        return np.sum(values * self.weights)

    def mean(self, values: np.ndarray) -> Any:
        return self.integrate(values) / self.perimeter

    def tangential_derivative(self, values: np.ndarray) -> np.ndarray:
        """d/ds of boundary samples by Fourier differentiation in ``t``."""
        return fourier_derivative(values) / self.speed

    def translated(self, c: complex) -> "BoundaryMesh":
        return BoundaryMesh(self.theta, self.points + c, self.tangents, self.normals,
                            self.curvature, self.weights, self.speed)

    def scaled(self, s: float) -> "BoundaryMesh":
        return BoundaryMesh(self.theta, self.points * s, self.tangents, self.normals,
                            self.curvature / s, self.weights * s, self.speed * s)

    def rotated(self, angle: float) -> "BoundaryMesh":
        r = np.exp(1j * angle)
        return BoundaryMesh(self.theta, self.points * r, self.tangents * r, self.normals * r,
                            self.curvature, self.weights, self.speed)

    def rolled(self, shift: int) -> "BoundaryMesh":
        """Same curve with the node labelling started ``shift`` nodes later."""
        roll = lambda a: np.roll(a, -shift)
        return BoundaryMesh(self.theta, roll(self.points), roll(self.tangents), roll(self.normals),
                            roll(self.curvature), roll(self.weights), roll(self.speed))


def fourier_derivative(values: np.ndarray, order: int = 1) -> np.ndarray:
    """Spectral derivative of uniformly sampled 2*pi-periodic data (real or complex)."""
    n = values.shape[-1]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    out = np.fft.ifft((1j * k) ** order * np.fft.fft(values, axis=-1), axis=-1)
    if np.isrealobj(values):
        return out.real
    return out


def mesh_from_derivatives(t, z, dz, d2z, source=None, metadata=None) -> BoundaryMesh:
    """Build a mesh from samples of z(t), z'(t), z''(t) on a uniform grid."""
    t = np.asarray(t, dtype=float)
    n = t.size
    speed = np.abs(dz)
    if np.any(speed <= 0):
        raise GeometryError("parameterization has a stationary point (|z'(t)| = 0)")
    tangents = dz / speed
    normals = -1j * tangents
    curvature = np.imag(np.conj(dz) * d2z) / speed**3
    weights = speed * (2 * np.pi / n)
    mesh = BoundaryMesh(t, np.asarray(z, dtype=complex), tangents, normals, curvature,
                        weights, speed, source=source, metadata=dict(metadata or {}))
    if mesh.area <= 0:
        raise GeometryError("curve is clockwise (non-positive signed area)")
    return mesh


def uniform_grid(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


# --- curves -----------------------------------------------------------------


class Curve:
    """A closed 2*pi-periodic curve with analytic derivatives."""

    def derivatives(self, t: np.ndarray):
        raise NotImplementedError

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return self.derivatives(t)[0]

    def mesh(self, n: int, check: bool = True) -> BoundaryMesh:
        if n % 2:
            raise InputError(f"node count must be even, got {n}")
        t = uniform_grid(n)
        if check:
            check_simple_curve(self, n)
        z, dz, d2z = self.derivatives(t)
        return mesh_from_derivatives(t, z, dz, d2z, source=self, metadata=self.metadata())

    def metadata(self) -> dict:
        return {}


class FourierCurve(Curve):
    """z(t) = sum_k c_k exp(i k t) over a finite set of integer modes."""

    def __init__(self, modes, coeffs):
        self.modes = np.asarray(modes, dtype=int)
        self.coeffs = np.asarray(coeffs, dtype=complex)

    @classmethod
    def from_samples(cls, z: np.ndarray, max_mode: int | None = None) -> "FourierCurve":
        """Trigonometric interpolant of uniform samples, optionally low-pass filtered."""
        n = z.size
        c = np.fft.fft(z) / n
        k = np.rint(np.fft.fftfreq(n, d=1.0 / n)).astype(int)
        keep = np.abs(k) < n / 2
        if max_mode is not None:
            keep &= np.abs(k) <= max_mode
        return cls(k[keep], c[keep])

    def derivatives(self, t):
        t = np.asarray(t, dtype=float)
        n = t.size
        if t.ndim == 1 and n > 2 * np.max(np.abs(self.modes)) and np.allclose(t, uniform_grid(n), atol=1e-14):
            return self._on_grid(n)
        e = np.exp(1j * np.outer(t, self.modes))
        ik = 1j * self.modes
        return e @ self.coeffs, e @ (ik * self.coeffs), e @ (ik**2 * self.coeffs)

    def _on_grid(self, n: int):
        spec = np.zeros(n, dtype=complex)
        idx = self.modes % n
        out = []
        for p in range(3):
            spec[:] = 0
            np.add.at(spec, idx, (1j * self.modes) ** p * self.coeffs)
            out.append(np.fft.ifft(spec) * n)
        return tuple(out)

    def transformed(self, scale=1.0, angle=0.0, center=0j) -> "FourierCurve":
        c = self.coeffs * scale * np.exp(1j * angle)
        zero = np.flatnonzero(self.modes == 0)
        if zero.size:
            c[zero[0]] += center
            return FourierCurve(self.modes, c)
        return FourierCurve(np.append(self.modes, 0), np.append(c, center))

    def arclength_reparametrized(self, n: int, max_mode: int | None = None) -> "FourierCurve":
        """Resample so that the parameter is proportional to arclength."""
        fine = 8 * n
        tf = uniform_grid(fine)
        _, dz, _ = self.derivatives(tf)
        c = np.fft.fft(np.abs(dz)) / fine
        k = np.fft.fftfreq(fine, d=1.0 / fine)
        anti = np.zeros_like(c)
        ok = (k != 0) & (np.abs(k) < fine / 2)
        anti[ok] = c[ok] / (1j * k[ok])
        mean_speed = c[0].real
        length = 2 * np.pi * mean_speed
        s_fine = mean_speed * tf + (np.fft.ifft(anti) * fine).real - anti.sum().real
        # modes that matter for pointwise evaluation during the Newton polish
        sig = np.abs(anti) > 1e-17 * length
        ks, As = k[sig], anti[sig]

        def arclength(t):
            return mean_speed * t + (np.exp(1j * np.outer(t, ks)) @ As).real - anti.sum().real

        target = length * np.arange(n) / n
        tt = np.interp(target, np.append(s_fine, length), np.append(tf, 2 * np.pi))
        for _ in range(3):
            tt = tt - (arclength(tt) - target) / np.abs(self.derivatives(tt)[1])
        return FourierCurve.from_samples(self.evaluate(tt), max_mode=max_mode)


class _ShapeCurve(Curve):
    kind = ""
    defaults: dict = {}

    def __init__(self, **params):
        unknown = set(params) - set(self.defaults) - {"scale", "angle", "center"}
        if unknown:
            raise InputError(f"unknown {self.kind} parameter(s): {sorted(unknown)}")
        self.params = {**self.defaults, **params}
        self.scale = float(params.get("scale", 1.0))
        self.angle = float(params.get("angle", 0.0))
        c = params.get("center", 0.0)
        self.center = complex(*c) if isinstance(c, (list, tuple)) else complex(c)

    def derivatives(self, t):
        z, dz, d2z = self._raw(np.asarray(t, dtype=float))
        rot = self.scale * np.exp(1j * self.angle)
        return self.center + rot * z, rot * dz, rot * d2z

    def metadata(self):
        return {"kind": self.kind, "params": {k: self.params[k] for k in sorted(self.params)}}


class PerturbedCircle(_ShapeCurve):
    """r(t) = radius * (1 + amplitude cos(frequency t))."""

    kind = "perturbed_circle"
    defaults = {"radius": 1.0, "amplitude": 0.3, "frequency": 3}

    def _raw(self, t):
        R, eps, k = self.params["radius"], self.params["amplitude"], self.params["frequency"]
        r = R * (1 + eps * np.cos(k * t))
        dr = -R * eps * k * np.sin(k * t)
        d2r = -R * eps * k**2 * np.cos(k * t)
        return _polar(r, dr, d2r, t)


class Kite(_ShapeCurve):
    """(cos t + a cos 2t - a, b sin t); the usual inverse-scattering kite for a=0.65, b=1.5."""

    kind = "kite"
    defaults = {"a": 0.65, "b": 1.5}

    def _raw(self, t):
        a, b = self.params["a"], self.params["b"]
        z = np.cos(t) + a * np.cos(2 * t) - a + 1j * b * np.sin(t)
        dz = -np.sin(t) - 2 * a * np.sin(2 * t) + 1j * b * np.cos(t)
        d2z = -np.cos(t) - 4 * a * np.cos(2 * t) - 1j * b * np.sin(t)
        return z, dz, d2z


class Ellipse(_ShapeCurve):
    kind = "ellipse"
    defaults = {"a": 2.0, "b": 1.0}

    def _raw(self, t):
        a, b = self.params["a"], self.params["b"]
        if a <= 0 or b <= 0:
            raise GeometryError("ellipse semi-axes must be positive")
        z = a * np.cos(t) + 1j * b * np.sin(t)
        return z, -a * np.sin(t) + 1j * b * np.cos(t), -z


class Cap(_ShapeCurve):
    """Circular segment {|z| <= radius, Im z >= -cut} with rounded corners.

    The boundary is the radial function, about (0, (radius - cut)/2), of the
    p-norm soft minimum of the distances to the arc and to the chord, with
    p = ``sharpness``.  Larger sharpness gives tighter corners; the resulting
    rounding radius (1 / max curvature) is reported in the mesh metadata.
    """

    kind = "cap"
    defaults = {"radius": 1.0, "cut": 0.2, "sharpness": 12}

    def _raw(self, t):
        R, h, p = self.params["radius"], self.params["cut"], float(self.params["sharpness"])
        if not -R < h < R:
            raise GeometryError("cap cut must lie strictly inside the circle")
        cy = (R - h) / 2
        # distance from (0, cy) to the circle along direction t
        s, ds, d2s = cy * np.sin(t), cy * np.cos(t), -cy * np.sin(t)
        D = s**2 + R**2 - cy**2
        sq = np.sqrt(D)
        r1 = -s + sq
        dr1 = -ds + s * ds / sq
        d2r1 = -d2s + (ds**2 + s * d2s) / sq - (s * ds) ** 2 / sq**3
        # reciprocal distance to the chord, zero when looking away from it
        dist = cy + h
        neg = np.sin(t) < 0
        g = np.where(neg, -np.sin(t) / dist, 0.0)
        dg = np.where(neg, -np.cos(t) / dist, 0.0)
        d2g = np.where(neg, np.sin(t) / dist, 0.0)
        Q = r1**-p + g**p
        dQ = -p * r1 ** (-p - 1) * dr1 + p * g ** (p - 1) * dg
        d2Q = (p * (p + 1) * r1 ** (-p - 2) * dr1**2 - p * r1 ** (-p - 1) * d2r1
               + p * (p - 1) * g ** (p - 2) * dg**2 + p * g ** (p - 1) * d2g)
        r = Q ** (-1 / p)
        dr = -(1 / p) * Q ** (-1 / p - 1) * dQ
        d2r = (1 / p) * (1 / p + 1) * Q ** (-1 / p - 2) * dQ**2 - (1 / p) * Q ** (-1 / p - 1) * d2Q
        z, dz, d2z = _polar(r, dr, d2r, t)
        return z + 1j * cy, dz, d2z

    def mesh(self, n, check=True):
        mesh = super().mesh(n, check)
        mesh.metadata["rounding_radius"] = float(1 / np.max(np.abs(mesh.curvature)))
        return mesh


def _polar(r, dr, d2r, t):
    e = np.exp(1j * t)
    return r * e, (dr + 1j * r) * e, (d2r + 2j * dr - r) * e


SHAPE_KINDS = {cls.kind: cls for cls in (PerturbedCircle, Kite, Ellipse, Cap)}


def make_curve(kind: str, params: dict | None = None) -> Curve:
    try:
        cls = SHAPE_KINDS[kind]
    except KeyError:
        raise InputError(f"unknown shape kind {kind!r}; expected one of {sorted(SHAPE_KINDS)}")
    return cls(**(params or {}))


def mesh_from_parametric(kind: str, params: dict | None = None, n: int = 256) -> BoundaryMesh:
    return make_curve(kind, params).mesh(n)


# --- simple-curve check -----------------------------------------------------


def find_self_intersection(z: np.ndarray, chunk: int = 512):
    """First pair (i, j), i < j, of non-adjacent crossing segments of a closed polygon."""
    m = z.size
    a = z
    b = np.roll(z, -1)
    d = b - a
    idx = np.arange(m)
    for start in range(0, m, chunk):
        i = idx[start:start + chunk, None]
        j = idx[None, :]
        ai, di = a[i], d[i]
        aj, dj = a[j], d[j]
        cross = lambda u, v: u.real * v.imag - u.imag * v.real
        o1 = cross(di, aj - ai)
        o2 = cross(di, aj + dj - ai)
        o3 = cross(dj, ai - aj)
        o4 = cross(dj, ai + di - aj)
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        hit &= j > i + 1
        hit &= ~((i == 0) & (j == m - 1))
        rows, cols = np.nonzero(hit)
        if rows.size:
            return int(i[rows[0], 0]), int(cols[0])
    return None


def check_simple_curve(curve: Curve, n: int) -> None:
    """Raise GeometryError if the curve crosses itself on a 4n-point refinement."""
    m = 4 * n
    t = uniform_grid(m)
    z = curve.evaluate(t)
    pair = find_self_intersection(z)
    if pair is not None:
        ti, tj = t[pair[0]], t[pair[1]]
        raise GeometryError(
            f"curve self-intersects between parameters t={ti:.6f} and t={tj:.6f}",
            crossing=(float(ti), float(tj)),
        )
    signed = 0.5 * np.sum(np.imag(np.conj(z) * np.roll(z, -1)))
    if signed <= 0:
        raise GeometryError("curve is clockwise (non-positive signed area)")


def is_simple(curve: Curve, n: int) -> bool:
    try:
        check_simple_curve(curve, n)
    except GeometryError:
        return False
    return True
