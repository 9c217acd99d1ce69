"""Shape recovery from polarization-tensor data.

``exact_recover`` is exact for a perfect conductor or insulator
(lambda = +-1/2); ``reference_shape`` applies the same formula to
non-extreme data as an initial guess, and ``equivalent_ellipse`` is the
classical first-order initializer.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .conformal import ConformalMap, faber_coefficients
from .errors import DataInconsistencyError, GeometryError, InputError
from .gpt import FptMatrices, GptTable
from .layerpot import as_contrast
from .mesh import check_simple_curve


@dataclass(frozen=True, eq=False)
class EquivalentEllipse:
    a: float
    b: float
    theta: float
    center: complex
    p: float
    q: float
    eigenvalues: tuple
    eigenvectors: np.ndarray

    def to_map(self) -> ConformalMap:
        gamma = (self.a + self.b) / 2
        a1 = (self.a**2 - self.b**2) / 4 * np.exp(2j * self.theta)
        return ConformalMap(gamma, np.array([self.center, a1]))

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "theta": self.theta,
                "center": [self.center.real, self.center.imag], "p": self.p, "q": self.q,
                "eigenvalues": list(self.eigenvalues)}


@dataclass(eq=False)
class RecoveredMap:
    map: ConformalMap
    lam_sign: int
    tail: list = field(default_factory=list)  # |a_m| for orders beyond the requested N
    simple: bool | None = None
    crossing: tuple | None = None
    contrast_mismatch: float = 0.0
    fallback: EquivalentEllipse | None = None

    @property
    def valid(self) -> bool:
        return bool(self.simple)

    def diagnostics(self) -> dict:
        return {"lambda_sign": self.lam_sign, "tail_magnitudes": self.tail,
                "simple_curve": self.simple, "crossing": self.crossing,
                "contrast_mismatch": self.contrast_mismatch,
                "fallback": self.fallback.to_json() if self.fallback else None}


def _lambda_sign(lam: float) -> int:
    return 1 if lam > 0 else -1


def _check_curve(rec: RecoveredMap, n: int = 256) -> RecoveredMap:
    try:
        check_simple_curve(rec.map.curve(), n)
        rec.simple, rec.crossing = True, None
    except GeometryError as exc:
        rec.simple, rec.crossing = False, exc.crossing
    return rec


def _recover_coefficients(N1_col: np.ndarray, n2_11: complex, n2_21: complex, sign: int, N: int):
    g2 = sign * n2_11.real / (4 * np.pi)
    if not g2 > 0:
        raise DataInconsistencyError(
            f"{'+' if sign > 0 else '-'}N2_11 = {sign * n2_11.real:.6g} must be positive "
            "(wrong lambda sign or corrupt data)")
    a = np.zeros(N + 1, dtype=complex)
    a[0] = np.conj(n2_21) / (2 * n2_11.real)
    for m in range(1, N + 1):
        # F_m only involves a_0..a_{m-1}
        row = faber_coefficients(ConformalMap(1.0, a[:m]), m).table[m, 1 : m + 1]
        a[m] = row @ N1_col[:m] / (4 * np.pi * m)
    return float(np.sqrt(g2)), a


def exact_recover(gpts: GptTable, N: int, sign: int | None = None) -> RecoveredMap:
    """Conformal radius and Laurent coefficients a_0..a_N from contracted tensors.

    gamma = sqrt(+-N2_11 / 4pi), a_0 = conj(N2_21) / (2 N2_11), and for m >= 1
    a_m = sum_{n=1}^m a_mn N1_n1 / (4 pi m), regenerating the Faber table
    after each new coefficient.
    """
    if N < 1:
        raise InputError("recovery order must be >= 1")
    if gpts.order < max(N, 2):
        raise InputError(f"table order {gpts.order} < required {max(N, 2)}")
    sign = _lambda_sign(gpts.lam) if sign is None else sign
    K = gpts.order
    gamma, a = _recover_coefficients(gpts.N1[:, 0], gpts.N2[0, 0], gpts.N2[1, 0], sign, K)
    tail = [float(abs(x)) for x in a[N + 1 :]]
    rec = RecoveredMap(ConformalMap(gamma, a[: N + 1]), sign, tail)
    return _check_curve(rec)


def exact_recover_from_fpt(fpts: FptMatrices, a0: complex = 0j, sign: int | None = None) -> RecoveredMap:
    """gamma = sqrt(+-F2_11 / 4pi), a_m = F1_m1 / (4 pi m); a_0 is not encoded in FPTs."""
    sign = _lambda_sign(fpts.lam) if sign is None else sign
    g2 = sign * fpts.F2[0, 0].real / (4 * np.pi)
    if not g2 > 0:
        raise DataInconsistencyError("+-F2_11 must be positive")
    m = np.arange(1, fpts.order + 1)
    a = np.concatenate([[a0], fpts.F1[:, 0] / (4 * np.pi * m)])
    return _check_curve(RecoveredMap(ConformalMap(np.sqrt(g2), a), sign))


def equivalent_ellipse(M: np.ndarray, sigma0: float, n2_11: complex | None = None,
                       n2_21: complex | None = None) -> EquivalentEllipse:
    """Ellipse with the given first-order polarization tensor.

    The center is estimated as conj(N2_21) / (2 N2_11), a heuristic that is
    exact only for lambda = +-1/2.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2) or not np.any(M):
        raise InputError("first-order tensor must be a nonzero 2x2 matrix")
    M = (M + M.T) / 2
    vals, vecs = np.linalg.eigh(M)
    l1, l2 = float(vals[1]), float(vals[0])
    e1 = vecs[:, 1]
    s = float(as_contrast(sigma0).sigma0)
    if np.isinf(s):
        inv_p = 1 / l1 + 1 / l2
        q = l2 / l1
    else:
        inv_p = (s - 1) / (s + 1) * (1 / l1 + 1 / l2)
        # the ratio b/a of the semi-axes; with l1 > l2 this is (l1 - s l2)/(l2 - s l1)
        q = (l1 - s * l2) / (l2 - s * l1)
    p = 1 / inv_p if inv_p != 0 else np.inf
    if not (p > 0 and np.isfinite(p)) or not q > 0:
        raise DataInconsistencyError(
            f"inconsistent first-order tensor: eigenvalues ({l1:.6g}, {l2:.6g}) give p={p:.6g}, q={q:.6g}")
    if q > 1:
        q = 1 / q
    a = np.sqrt(p / (np.pi * q))
    b = np.sqrt(p * q / np.pi)
    if abs(l1 - l2) < 1e-12 * abs(l1):
        theta = 0.0
    else:
        theta = float(np.arctan2(e1[1], e1[0]))
        if theta <= -np.pi / 2:
            theta += np.pi
        elif theta > np.pi / 2:
            theta -= np.pi
    center = 0j
    if n2_11 is not None and n2_21 is not None and n2_11 != 0:
        center = complex(np.conj(n2_21) / (2 * np.real(n2_11)))
    return EquivalentEllipse(float(a), float(b), theta, center, float(p), float(q),
                             (l1, l2), vecs[:, ::-1].copy())


def equivalent_ellipse_from_table(gpts: GptTable, sigma0) -> EquivalentEllipse:
    n2_21 = gpts.N2[1, 0] if gpts.order >= 2 else None
    return equivalent_ellipse(gpts.first_order(), sigma0, gpts.N2[0, 0], n2_21)


def reference_shape(gpts: GptTable, sigma0, N: int) -> RecoveredMap:
    """Apply the extreme-conductivity formula to data at a finite contrast.

    Uses lambda = +1/2 for sigma0 > 1 and -1/2 for sigma0 < 1.  A
    self-intersecting result is returned flagged, with the equivalent ellipse
    attached as fallback.
    """
    c = as_contrast(sigma0)
    sign = 1 if c.lam > 0 else -1
    rec = exact_recover(gpts, N, sign=sign)
    rec.contrast_mismatch = float(abs(c.lam - sign * 0.5))
    if not rec.simple:
        rec.fallback = equivalent_ellipse_from_table(gpts, c.sigma0)
    return rec


def add_noise(gpts: GptTable, level: float, seed: int | None = None) -> GptTable:
    """Independent uniform multiplicative error, |error| <= level, per tensor entry."""
    if not 0 <= level < 1:
        raise InputError(f"noise level must lie in [0, 1), got {level}")
    rng = np.random.default_rng(seed)
    f1 = 1 + level * rng.uniform(-1, 1, gpts.N1.shape)
    f2 = 1 + level * rng.uniform(-1, 1, gpts.N2.shape)
    keys = sorted(gpts.M)
    fm = 1 + level * rng.uniform(-1, 1, len(keys))
    M = {k: gpts.M[k] * f for k, f in zip(keys, fm)}
    meta = {**gpts.metadata, "noise": {"level": level, "seed": seed}}
    return replace(gpts, N1=gpts.N1 * f1, N2=gpts.N2 * f2, M=M, metadata=meta)
