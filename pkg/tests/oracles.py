"""Reference values computed independently of the package and frozen here.

Each constant records how it was obtained; ``test_oracles.py`` recomputes the
cheap ones with scipy so the provenance stays checkable.
"""

import numpy as np

# scipy.integrate.quad of (1/2pi) ln|(2,0) - y| cos(t) over the unit circle
SINGLE_LAYER_COS_AT_2 = -0.25

# 4 a E(1 - b^2/a^2) with scipy.special.ellipe, a=2, b=1
ELLIPSE_2_1_PERIMETER = 9.688448220547675

# scipy.integrate.quad of the speed and of the Green area form, kite a=0.65, b=1.5
KITE_PERIMETER = 9.324022673284958
KITE_AREA = 1.5 * np.pi

# (1/2pi) int ln|x - y| ds(y) on the circle of radius 2 at a boundary point: r ln r
SINGLE_LAYER_ONE_R2 = 2 * np.log(2.0)


def lam_of(sigma0):
    return 0.5 if np.isinf(sigma0) else (sigma0 + 1) / (2 * (sigma0 - 1))


def disk_n2(r, lam, k=1):
    """N2_kk of a centered disk; all N1 and off-diagonal N2 vanish."""
    return 2 * np.pi * k * r ** (2 * k) / lam


def disk_exterior(z, sigma0, r=1.0):
    """u for H = x1 outside a centered disk of radius r."""
    kappa = 1.0 if np.isinf(sigma0) else (sigma0 - 1) / (sigma0 + 1)
    return z.real - kappa * r**2 * z.real / np.abs(z) ** 2


def point_source_exterior(z, p, sigma0, r=1.0):
    """u for H = ln|x - p| / 2pi (|p| > r) outside a centered disk, by the Kelvin image."""
    kappa = (sigma0 - 1) / (sigma0 + 1)
    H = np.log(np.abs(z - p)) / (2 * np.pi)
    image = (np.log(np.abs(r**2 / np.conj(z) - p)) - np.log(abs(p))) / (2 * np.pi)
    return H - kappa * image
