"""Built-in shapes and the shape-spec JSON format.

Shape spec JSON is either

    {"type": "conformal", "gamma": g, "coeffs": [[re, im], ...]}
    {"type": "parametric", "kind": "kite", "params": {...}, "n": 256}

or the name of a built-in shape.
"""

from __future__ import annotations

import numpy as np

from .conformal import ConformalMap
from .errors import InputError
from .mesh import SHAPE_KINDS, BoundaryMesh, Curve, make_curve

# Exterior maps of the default kite and perturbed circle, fitted numerically
# by scripts/fit_builtin_maps.py (kite truncated at order 32, Hausdorff
# distance ~3e-3 to the parametric kite; the perturbed-circle fit is a
# low-order approximation of order 11, distance ~4e-2).
KITE_MAP = ConformalMap(1.3535199908360989, np.array([
    -0.449301423964, -0.189775172439, 0.602434410472, -0.345262855986,
    0.24341825309, -0.190633495706, 0.159187803874, -0.138829086566,
    0.124938269189, -0.115147374159, 0.108126218549, -0.10307503656,
    0.099487290606, -0.09702893251, 0.095472657598, -0.094660091059,
    0.094479032824, -0.094849234873, 0.095713221987, -0.097030204413,
    0.098771947512, -0.100919915623, 0.103463266982, -0.106397430493,
    0.109723089031, -0.113445452769, 0.117573743639, -0.122120836705,
    0.127103020612, -0.132539850506, 0.138454074455, -0.144871619897,
    0.15182163041,
]))

PERTURBED_CIRCLE_MAP = ConformalMap(1.094905326724071, np.array([
    -0.0, -0.0, 0.29641919009, -0.0,
    -0.0, -0.094902064278, -0.0, -0.0,
    0.058154975942, -0.0, -0.0, -0.044124728362,
]))

BUILTIN = {
    "disk": {"type": "conformal", "gamma": 1.0, "coeffs": []},
    "ellipse": {"type": "parametric", "kind": "ellipse", "params": {"a": 2.0, "b": 1.0}},
    "kite": {"type": "parametric", "kind": "kite", "params": {}},
    "cap": {"type": "parametric", "kind": "cap", "params": {}},
    "perturbed_circle": {"type": "parametric", "kind": "perturbed_circle", "params": {}},
    "kite_map": KITE_MAP.to_json(),
    "perturbed_circle_map": PERTURBED_CIRCLE_MAP.to_json(),
}


class Shape:
    """A parsed shape spec: either a conformal map or a parametric curve."""

    def __init__(self, spec: dict):
        self.spec = spec
        self.map: ConformalMap | None = None
        kind = spec.get("type")
        if kind == "conformal":
            try:
                coeffs = [complex(re, im) for re, im in spec.get("coeffs", [])]
                self.map = ConformalMap(float(spec["gamma"]), np.array(coeffs, dtype=complex))
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"invalid conformal shape spec: {exc}") from exc
            self.curve: Curve = self.map.curve()
        elif kind == "parametric":
            if spec.get("kind") not in SHAPE_KINDS:
                raise InputError(f"unknown parametric kind {spec.get('kind')!r}")
            self.curve = make_curve(spec["kind"], spec.get("params") or {})
        else:
            raise InputError(f"shape spec type must be 'conformal' or 'parametric', got {kind!r}")
        self.n = spec.get("n")

    def mesh(self, n: int | None = None) -> BoundaryMesh:
        n = n or self.n or 256
        if self.map is not None:
            return self.map.mesh(n)
        return self.curve.mesh(n)


def load_shape(spec) -> Shape:
    """Accept a built-in name, a dict, or a ConformalMap."""
    if isinstance(spec, ConformalMap):
        return Shape(spec.to_json())
    if isinstance(spec, str):
        if spec not in BUILTIN:
            raise InputError(f"unknown built-in shape {spec!r}; available: {sorted(BUILTIN)}")
        return Shape(BUILTIN[spec])
    if not isinstance(spec, dict):
        raise InputError("shape spec must be a JSON object or a built-in name")
    return Shape(spec)
