"""Shape recovery from generalized polarization tensors via Faber polynomials."""

__version__ = "0.1.0"

from .conformal import ConformalMap, FaberBasis, GrunskyMatrix, faber_coefficients, grunsky_matrix
from .errors import (CompatibilityError, DataInconsistencyError, FaberPTError, GeometryError,
                     InputError)
from .gpt import GptTable, FptMatrices, compute_fpt_grunsky, compute_fpt_quadrature, compute_gpt_table
from .inversion import equivalent_ellipse, exact_recover, reference_shape
from .layerpot import Contrast, solve_exterior
from .mesh import BoundaryMesh, make_curve
from .optim import ReconOptions, cost, reconstruct, shape_gradient
from .shapes import load_shape

__all__ = [
    "BoundaryMesh", "CompatibilityError", "ConformalMap", "Contrast", "DataInconsistencyError",
    "FaberBasis", "FaberPTError", "FptMatrices", "GeometryError", "GptTable", "GrunskyMatrix",
    "InputError", "ReconOptions", "compute_fpt_grunsky", "compute_fpt_quadrature", "compute_gpt_table", "cost",
    "equivalent_ellipse", "exact_recover", "faber_coefficients", "grunsky_matrix", "load_shape",
    "make_curve", "reconstruct", "reference_shape", "shape_gradient", "solve_exterior",
]
