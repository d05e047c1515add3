"""Exact computer algebra for bi-Hamiltonian hierarchies.

Derives the Lagrangian representation of a bi-Hamiltonian pair whose first
structure is first-order constant-coefficient in flat coordinates and whose
second structure is third-order homogeneous, and certifies the result by
direct operator expansion.  Ships a fully verified three-component WDVV
fixture.
"""

from .algebra import MPoly, RatFn, mpoly_gcd
from .jets import (
    DiffPoly,
    euler,
    evolutionary_derivative,
    formal_x_integral,
    is_total_divergence,
    sigma_grade,
    total_x,
    volterra_homotopy,
)
from .operators import DiffOp, OperatorMatrix, is_homogeneous, leading_and_lower
from .pipeline import (
    BiHamiltonianSystem,
    PipelineConfig,
    certify,
    derive,
    recursion_step,
    symplectic_operator,
)
from .transform import PointTransform, change_coordinates
from .variational import (
    compatibility_evidence,
    frechet,
    helmholtz_symmetric,
    jacobi_evidence,
    lie_derivative,
    presentation_check,
    skew_adjoint_check,
)

__version__ = "0.1.0"

__all__ = [
    "BiHamiltonianSystem",
    "DiffOp",
    "DiffPoly",
    "MPoly",
    "OperatorMatrix",
    "PipelineConfig",
    "PointTransform",
    "RatFn",
    "certify",
    "change_coordinates",
    "compatibility_evidence",
    "derive",
    "euler",
    "evolutionary_derivative",
    "formal_x_integral",
    "frechet",
    "helmholtz_symmetric",
    "is_homogeneous",
    "is_total_divergence",
    "jacobi_evidence",
    "leading_and_lower",
    "lie_derivative",
    "mpoly_gcd",
    "presentation_check",
    "recursion_step",
    "sigma_grade",
    "skew_adjoint_check",
    "symplectic_operator",
    "total_x",
    "volterra_homotopy",
]
