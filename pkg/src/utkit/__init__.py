"""Numerical kit for hyperbolic disk geometry, harmonic Beltrami fields,
quasiconformal solvers, and Weil-Petersson curvature quantities."""

from .errors import (
    BoundaryPoint,
    CriticalPoint,
    DegenerateSection,
    DegreeTooLarge,
    DiagonalSingularity,
    DomainMismatch,
    FitFailure,
    IndexOutOfRange,
    IoFailure,
    NoConvergence,
    NonFiniteValue,
    NormTooLarge,
    QuadratureFailure,
    TruncationExceeded,
    UnknownSuite,
    UtkitError,
)
from .geometry import (
    INF,
    CayleyMap,
    DiskPoint,
    Domain,
    MoebiusMap,
    hyperbolic_density,
    kernel_value,
    point_pair_invariant,
    resolvent_kernel,
)
from .quadrature import (
    DiagonalPatch,
    GridFunction,
    QuadRule,
    apply_resolvent,
    integrate_disk,
    integrate_double,
    integrate_exterior,
    integrate_uhp,
)
from .series import (
    BeltramiField,
    FourierVectorField,
    HoloCoeffs,
    basis_mu,
    d0_beta,
    harmonic_inner,
    holo_quadratic_l2_quadrature,
    lambda_map,
    project_P,
    u_to_holo,
    u_to_quadratic,
)
from .qc_solver import (
    QCMap,
    WeldingData,
    bers_embedding,
    beurling_transform,
    cauchy_transform,
    schwarzian,
    solve_beltrami,
    welding_decompose,
)

__version__ = "0.1.0"

__all__ = [
    "welding_decompose",
    "solve_beltrami",
    "schwarzian",
    "cauchy_transform",
    "beurling_transform",
    "bers_embedding",
    "WeldingData",
    "QCMap",
    "BeltramiField",
    "FourierVectorField",
    "HoloCoeffs",
    "basis_mu",
    "d0_beta",
    "harmonic_inner",
    "holo_quadratic_l2_quadrature",
    "lambda_map",
    "project_P",
    "u_to_holo",
    "u_to_quadratic",
    "BoundaryPoint",
    "CayleyMap",
    "CriticalPoint",
    "DegenerateSection",
    "DegreeTooLarge",
    "DiagonalSingularity",
    "DiagonalPatch",
    "DiskPoint",
    "Domain",
    "DomainMismatch",
    "GridFunction",
    "FitFailure",
    "INF",
    "IndexOutOfRange",
    "IoFailure",
    "MoebiusMap",
    "NoConvergence",
    "QuadRule",
    "NonFiniteValue",
    "NormTooLarge",
    "QuadratureFailure",
    "TruncationExceeded",
    "UnknownSuite",
    "UtkitError",
    "apply_resolvent",
    "hyperbolic_density",
    "integrate_disk",
    "integrate_double",
    "integrate_exterior",
    "integrate_uhp",
    "kernel_value",
    "point_pair_invariant",
    "resolvent_kernel",
    "__version__",
]
