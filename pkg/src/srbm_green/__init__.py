"""Green's function transforms of reflected Brownian motion in the quadrant."""
__version__ = "0.1.0"

from .bvp import (  # noqa: E402
    RationalFunction,
    TransformSolver,
    decoupling_condition,
    index_chi,
    psi1,
    psi1_decoupled,
    psi2,
    psi_interior,
    solver,
)
from .dim1 import Dim1Params, expected_local_time_1d, green_1d, psi_1d  # noqa: E402
from .errors import (  # noqa: E402
    ContractError,
    DomainError,
    ParameterError,
    PoleError,
    ProximityError,
    ReflectionError,
    ResolutionError,
    SRBMError,
    TruncationError,
)
from .model import ModelParams, Regime, classify, convergence_domain  # noqa: E402
from .montecarlo import McEstimate, SimConfig, estimate_psi, estimate_psi_boundary, simulate_1d  # noqa: E402

__all__ = [
    "ContractError",
    "Dim1Params",
    "DomainError",
    "McEstimate",
    "ModelParams",
    "ParameterError",
    "PoleError",
    "ProximityError",
    "RationalFunction",
    "ReflectionError",
    "Regime",
    "ResolutionError",
    "SRBMError",
    "SimConfig",
    "TransformSolver",
    "TruncationError",
    "classify",
    "convergence_domain",
    "decoupling_condition",
    "estimate_psi",
    "estimate_psi_boundary",
    "expected_local_time_1d",
    "green_1d",
    "index_chi",
    "psi1",
    "psi1_decoupled",
    "psi2",
    "psi_1d",
    "psi_interior",
    "simulate_1d",
    "solver",
]
