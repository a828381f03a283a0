"""Low-discrepancy point sets: generators, exact discrepancies and projected ADAM descent."""

__version__ = "0.1.0"

from .core import (
    DiscrepancyError,
    DiscrepancyKind,
    KindUnsupported,
    OutOfUnitCube,
    ParseError,
    PointSet,
    RaggedInput,
    load_point_set,
    make_point_set,
    save_point_set,
)
from .generators import (
    SobolParams,
    fibonacci_integration_lattice,
    fibonacci_set,
    kronecker_lattice,
    random_set,
    sobol_set,
)
from .l2 import (
    L2Value,
    SmoothingParams,
    l2_extreme_sq,
    l2_grad,
    l2_loss_smoothed,
    l2_periodic_sq,
    l2_squared,
    l2_star_sq,
)
from .linf import BudgetExceeded, linf_star, linf_star_2d, linf_star_exact
from .optimizer import AdamConfig, NonFiniteGradient, OptimizeReport, Track, optimize, random_restart
from .quadrature import quadrature_oracle

__all__ = [
    "AdamConfig",
    "BudgetExceeded",
    "DiscrepancyError",
    "DiscrepancyKind",
    "KindUnsupported",
    "L2Value",
    "NonFiniteGradient",
    "OptimizeReport",
    "OutOfUnitCube",
    "ParseError",
    "PointSet",
    "RaggedInput",
    "SmoothingParams",
    "SobolParams",
    "Track",
    "fibonacci_integration_lattice",
    "fibonacci_set",
    "kronecker_lattice",
    "l2_extreme_sq",
    "l2_grad",
    "l2_loss_smoothed",
    "l2_periodic_sq",
    "l2_squared",
    "l2_star_sq",
    "linf_star",
    "linf_star_2d",
    "linf_star_exact",
    "load_point_set",
    "make_point_set",
    "optimize",
    "quadrature_oracle",
    "random_restart",
    "random_set",
    "save_point_set",
    "sobol_set",
]
