"""Positivity-preserving RBF partition-of-unity interpolation."""

from .baselines import global_constrained_fit, shepard_eval
from .estimators import GlobalConstrainedInterpolator, PCPUInterpolator, ShepardInterpolator
from .exceptions import (
    ConfigurationError,
    CoverageError,
    DivergenceError,
    IngestionError,
    NumericalFailure,
    PatchInfeasible,
    PCPUError,
)
from .geometry import Domain, build_patches
from .kernels import Family, KernelSpec, eval_rbf
from .metrics import error_report, eval_grid, random_nodes, test_function
from .pu import Mode, PUConfig, PUModel, default_kernel, evaluate, fit

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "CoverageError",
    "DivergenceError",
    "Domain",
    "Family",
    "GlobalConstrainedInterpolator",
    "IngestionError",
    "KernelSpec",
    "Mode",
    "NumericalFailure",
    "PCPUError",
    "PCPUInterpolator",
    "PUConfig",
    "PUModel",
    "PatchInfeasible",
    "ShepardInterpolator",
    "build_patches",
    "default_kernel",
    "error_report",
    "eval_grid",
    "eval_rbf",
    "evaluate",
    "fit",
    "global_constrained_fit",
    "random_nodes",
    "shepard_eval",
    "test_function",
]
