"""henon-symmetry-lab: ground states of Hénon and Hardy weighted elliptic problems."""

import logging
from importlib.metadata import PackageNotFoundError, version

from henon_symmetry_lab.asymptotics import (
    SlopeFit,
    dominated_limit_check,
    fit_log_slope,
    geometric_alphas,
    henon_substitution,
    sweep_levels,
)
from henon_symmetry_lab.config import RunConfig, SolverOptions
from henon_symmetry_lab.exponents import (
    HyperbolaReport,
    ProblemSpec,
    classify_point,
    classify_scalar,
    critical_exponent,
    hyperbola_gap,
    ni_exponent,
    theoretical_slopes,
)
from henon_symmetry_lab.grids import (
    DiskFunction,
    DiskGrid,
    RadialFunction,
    RadialGrid,
    disk_dirichlet_energy,
    disk_laplacian,
    load_function,
    radial_laplacian,
    radial_lemma_check,
    save_function,
    weighted_integral,
)
from henon_symmetry_lab.scalar import (
    GroundState,
    ScanResult,
    boundary_bump,
    find_alpha_star,
    minimize_disk,
    minimize_radial,
    rayleigh_scalar,
    scan_alpha,
)
from henon_symmetry_lab.system import (
    SystemGroundState,
    SystemSpec,
    minimize_system_radial,
    pohozaev_residual,
    rayleigh_system,
    recover_v,
    system_symmetry_certificate,
)

logging.getLogger(__name__).addHandler(logging.NullHandler())

try:
    __version__ = version("henon-symmetry-lab")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.0.0"

__all__ = [
    "DiskFunction",
    "DiskGrid",
    "GroundState",
    "HyperbolaReport",
    "ProblemSpec",
    "RadialFunction",
    "RadialGrid",
    "RunConfig",
    "ScanResult",
    "SlopeFit",
    "SolverOptions",
    "SystemGroundState",
    "SystemSpec",
    "boundary_bump",
    "classify_point",
    "classify_scalar",
    "critical_exponent",
    "disk_dirichlet_energy",
    "disk_laplacian",
    "dominated_limit_check",
    "find_alpha_star",
    "fit_log_slope",
    "geometric_alphas",
    "henon_substitution",
    "hyperbola_gap",
    "load_function",
    "minimize_disk",
    "minimize_radial",
    "minimize_system_radial",
    "ni_exponent",
    "pohozaev_residual",
    "radial_laplacian",
    "radial_lemma_check",
    "rayleigh_scalar",
    "rayleigh_system",
    "recover_v",
    "save_function",
    "scan_alpha",
    "sweep_levels",
    "system_symmetry_certificate",
    "theoretical_slopes",
    "weighted_integral",
]
