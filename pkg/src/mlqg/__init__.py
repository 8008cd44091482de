"""Inviscid layered quasi-geostrophic flow on the unit disk.

Semi-Lagrangian transport of layer potential vorticity coupled to a
Helmholtz inversion with dynamically determined constant boundary values.
"""

__version__ = "0.1.0"

from .config import ConfigError, SimConfig, dump_config, parse_config
from .disk import (
    Field,
    Grid,
    VectorField,
    build_grid,
    gradient,
    integrate,
    laplacian,
    perp_gradient,
)
from .elliptic import (
    HelmholtzSolver,
    get_solver,
    solve_constant_boundary_zero_mean,
    solve_coupled,
    solve_dirichlet,
)
from .interp import DiskInterpolator, interpolate
from .layers import LayerStack, build_coupling_matrix, modal_decomposition
from .sim import (
    DiagnosticsRecord,
    PicardConvergenceError,
    SeparableTestFunction,
    SimulationAbort,
    State,
    Trajectory,
    default_test_function,
    diagnostics,
    initialize,
    picard_step,
    run,
    twin_divergence,
    weak_residual,
)
from .transport import CharacteristicTracer, advect_pv, trace_back

__all__ = [
    "__version__",
    "ConfigError",
    "SimConfig",
    "dump_config",
    "parse_config",
    "Field",
    "Grid",
    "VectorField",
    "build_grid",
    "gradient",
    "integrate",
    "laplacian",
    "perp_gradient",
    "HelmholtzSolver",
    "get_solver",
    "solve_constant_boundary_zero_mean",
    "solve_coupled",
    "solve_dirichlet",
    "DiskInterpolator",
    "interpolate",
    "LayerStack",
    "build_coupling_matrix",
    "modal_decomposition",
    "DiagnosticsRecord",
    "PicardConvergenceError",
    "SeparableTestFunction",
    "SimulationAbort",
    "State",
    "Trajectory",
    "default_test_function",
    "diagnostics",
    "initialize",
    "picard_step",
    "run",
    "twin_divergence",
    "weak_residual",
    "CharacteristicTracer",
    "advect_pv",
    "trace_back",
]
