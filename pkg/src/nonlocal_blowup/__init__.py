"""Finite-difference laboratory for a semilinear parabolic equation with a nonlocal reaction and a nonlocal flux boundary condition."""

from .config import config_hash, load_config, parse_config, serialize
from .errors import (
    ConfigError,
    IntegrityError,
    KernelEvaluationError,
    NonlocalBlowupError,
    PreconditionError,
    QuadratureError,
    ValidationError,
)
from .grid import Grid, boundary_quadrature, laplacian, make_grid, volume_quadrature
from .integrate import BLOWUP, GLOBAL, INCONCLUSIVE, RunResult, SolverConfig, detect_blowup, solve
from .problem import (
    BumpInitial,
    ConstantInitial,
    ConstantKernel,
    Interval,
    ProblemSpec,
    Rectangle,
    SeparableKernel,
    TabulatedInitial,
    TabulatedKernel,
    ZeroKernel,
)
from .regularize import EpsilonSchedule, epsilon_problem, maximal_solution
from .rhs import RhsContext, balance_rate, rhs_eval
from .theory import (
    Regime,
    build_supersolution,
    check_supersub,
    classify_regime,
    mass_thresholds,
    ode_blowup_time,
)

__version__ = "0.1.0"
