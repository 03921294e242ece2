"""Solitary waves of the Klein-Gordon-Maxwell system by constrained minimization."""

__version__ = "0.1.0"

from .radial import RadialField, RadialGrid, integrate_volume, norm, radial_laplacian  # noqa: E402
from .nonlinearity import (  # noqa: E402
    AssumptionReport, NonlinearityModel, check_assumptions, eval_W, frequency_window,
)
from .gauge import GaugeSolve, phi_bounds_check, phi_scaling_check, phi_smallq_check, solve_phi  # noqa: E402
from .functionals import (  # noqa: E402
    derrick_pohozaev, eval_A, eval_energy_static, eval_functionals, eval_J, eval_Lambda,
    grad_J, grad_Lambda,
)
from .minimizer import (  # noqa: E402
    NoBoundStateError, SolitaryWaveSolution, SolverConfig, minimize, minimize_unconstrained,
    multiplier_estimate, retract_to_constraint, verify_solution,
)
from .shooting import solve_shooting  # noqa: E402

__all__ = [
    "RadialField", "RadialGrid", "integrate_volume", "norm", "radial_laplacian",
    "AssumptionReport", "NonlinearityModel", "check_assumptions", "eval_W", "frequency_window",
    "GaugeSolve", "phi_bounds_check", "phi_scaling_check", "phi_smallq_check", "solve_phi",
    "derrick_pohozaev", "eval_A", "eval_energy_static", "eval_functionals", "eval_J",
    "eval_Lambda", "grad_J", "grad_Lambda", "NoBoundStateError", "SolitaryWaveSolution",
    "SolverConfig", "minimize", "minimize_unconstrained", "multiplier_estimate",
    "retract_to_constraint", "verify_solution", "solve_shooting",
]
