"""Flux-based volume penalization for Poisson problems with Neumann and Robin interface conditions."""
from .cases import CASES, VerificationCase, get_case
from .forcing import BoundaryData, ForcingConfig
from .geometry import Annulus, Egg, Polygon, RoundedPolygon, Sphere, Torus
from .grid import CartesianGrid, build_grid, cell_to_face
from .indicator import IndicatorConfig, chi_continuous, chi_discontinuous
from .operator import (DirichletInterface, DiscreteSystem, FluxInterface, PenalizedProblem, build_neumann_operator,
                       build_operator, build_robin_operator)
from .solver import SolveConfig, SolveReport, SolverError, fgmres, solve, subtract_fluid_mean
from .verify import (ConvergenceFit, StudyConfig, error_norms, fit_convergence, per_level_order,
                     run_convergence_study)

__version__ = "0.1.0"
