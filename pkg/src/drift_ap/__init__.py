"""Finite-volume solver for magnetized isothermal ion flow in 2D.

Implements the scaled Euler-Lorentz equations on a Cartesian grid with
three time integrators (semi-implicit AP, fully explicit conventional,
and the epsilon = 0 drift-limit scheme) plus a reproducibility harness
for the accuracy, time-step, and cost experiments.
"""

from .mesh import BoundarySpec, GridSpec, SideValues, build_grid, fill_ghosts
from .model import (CaseKind, CaseSpec, ConservedState, PhysParams,
                    case_boundary, case_params, drift_limit_state, init_case,
                    sound_speed)
from .riemann import (InterfaceState, SpeedMode, TimeControls, compute_dt,
                      interface_speed, mass_flux, momentum_flux_x,
                      momentum_flux_y, roe_average)
from .solvers import (PerpSystem, SingularSystemError, TridiagonalSystem,
                      assemble_parallel_column, mixed_derivative,
                      solve_perp_2x2, solve_tridiagonal)
from .stepper import (DivergenceError, FaceData, SchemeKind, StepReport,
                      explicit_divergences, prepare_faces, step_ap,
                      step_conventional, step_drift_limit)
from .harness import (DiffMetrics, RunConfig, RunReport, Table,
                      diff_from_limit, pairwise_max_rel_diff,
                      reproduce_tables, run, validate_config)

__version__ = "0.1.0"
