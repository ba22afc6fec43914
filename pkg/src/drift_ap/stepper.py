"""One-step advancement for the semi-implicit, explicit, and limit schemes.

Three steppers share the flux machinery:

* step_ap -- mass flux, parallel pressure gradient and Lorentz force
  implicit; convection and perpendicular pressure explicit.  Stable for
  time steps independent of epsilon and degenerates cleanly to the
  drift-limit update at epsilon = 0.
* step_conventional -- everything explicit except the Lorentz rotation.
  Requires epsilon > 0 (the parallel update divides by it) and blows up
  once dt outruns the gyro-period.
* step_drift_limit -- the epsilon = 0 specialization of step_ap.

A step never mutates its input state; it returns a fresh state with
ghosts refilled, plus a StepReport.  Update order inside a step is fixed
(perpendicular, then parallel, then density) because the parallel system
needs the new x-momentum and the mass fluxes need all new momenta.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import riemann
from .mesh import BoundarySpec, GridSpec, fill_ghost_ring, fill_ghosts
from .model import ConservedState, PhysParams
from .riemann import SpeedMode
from .solvers import (PerpSystem, parallel_coefficients, parallel_rhs,
                      solve_perp_2x2, thomas_solve)


class SchemeKind(enum.Enum):
    AP = "ap"
    CONVENTIONAL = "conventional"
    DRIFT_LIMIT = "drift-limit"


class DivergenceError(RuntimeError):
    """A step produced nonpositive density or non-finite values.

    Carries the offending field name and (i, j) interior cell so the run
    harness can report where the scheme lost stability.
    """

    def __init__(self, reason: str, field_name: str | None = None,
                 cell: tuple[int, int] | None = None):
        self.reason = reason
        self.field_name = field_name
        self.cell = cell
        where = f" in field {field_name}" if field_name else ""
        at = f" at cell {cell}" if cell is not None else ""
        super().__init__(f"{reason}{where}{at}")


@dataclass
class StepReport:
    """Diagnostics of one accepted step."""

    dt: float
    max_update: dict = field(default_factory=dict)
    positivity_ok: bool = True
    finite_ok: bool = True


def explicit_divergences(state: ConservedState, grid: GridSpec,
                         params: PhysParams, mode: SpeedMode):
    """Prescaled momentum-flux divergences (div_x, div_y, div_z) at level m.

    Ghosts must hold current boundary data.  Uniform states give exactly
    zero; at epsilon = 0 only the centered pressure gradient survives.
    """
    ax, ay = riemann.face_speeds(state, grid, mode, params)
    return riemann.momentum_divergences(state, grid, params, ax, ay)


class FaceData(NamedTuple):
    """Shared explicit face data of one step: cell cache plus speeds."""

    cache: riemann.CellCache
    ax: np.ndarray
    ay: np.ndarray


def prepare_faces(state: ConservedState, grid: GridSpec, params: PhysParams,
                  mode: SpeedMode, bc: BoundarySpec) -> FaceData:
    """Fill ghosts and evaluate the face data a step (and its CFL) needs.

    The run loop computes this once per step, derives dt from the speeds,
    and hands the same data to the stepper.
    """
    fill_ghosts(state, bc)
    cache = riemann.cell_cache(state, params)
    ax, ay = riemann.face_speeds(state, grid, mode, params, cache)
    return FaceData(cache, ax, ay)


def _ghosted(interior: np.ndarray, grid: GridSpec, west: float, east: float,
             south: float, north: float) -> np.ndarray:
    """New ghosted field from interior values plus per-side Dirichlet data."""
    out = np.empty(grid.shape, dtype=np.float64)
    out[1:-1, 1:-1] = interior
    return fill_ghost_ring(out, west, east, south, north)


def _ghosted_component(interior, grid, bc: BoundarySpec, name: str):
    return _ghosted(interior, grid, bc.west.get(name), bc.east.get(name),
                    bc.south.get(name), bc.north.get(name))


def _first_bad_cell(mask: np.ndarray) -> tuple[int, int]:
    i, j = np.argwhere(mask)[0]
    return (int(i) + 1, int(j) + 1)  # interior -> lattice indices


def _check_interior(name: str, values: np.ndarray, positive: bool = False):
    bad = ~np.isfinite(values)
    if bad.any():
        raise DivergenceError("non-finite value", name, _first_bad_cell(bad))
    if positive:
        bad = values <= 0.0
        if bad.any():
            raise DivergenceError("nonpositive density", name,
                                  _first_bad_cell(bad))


def _report(dt: float, state: ConservedState,
            new_fields: dict) -> StepReport:
    max_update = {
        name: float(np.max(np.abs(new_fields[name] - state.interior(name))))
        for name in ConservedState.FIELDS
    }
    return StepReport(dt=dt, max_update=max_update)


def _mass_fluxes(mx_field, my_field, n_old, ax, ay):
    """Mass fluxes on x- and y-faces from new-time momentum fields."""
    fx = riemann.mass_flux(mx_field[:-1, 1:-1], mx_field[1:, 1:-1], ax,
                           n_old[:-1, 1:-1], n_old[1:, 1:-1])
    fy = riemann.mass_flux(my_field[1:-1, :-1], my_field[1:-1, 1:], ay,
                           n_old[1:-1, :-1], n_old[1:-1, 1:])
    return fx, fy


def _density_update(n_in, fx, fy, grid, dt):
    return n_in - dt * ((fx[1:, :] - fx[:-1, :]) / grid.dx
                        + (fy[:, 1:] - fy[:, :-1]) / grid.dy)


def step_ap(state: ConservedState, grid: GridSpec, params: PhysParams,
            dt: float, mode: SpeedMode, bc: BoundarySpec,
            faces: FaceData | None = None) -> tuple[ConservedState, StepReport]:
    """Advance one step with the semi-implicit scheme.

    Order: explicit flux divergences at level m; per-cell 2x2 solve for
    the perpendicular momenta; tridiagonal column solves for the parallel
    momentum (its right-hand side uses the new x-momentum through the
    mixed derivative); implicit-momentum mass fluxes update the density.
    Valid for any epsilon >= 0.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if faces is None:
        faces = prepare_faces(state, grid, params, mode, bc)
    eps = params.epsilon
    b_mag = params.b_y
    ex, ey, ez = params.e_field
    eps_dt = eps / dt

    cache, ax, ay = faces
    div_x, div_y, div_z = riemann.momentum_divergences(state, grid, params,
                                                       ax, ay, cache)
    n_in = state.interior("n")
    mx_in = state.interior("mx")
    my_in = state.interior("my")
    mz_in = state.interior("mz")

    # Perpendicular block: explicit pressure rides inside div_x.
    rhs1 = -(eps_dt * mz_in - div_z + n_in * ez) / b_mag
    rhs2 = -(-eps_dt * mx_in + div_x - n_in * ex) / b_mag
    mx_new, mz_new = solve_perp_2x2(
        PerpSystem(kappa=eps / (b_mag * dt), rhs1=rhs1, rhs2=rhs2))

    # Parallel block: one tridiagonal solve per column, batched.
    mx_field = _ghosted_component(mx_new, grid, bc, "mx")
    lower, diag, upper = parallel_coefficients(grid, params, dt)
    rhs = parallel_rhs(state, mx_field, div_y, grid, params, dt, bc)
    my_new = thomas_solve(lower, diag, upper, rhs.T).T

    # Density: implicit momenta, explicit density jumps.
    my_field = _ghosted_component(my_new, grid, bc, "my")
    fx, fy = _mass_fluxes(mx_field, my_field, state.n, ax, ay)
    n_new = _density_update(n_in, fx, fy, grid, dt)

    new_fields = {"n": n_new, "mx": mx_new, "my": my_new, "mz": mz_new}
    _check_interior("n", n_new, positive=True)
    for name in ("mx", "my", "mz"):
        _check_interior(name, new_fields[name])

    report = _report(dt, state, new_fields)
    new_state = ConservedState(
        n=_ghosted_component(n_new, grid, bc, "n"),
        mx=mx_field,
        my=my_field,
        mz=_ghosted_component(mz_new, grid, bc, "mz"),
    )
    return new_state, report


def step_conventional(state: ConservedState, grid: GridSpec,
                      params: PhysParams, dt: float, mode: SpeedMode,
                      bc: BoundarySpec, faces: FaceData | None = None,
                      ) -> tuple[ConservedState, StepReport]:
    """Advance one step with the fully explicit scheme (implicit Lorentz).

    The mass flux and every pressure term are explicit; only the
    cyclotron rotation stays implicit (an explicit rotation is
    unconditionally unstable).  The momentum right-hand sides see the
    freshly updated density.  The parallel update divides the flux
    divergence by epsilon, so epsilon = 0 is rejected.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    eps = params.epsilon
    if eps == 0.0:
        raise ZeroDivisionError(
            "the explicit scheme divides by epsilon; use the drift-limit "
            "stepper for epsilon = 0")
    if faces is None:
        faces = prepare_faces(state, grid, params, mode, bc)
    b_mag = params.b_y
    ex, ey, ez = params.e_field
    eps_dt = eps / dt

    cache, ax, ay = faces
    div_x, div_y, div_z = riemann.momentum_divergences(state, grid, params,
                                                       ax, ay, cache)
    n_in = state.interior("n")
    mx_in = state.interior("mx")
    my_in = state.interior("my")
    mz_in = state.interior("mz")

    # Explicit mass update from level-m momenta.
    fx, fy = _mass_fluxes(state.mx, state.my, state.n, ax, ay)
    n_new = _density_update(n_in, fx, fy, grid, dt)
    _check_interior("n", n_new, positive=True)

    # Implicit Lorentz rotation; note the new-time density on the source.
    rhs1 = -(eps_dt * mz_in - div_z + n_new * ez) / b_mag
    rhs2 = -(-eps_dt * mx_in + div_x - n_new * ex) / b_mag
    mx_new, mz_new = solve_perp_2x2(
        PerpSystem(kappa=eps / (b_mag * dt), rhs1=rhs1, rhs2=rhs2))

    # Parallel momentum is fully explicit: the non-AP division by epsilon.
    my_new = my_in + (dt / eps) * (n_new * ey - div_y)

    new_fields = {"n": n_new, "mx": mx_new, "my": my_new, "mz": mz_new}
    for name in ("mx", "my", "mz"):
        _check_interior(name, new_fields[name])

    report = _report(dt, state, new_fields)
    new_state = ConservedState(
        n=_ghosted_component(n_new, grid, bc, "n"),
        mx=_ghosted_component(mx_new, grid, bc, "mx"),
        my=_ghosted_component(my_new, grid, bc, "my"),
        mz=_ghosted_component(mz_new, grid, bc, "mz"),
    )
    return new_state, report


def step_drift_limit(state: ConservedState, grid: GridSpec,
                     params: PhysParams, dt: float,
                     bc: BoundarySpec) -> tuple[ConservedState, StepReport]:
    """Advance one step of the drift-limit scheme.

    Identical code path to step_ap with epsilon = 0: the 2x2 system
    decouples to the algebraic drift velocities, the parallel matrix
    loses its inertia shift, and the momentum fluxes reduce to pressure
    averages.  Speeds are necessarily NONRESOLVED (no finite sound
    speed exists).
    """
    return step_ap(state, grid, params.with_epsilon(0.0), dt,
                   SpeedMode.NONRESOLVED, bc)
