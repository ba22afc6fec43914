"""Fast self-checks: fixed point, conservation, solver residuals, AP limit.

These back the `check` CLI subcommand and run in a few seconds on small
grids.  The conservation check recomputes the boundary mass fluxes from
the raw formula (not through the riemann module), so a corrupted flux
implementation cannot certify itself.
"""

from __future__ import annotations

import numpy as np

from . import riemann
from .mesh import BoundarySpec, build_grid, fill_ghosts
from .model import (CaseSpec, ConservedState, case_params, drift_limit_state,
                    init_case)
from .riemann import SpeedMode
from .solvers import (PerpSystem, TridiagonalSystem, solve_perp_2x2,
                      solve_tridiagonal)
from .stepper import step_ap, step_conventional, step_drift_limit

EPS_MACH = np.finfo(np.float64).eps


def conservation_residual(old_state: ConservedState,
                          new_state: ConservedState, grid, params, dt: float,
                          mode: SpeedMode, bc: BoundarySpec,
                          implicit_momenta: bool = True) -> float:
    """Relative gap between interior mass change and boundary mass flux.

    Boundary fluxes are evaluated inline: centered momenta (new-time for
    the semi-implicit schemes, old-time for the explicit one) minus the
    speed-scaled old-density jump.  Exact flux-form updates make this
    vanish to rounding.
    """
    fill_ghosts(old_state, bc)
    ax, ay = riemann.face_speeds(old_state, grid, mode, params)
    m_src = new_state if implicit_momenta else old_state
    n_old = old_state.n

    def x_flux(i_face):
        mx = m_src.mx
        return (0.5 * (mx[i_face, 1:-1] + mx[i_face + 1, 1:-1])
                - 0.5 * ax[i_face] * (n_old[i_face + 1, 1:-1]
                                      - n_old[i_face, 1:-1]))

    def y_flux(j_face):
        my = m_src.my
        return (0.5 * (my[1:-1, j_face] + my[1:-1, j_face + 1])
                - 0.5 * ay[:, j_face] * (n_old[1:-1, j_face + 1]
                                         - n_old[1:-1, j_face]))

    f_west = x_flux(0)
    f_east = x_flux(grid.nx)
    f_south = y_flux(0)
    f_north = y_flux(grid.ny)

    cell_area = grid.dx * grid.dy
    mass_change = float(
        np.sum(new_state.interior("n") - old_state.interior("n")) * cell_area)
    boundary_net = dt * (grid.dy * float(np.sum(f_east) - np.sum(f_west))
                         + grid.dx * float(np.sum(f_north) - np.sum(f_south)))
    flux_scale = dt * (grid.dy * float(np.sum(np.abs(f_east))
                                       + np.sum(np.abs(f_west)))
                       + grid.dx * float(np.sum(np.abs(f_north))
                                         + np.sum(np.abs(f_south))))
    scale = max(abs(mass_change), flux_scale, 1e-300)
    return abs(mass_change + boundary_net) / scale


def check_fixed_point() -> tuple[bool, str]:
    """The uniform drift state must be invariant under every stepper."""
    grid = build_grid(24, 24)
    refs = drift_limit_state()
    bc = BoundarySpec.uniform(*refs)
    dt = 1e-2
    worst = 0.0
    for eps in (1.0, 1e-6, 0.0):
        state = ConservedState(*(np.full(grid.shape, v) for v in refs))
        params = case_params(eps)
        for _ in range(10):
            if eps == 0.0:
                state, _ = step_drift_limit(state, grid, params, dt, bc)
            else:
                state, _ = step_ap(state, grid, params, dt,
                                   SpeedMode.NONRESOLVED, bc)
        drift = max(float(np.max(np.abs(state.interior(f) - v)))
                    for f, v in zip(ConservedState.FIELDS, refs))
        worst = max(worst, drift)
    return worst <= 1e-12, f"max drift {worst:.3e} (tol 1e-12)"


def check_conservation() -> tuple[bool, str]:
    """One step of every scheme balances mass against boundary fluxes."""
    grid = build_grid(16, 16)
    worst = 0.0
    cases = (
        ("ap-nonresolved", step_ap, 1e-2, SpeedMode.NONRESOLVED, True),
        ("ap-resolved", step_ap, 1e-2, SpeedMode.RESOLVED, True),
        ("conventional", step_conventional, 1.0, SpeedMode.RESOLVED, False),
        ("drift-limit", None, 0.0, SpeedMode.NONRESOLVED, True),
    )
    for name, stepfn, eps, mode, implicit in cases:
        params = case_params(eps)
        state, bc = init_case(CaseSpec.prepared(max(eps, 1e-2)), grid)
        dt = 1e-3
        old = state.copy()
        if stepfn is None:
            new, _ = step_drift_limit(old, grid, params, dt, bc)
        else:
            new, _ = stepfn(old, grid, params, dt, mode, bc)
        residual = conservation_residual(old, new, grid, params, dt, mode,
                                         bc, implicit_momenta=implicit)
        worst = max(worst, residual)
    return worst <= 1e-12, f"max residual {worst:.3e} (tol 1e-12)"


def check_solver_residuals() -> tuple[bool, str]:
    """Tridiagonal and 2x2 solves hit their backward-residual bounds."""
    rng = np.random.default_rng(2024)
    worst_tri = 0.0
    for _ in range(40):
        size = int(rng.integers(2, 50))
        lower = rng.uniform(-1.0, 1.0, size)
        upper = rng.uniform(-1.0, 1.0, size)
        lower[0] = 0.0
        upper[-1] = 0.0
        diag = np.abs(lower) + np.abs(upper) + rng.uniform(0.5, 2.0, size)
        rhs = rng.uniform(-10.0, 10.0, size)
        x = solve_tridiagonal(TridiagonalSystem(lower, diag, upper, rhs))
        lhs = diag * x
        lhs[1:] += lower[1:] * x[:-1]
        lhs[:-1] += upper[:-1] * x[1:]
        norm_a = float(np.max(np.abs(lower) + np.abs(diag) + np.abs(upper)))
        bound = 1e-12 * (norm_a * float(np.max(np.abs(x)))
                         + float(np.max(np.abs(rhs))))
        worst_tri = max(worst_tri, float(np.max(np.abs(lhs - rhs))) / bound)

    worst_perp = 0.0
    for kappa in (0.0, 1.0, 1e3, 1e6, 1e12):
        rhs1 = rng.uniform(-100.0, 100.0, 32)
        rhs2 = rng.uniform(-100.0, 100.0, 32)
        mx, mz = solve_perp_2x2(PerpSystem(kappa, rhs1, rhs2))
        r1 = np.abs(mx - kappa * mz - rhs1)
        r2 = np.abs(kappa * mx + mz - rhs2)
        scale1 = np.abs(mx) + kappa * np.abs(mz) + np.abs(rhs1)
        scale2 = kappa * np.abs(mx) + np.abs(mz) + np.abs(rhs2)
        worst_perp = max(worst_perp,
                         float(np.max(r1 / (4.0 * EPS_MACH * scale1 + 1e-300))),
                         float(np.max(r2 / (4.0 * EPS_MACH * scale2 + 1e-300))))
    ok = worst_tri <= 1.0 and worst_perp <= 1.0
    return ok, (f"tridiagonal residual at {worst_tri:.2f} of bound, "
                f"2x2 at {worst_perp:.2f} of 4-ulp bound")


def check_ap_limit() -> tuple[bool, str]:
    """One semi-implicit step at tiny epsilon matches the limit scheme."""
    grid = build_grid(24, 24)
    state, bc = init_case(CaseSpec.prepared(1e-12), grid)
    dt = 1e-2
    ap_state, _ = step_ap(state.copy(), grid, case_params(1e-12), dt,
                          SpeedMode.NONRESOLVED, bc)
    dl_state, _ = step_drift_limit(state.copy(), grid, case_params(0.0), dt,
                                   bc)
    gap = max(float(np.max(np.abs(getattr(ap_state, f) - getattr(dl_state, f))))
              for f in ConservedState.FIELDS)
    return gap <= 1e-8, f"one-step gap {gap:.3e} (tol 1e-8)"


ALL_CHECKS = (
    ("fixed-point", check_fixed_point),
    ("conservation", check_conservation),
    ("solver-residuals", check_solver_residuals),
    ("ap-limit-consistency", check_ap_limit),
)


def run_all_checks():
    """Run every check; yields (name, passed, detail)."""
    return [(name, *fn()) for name, fn in ALL_CHECKS]
