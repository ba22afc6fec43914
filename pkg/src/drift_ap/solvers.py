"""Implicit solves: per-cell 2x2 rotation systems and parallel tridiagonals.

The implicit coupling splits into two independent pieces per time step:

* perpendicular momentum: a 2x2 system [[1, -k], [k, 1]] per cell, with
  k = eps/(B dt).  Its determinant 1 + k^2 never degenerates, so the
  closed-form inverse is used.
* parallel momentum: a second-difference operator along y only, so the
  global matrix splits into one independent tridiagonal system per
  x-column.  Each system is solved by the Thomas algorithm with a
  pivot-magnitude guard; all columns share the same coefficients, which
  lets a single forward elimination serve every column at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import riemann
from .mesh import BoundarySpec, GridSpec
from .model import PhysParams

PIVOT_FLOOR = 1e-30


class SingularSystemError(ArithmeticError):
    """A pivot magnitude fell below PIVOT_FLOOR during elimination."""


@dataclass
class PerpSystem:
    """One batch of perpendicular 2x2 systems sharing the coupling kappa."""

    kappa: float
    rhs1: np.ndarray
    rhs2: np.ndarray


def solve_perp_2x2(sys: PerpSystem) -> tuple[np.ndarray, np.ndarray]:
    """Solve [[1, -k], [k, 1]] (mx, mz)^T = (rhs1, rhs2)^T in closed form.

    mx = (rhs1 + k rhs2) / (1 + k^2),  mz = (rhs2 - k rhs1) / (1 + k^2).
    k = 0 decouples the system, which is the drift-limit branch.
    """
    k = sys.kappa
    det = 1.0 + k * k
    mx = (sys.rhs1 + k * sys.rhs2) / det
    mz = (sys.rhs2 - k * sys.rhs1) / det
    return mx, mz


def mixed_derivative(mx: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Centered d/dy(d/dx) of a ghosted field, on interior cells.

    Half-index form: (1/dy) [D(j+1/2) - D(j-1/2)] with D(j+1/2) the mean
    of the centered x-derivatives in rows j and j+1.  This collapses to
    the four-corner stencil /(4 dx dy), which differentiates bilinear
    data exactly.  Ghost values (Dirichlet data) feed the edge cells.
    """
    dxm = (mx[2:, :] - mx[:-2, :]) / (2.0 * grid.dx)
    return (dxm[:, 2:] - dxm[:, :-2]) / (2.0 * grid.dy)


@dataclass
class TridiagonalSystem:
    """One x-column of the parallel-momentum system.

    Row j reads lower[j] x[j-1] + diag[j] x[j] + upper[j] x[j+1] = rhs[j];
    lower[0] and upper[-1] are zero by construction (Dirichlet closure
    already moved the ghost couplings into rhs).
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray


def thomas_solve(lower, diag, upper, rhs):
    """Thomas elimination for shared tridiagonal coefficients.

    lower/diag/upper are 1-D (length n); rhs is (n,) or (n, m) for m
    right-hand sides solved simultaneously.  Per-column arithmetic is
    identical in both layouts, so batched and one-at-a-time solves agree
    bit for bit.  Raises SingularSystemError when a pivot underflows.
    """
    n = diag.shape[0]
    work = np.array(rhs, dtype=np.float64, copy=True)
    # Native floats keep the sequential recurrence cheap; the rhs sweeps
    # stay vectorized across the batched columns.
    lo = [float(v) for v in lower]
    up = [float(v) for v in upper]
    den = [float(v) for v in diag]
    if abs(den[0]) < PIVOT_FLOOR:
        raise SingularSystemError("zero pivot in row 0")
    for j in range(1, n):
        w = lo[j] / den[j - 1]
        den[j] = den[j] - w * up[j - 1]
        if abs(den[j]) < PIVOT_FLOOR:
            raise SingularSystemError(f"zero pivot in row {j}")
        work[j] -= w * work[j - 1]
    out = np.empty_like(work)
    out[n - 1] = work[n - 1] / den[n - 1]
    for j in range(n - 2, -1, -1):
        out[j] = (work[j] - up[j] * out[j + 1]) / den[j]
    return out


def solve_tridiagonal(sys: TridiagonalSystem) -> np.ndarray:
    """Solve one column system; residual stays at machine-precision scale."""
    return thomas_solve(sys.lower, sys.diag, sys.upper, sys.rhs)


def parallel_coefficients(grid: GridSpec, params: PhysParams,
                          dt: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(lower, diag, upper) of the parallel operator, shared by all columns.

    diag = eps/dt + 2 T dt / dy^2 and off-diagonals -T dt / dy^2: the
    implicit y-diffusion of the parallel momentum shifted by the inertia
    term.  At eps = 0 only the elliptic part survives; the Dirichlet
    closure keeps the matrix invertible (strict dominance in the edge
    rows).  The matrix is symmetric positive definite for eps >= 0.
    """
    ny = grid.ny
    alpha = params.temperature * dt / grid.dy**2
    diag = np.full(ny, params.epsilon / dt + 2.0 * alpha)
    lower = np.full(ny, -alpha)
    upper = np.full(ny, -alpha)
    lower[0] = 0.0
    upper[-1] = 0.0
    return lower, diag, upper


def parallel_rhs(state, mx_new: np.ndarray, div_y: np.ndarray,
                 grid: GridSpec, params: PhysParams, dt: float,
                 bc: BoundarySpec) -> np.ndarray:
    """Right-hand sides of all column systems, shape (nx, ny).

    rhs = T dt * d/dy(d/dx mx_new) + (eps/dt) my_old - div_y + n_old Ey,
    where div_y is the epsilon-prescaled flux divergence of the parallel
    momentum (its pressure part carries the explicit -T dy(n) term, so no
    separate gradient is added here).  The Dirichlet values of my enter
    the first and last row through the eliminated ghost couplings.
    """
    eps_dt = params.epsilon / dt
    alpha = params.temperature * dt / grid.dy**2
    ey = params.e_field[1]
    rhs = (params.temperature * dt * mixed_derivative(mx_new, grid)
           + eps_dt * state.interior("my")
           - div_y
           + state.interior("n") * ey)
    rhs[:, 0] += alpha * bc.south.my
    rhs[:, -1] += alpha * bc.north.my
    return rhs


def assemble_parallel_column(i: int, state, mx_new: np.ndarray,
                             grid: GridSpec, params: PhysParams, dt: float,
                             mode: riemann.SpeedMode,
                             bc: BoundarySpec) -> TridiagonalSystem:
    """Assemble the system for interior column i (0-based, 0 <= i < nx).

    Recomputes the explicit flux divergence from the state; the time
    stepper assembles all columns at once through parallel_rhs with a
    divergence it already has, and both paths produce identical numbers.
    """
    ax, ay = riemann.face_speeds(state, grid, mode, params)
    _, div_y, _ = riemann.momentum_divergences(state, grid, params, ax, ay)
    lower, diag, upper = parallel_coefficients(grid, params, dt)
    rhs = parallel_rhs(state, mx_new, div_y, grid, params, dt, bc)
    return TridiagonalSystem(lower, diag, upper, rhs[i].copy())
