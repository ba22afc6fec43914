"""Interface states, P0 numerical fluxes, and CFL time-step selection.

All routines broadcast over numpy arrays, so a whole row of faces is
evaluated in one call; scalars work the same way in tests.

Flux convention: the momentum fluxes returned here are pre-scaled by
epsilon.  The physical x-momentum flux (n ux^2 + (T/eps) n) enters the
update multiplied by epsilon, so we evaluate the product

    G = eps * avg(n ux^2) + T * avg(n) - (eps * a / 2) * jump(n ux)

directly.  The scaled form stays finite (and exactly representable) at
epsilon = 0, where it degenerates to the pressure average -- which is
precisely the flux the drift-limit scheme needs.  No division by epsilon
ever happens on this path.

The face loops in momentum_divergences and face_speeds evaluate each
per-cell quantity once on the ghosted lattice and slice it for the left
and right sides, which reproduces the per-face formulas of
interface_speed and momentum_flux_* bit for bit while halving the work.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import PhysParams, sound_speed


class SpeedMode(enum.Enum):
    """Whether interface speeds carry the sound speed sqrt(T/eps).

    RESOLVED speeds make the CFL time step track the gyro-period;
    NONRESOLVED speeds drop the acoustic part, so the time step is
    epsilon-independent.
    """

    RESOLVED = "resolved"
    NONRESOLVED = "nonresolved"


@dataclass
class TimeControls:
    """Courant number plus the running time-step state of a simulation."""

    cfl: float
    dt: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")


@dataclass
class InterfaceState:
    """Density-weighted average state at a cell face."""

    n_hat: np.ndarray
    u_hat: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def momentum(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Momentum reconstructed as n_hat * u_hat."""
        return tuple(self.n_hat * u for u in self.u_hat)


def roe_average(n_l, u_l, n_r, u_r) -> InterfaceState:
    """Square-root-weighted interface state.

    n_hat = sqrt(n_l n_r) and each velocity component is averaged with
    weights sqrt(n_l), sqrt(n_r), so u_hat lies between u_l and u_r.
    """
    n_l = np.asarray(n_l, dtype=np.float64)
    n_r = np.asarray(n_r, dtype=np.float64)
    if np.any(n_l <= 0.0) or np.any(n_r <= 0.0):
        raise ValueError("interface average needs positive densities")
    wl = np.sqrt(n_l)
    wr = np.sqrt(n_r)
    inv = 1.0 / (wl + wr)
    u_hat = tuple((wl * ul + wr * ur) * inv for ul, ur in zip(u_l, u_r))
    return InterfaceState(n_hat=np.sqrt(n_l * n_r), u_hat=u_hat)


def _speed_core(wl, un_l, wr, un_r, c):
    """Speed formula from precomputed sqrt-density weights."""
    un_hat = (wl * un_l + wr * un_r) / (wl + wr)
    a_minus = np.minimum(un_l - c, un_hat - c)
    a_plus = np.maximum(un_hat + c, un_r + c)
    return np.maximum(np.abs(a_minus), np.abs(a_plus))


def _mode_speed(mode: SpeedMode, params: PhysParams) -> float:
    return sound_speed(params) if mode is SpeedMode.RESOLVED else 0.0


def interface_speed(n_l, un_l, n_r, un_r, mode: SpeedMode,
                    params: PhysParams):
    """Viscosity/CFL speed at a face from the normal velocity components.

    a = max(|min(un_l - c, un_hat - c)|, |max(un_hat + c, un_r + c)|)
    with un_hat the weighted interface velocity, c the sound speed in
    RESOLVED mode and c = 0 in NONRESOLVED mode.  For y-faces pass uy as
    the normal component.
    """
    c = _mode_speed(mode, params)
    return _speed_core(np.sqrt(np.asarray(n_l, dtype=np.float64)), un_l,
                       np.sqrt(np.asarray(n_r, dtype=np.float64)), un_r, c)


def _p0_flux(avg_l, avg_r, jump_l, jump_r, half_visc):
    """Arithmetic mean of cell flux values minus a speed-scaled jump."""
    return 0.5 * (avg_l + avg_r) - half_visc * (jump_r - jump_l)


def momentum_flux_x(left, right, a, params: PhysParams):
    """Epsilon-prescaled x-face fluxes of the three momentum components.

    left/right are (n, (ux, uy, uz)) cell states.  Returns (Gxx, Gxy,
    Gxz); the pressure T*n rides on the normal component Gxx.
    """
    n_l, (uxl, uyl, uzl) = left
    n_r, (uxr, uyr, uzr) = right
    eps = params.epsilon
    temp = params.temperature
    half_visc = 0.5 * eps * a
    gxx = _p0_flux(eps * n_l * uxl * uxl + temp * n_l,
                   eps * n_r * uxr * uxr + temp * n_r,
                   n_l * uxl, n_r * uxr, half_visc)
    gxy = _p0_flux(eps * n_l * uxl * uyl, eps * n_r * uxr * uyr,
                   n_l * uyl, n_r * uyr, half_visc)
    gxz = _p0_flux(eps * n_l * uxl * uzl, eps * n_r * uxr * uzr,
                   n_l * uzl, n_r * uzr, half_visc)
    return gxx, gxy, gxz


def momentum_flux_y(left, right, a, params: PhysParams):
    """Same as momentum_flux_x for y-faces: uy is the normal velocity,
    so the pressure term moves to the Gyy component."""
    n_l, (uxl, uyl, uzl) = left
    n_r, (uxr, uyr, uzr) = right
    eps = params.epsilon
    temp = params.temperature
    half_visc = 0.5 * eps * a
    gyx = _p0_flux(eps * n_l * uyl * uxl, eps * n_r * uyr * uxr,
                   n_l * uxl, n_r * uxr, half_visc)
    gyy = _p0_flux(eps * n_l * uyl * uyl + temp * n_l,
                   eps * n_r * uyr * uyr + temp * n_r,
                   n_l * uyl, n_r * uyr, half_visc)
    gyz = _p0_flux(eps * n_l * uyl * uzl, eps * n_r * uyr * uzr,
                   n_l * uzl, n_r * uzr, half_visc)
    return gyx, gyy, gyz


def mass_flux(m_l_new, m_r_new, a, n_l_old, n_r_old):
    """Mass flux: centered new-time normal momenta, old-time density jump.

    The momenta come from the implicit solve (or the previous level in
    the fully explicit scheme); the stabilizing jump always acts on the
    explicit density.  Note there is no epsilon here.
    """
    return 0.5 * (m_l_new + m_r_new) - 0.5 * a * (n_r_old - n_l_old)


class CellCache(NamedTuple):
    """Per-cell quantities reused by every face touching the cell.

    The j* arrays are the momenta as n*u products and the q* arrays the
    directional flux ingredients (q<normal><component>), all on the full
    ghosted lattice.
    """

    sqrt_n: np.ndarray
    ux: np.ndarray
    uy: np.ndarray
    uz: np.ndarray
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    qxx: np.ndarray
    qxy: np.ndarray
    qxz: np.ndarray
    qyx: np.ndarray
    qyy: np.ndarray
    qyz: np.ndarray


def cell_cache(state, params: PhysParams) -> CellCache:
    """Evaluate the per-cell speed and flux ingredients once."""
    n = state.n
    ux, uy, uz = state.velocities()
    eps = params.epsilon
    temp = params.temperature
    return CellCache(
        sqrt_n=np.sqrt(n),
        ux=ux, uy=uy, uz=uz,
        jx=n * ux, jy=n * uy, jz=n * uz,
        qxx=eps * n * ux * ux + temp * n,
        qxy=eps * n * ux * uy,
        qxz=eps * n * ux * uz,
        qyx=eps * n * uy * ux,
        qyy=eps * n * uy * uy + temp * n,
        qyz=eps * n * uy * uz,
    )


def face_speeds(state, grid, mode: SpeedMode, params: PhysParams,
                cache: CellCache | None = None):
    """Interface speeds on all x-faces and y-faces touching interior cells.

    Ghost cells supply the outer state at boundary faces.  Shapes:
    ax is (nx+1, ny), ay is (nx, ny+1).
    """
    if cache is None:
        cache = cell_cache(state, params)
    c = _mode_speed(mode, params)
    w = cache.sqrt_n
    ax = _speed_core(w[:-1, 1:-1], cache.ux[:-1, 1:-1],
                     w[1:, 1:-1], cache.ux[1:, 1:-1], c)
    ay = _speed_core(w[1:-1, :-1], cache.uy[1:-1, :-1],
                     w[1:-1, 1:], cache.uy[1:-1, 1:], c)
    return ax, ay


def momentum_divergences(state, grid, params: PhysParams, ax, ay,
                         cache: CellCache | None = None):
    """Cell-wise divergence of the prescaled momentum fluxes, interior shape.

    ax/ay are the face speeds from face_speeds.  Each component q gets
    (Gx_q[i+1/2] - Gx_q[i-1/2])/dx + (Gy_q[j+1/2] - Gy_q[j-1/2])/dy, with
    boundary faces fed by ghost (Dirichlet) data.
    """
    if cache is None:
        cache = cell_cache(state, params)
    eps = params.epsilon
    hx = 0.5 * eps * ax
    hy = 0.5 * eps * ay

    def xface(q):
        return q[:-1, 1:-1], q[1:, 1:-1]

    def yface(q):
        return q[1:-1, :-1], q[1:-1, 1:]

    gxx = _p0_flux(*xface(cache.qxx), *xface(cache.jx), hx)
    gxy = _p0_flux(*xface(cache.qxy), *xface(cache.jy), hx)
    gxz = _p0_flux(*xface(cache.qxz), *xface(cache.jz), hx)
    gyx = _p0_flux(*yface(cache.qyx), *yface(cache.jx), hy)
    gyy = _p0_flux(*yface(cache.qyy), *yface(cache.jy), hy)
    gyz = _p0_flux(*yface(cache.qyz), *yface(cache.jz), hy)

    dx = grid.dx
    dy = grid.dy
    div_x = (gxx[1:, :] - gxx[:-1, :]) / dx + (gyx[:, 1:] - gyx[:, :-1]) / dy
    div_y = (gxy[1:, :] - gxy[:-1, :]) / dx + (gyy[:, 1:] - gyy[:, :-1]) / dy
    div_z = (gxz[1:, :] - gxz[:-1, :]) / dx + (gyz[:, 1:] - gyz[:, :-1]) / dy
    return div_x, div_y, div_z


def dt_from_speeds(ax, ay, grid, cfl: float,
                   dt_max: float | None = None) -> float:
    """CFL time step from precomputed face speeds (see compute_dt)."""
    if not (0.0 < cfl <= 1.0):
        raise ValueError(f"cfl must lie in (0, 1], got {cfl}")
    denom = ax.max() / grid.dx + ay.max() / grid.dy
    if denom == 0.0:
        if dt_max is not None:
            return dt_max
        raise ValueError("all interface speeds vanish; no CFL time step")
    return float(cfl / denom)


def compute_dt(state, grid, mode: SpeedMode, params: PhysParams,
               cfl: float, dt_max: float | None = None) -> float:
    """CFL time step: dt * (max_x a / dx + max_y a / dy) = cfl.

    For a rest state every speed vanishes; then dt_max is returned if
    configured, otherwise a ValueError is raised.
    """
    ax, ay = face_speeds(state, grid, mode, params)
    return dt_from_speeds(ax, ay, grid, cfl, dt_max)
