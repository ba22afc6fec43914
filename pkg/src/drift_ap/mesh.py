"""Structured Cartesian grid with a one-cell ghost ring and Dirichlet filling.

Fields live on an (nx+2, ny+2) lattice; interior cells are indexed
``[1:nx+1, 1:ny+1]`` and the outermost ring holds boundary data.  Cell
centers sit at ``x_i = x0 + (i - 1/2) dx`` for interior index i = 1..nx,
so ghost centers lie half a cell outside the domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNIT_SQUARE = ((0.0, 1.0), (0.0, 1.0))

# Ghost filling happens side by side in this fixed order, so corner ghosts
# take the value of the side filled last (south/north beat west/east).
FILL_ORDER = ("west", "east", "south", "north")


@dataclass(frozen=True)
class GridSpec:
    """Uniform Cartesian grid over an axis-aligned rectangle."""

    nx: int
    ny: int
    dx: float
    dy: float
    domain: tuple[tuple[float, float], tuple[float, float]] = UNIT_SQUARE

    @property
    def shape(self) -> tuple[int, int]:
        """Lattice shape including the ghost ring."""
        return (self.nx + 2, self.ny + 2)

    def cell_centers_x(self) -> np.ndarray:
        """Interior cell-center x coordinates, length nx."""
        x0 = self.domain[0][0]
        return x0 + (np.arange(1, self.nx + 1) - 0.5) * self.dx

    def cell_centers_y(self) -> np.ndarray:
        """Interior cell-center y coordinates, length ny."""
        y0 = self.domain[1][0]
        return y0 + (np.arange(1, self.ny + 1) - 0.5) * self.dy


def build_grid(nx: int, ny: int, domain=UNIT_SQUARE) -> GridSpec:
    """Build a uniform grid with nx-by-ny interior cells.

    Raises ValueError for fewer than 2 cells per direction or a
    degenerate domain rectangle.
    """
    if nx < 2 or ny < 2:
        raise ValueError(f"grid needs at least 2x2 cells, got {nx}x{ny}")
    (x0, x1), (y0, y1) = domain
    width = x1 - x0
    height = y1 - y0
    if width <= 0.0 or height <= 0.0:
        raise ValueError(f"degenerate domain {domain}")
    return GridSpec(nx=nx, ny=ny, dx=width / nx, dy=height / ny, domain=domain)


def alloc_field(grid: GridSpec, value: float = 0.0) -> np.ndarray:
    """Allocate a ghosted scalar field filled with a constant."""
    return np.full(grid.shape, value, dtype=np.float64)


@dataclass(frozen=True)
class SideValues:
    """Dirichlet data for one boundary side: density and the momentum triple."""

    n: float
    mx: float
    my: float
    mz: float

    def __post_init__(self):
        if self.n <= 0.0:
            raise ValueError(f"boundary density must be positive, got {self.n}")

    def get(self, field: str) -> float:
        return getattr(self, field)


@dataclass(frozen=True)
class BoundarySpec:
    """Per-side Dirichlet values for (n, n*ux, n*uy, n*uz)."""

    west: SideValues
    east: SideValues
    south: SideValues
    north: SideValues

    @classmethod
    def uniform(cls, n: float, mx: float, my: float, mz: float) -> "BoundarySpec":
        side = SideValues(n, mx, my, mz)
        return cls(west=side, east=side, south=side, north=side)

    def side(self, name: str) -> SideValues:
        return getattr(self, name)


def fill_ghost_ring(values: np.ndarray, west: float, east: float,
                    south: float, north: float) -> np.ndarray:
    """Overwrite the ghost ring of one field with per-side constants.

    Sides are written in FILL_ORDER, which pins the corner cells to the
    south/north values and makes results bit-reproducible.
    """
    values[0, :] = west
    values[-1, :] = east
    values[:, 0] = south
    values[:, -1] = north
    return values


def fill_ghosts(state, bc: BoundarySpec):
    """Fill the ghost ring of every field of a conserved state from bc.

    Interior cells are never touched; calling this twice is a no-op.
    Raises ValueError when the four field lattices disagree in shape.
    """
    shape = state.n.shape
    for name in ("n", "mx", "my", "mz"):
        arr = getattr(state, name)
        if arr.shape != shape:
            raise ValueError(
                f"field {name} has shape {arr.shape}, expected {shape}"
            )
        fill_ghost_ring(
            arr,
            bc.west.get(name),
            bc.east.get(name),
            bc.south.get(name),
            bc.north.get(name),
        )
    return state
