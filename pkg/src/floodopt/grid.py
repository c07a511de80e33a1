"""Regular raster geometry shared by the solver, structures, and tracing code.

The grid is cell-centered with square cells, origin at the lower-left corner
and y increasing northward. Cells are indexed (i, j) = (column, row).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class OutsideDomainError(ValueError):
    """A queried point lies outside the raster extent."""


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a regular raster: cell counts, size and lower-left origin."""

    n_cols: int
    n_rows: int
    cell_size: float
    origin_x: float = 0.0
    origin_y: float = 0.0

    def __post_init__(self):
        if self.n_cols < 2 or self.n_rows < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.n_cols}x{self.n_rows}")
        if not self.cell_size > 0.0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")

    @property
    def x_max(self) -> float:
        return self.origin_x + self.n_cols * self.cell_size

    @property
    def y_max(self) -> float:
        return self.origin_y + self.n_rows * self.cell_size

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max) of the domain."""
        return (self.origin_x, self.origin_y, self.x_max, self.y_max)

    @property
    def cell_area(self) -> float:
        return self.cell_size * self.cell_size

    @property
    def diagonal(self) -> float:
        return math.hypot(self.n_cols * self.cell_size, self.n_rows * self.cell_size)

    def contains(self, x: float, y: float) -> bool:
        return (self.origin_x <= x <= self.x_max) and (self.origin_y <= y <= self.y_max)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrids (xc, yc) of cell-center coordinates, shape (n_rows, n_cols)."""
        xs = self.origin_x + (np.arange(self.n_cols) + 0.5) * self.cell_size
        ys = self.origin_y + (np.arange(self.n_rows) + 0.5) * self.cell_size
        return np.meshgrid(xs, ys)


def get_index(spec: GridSpec, x: float, y: float) -> tuple[int, int]:
    """Map a point to the (i, j) cell containing it.

    Points on interior cell edges belong to the higher-index cell; the
    domain's upper/right boundary belongs to the last cell. Raises
    OutsideDomainError for points beyond the extent.
    """
    if not spec.contains(x, y):
        raise OutsideDomainError(f"point ({x}, {y}) outside domain {spec.extent}")
    i = int((x - spec.origin_x) // spec.cell_size)
    j = int((y - spec.origin_y) // spec.cell_size)
    i = min(i, spec.n_cols - 1)
    j = min(j, spec.n_rows - 1)
    return i, j


def cell_center(spec: GridSpec, i: int, j: int) -> tuple[float, float]:
    """Center coordinates of cell (i, j). Round-trips with get_index."""
    if not (0 <= i < spec.n_cols and 0 <= j < spec.n_rows):
        raise IndexError(f"cell ({i}, {j}) outside {spec.n_cols}x{spec.n_rows} grid")
    return (
        spec.origin_x + (i + 0.5) * spec.cell_size,
        spec.origin_y + (j + 0.5) * spec.cell_size,
    )


@dataclass(frozen=True)
class ScalarField:
    """One float per cell, stored as a (n_rows, n_cols) array indexed [j, i]."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (self.spec.n_rows, self.spec.n_cols):
            raise ValueError(
                f"field shape {arr.shape} does not match grid "
                f"({self.spec.n_rows}, {self.spec.n_cols})"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls, spec: GridSpec) -> "ScalarField":
        return cls(spec, np.zeros((spec.n_rows, spec.n_cols)))

    @classmethod
    def full(cls, spec: GridSpec, value: float) -> "ScalarField":
        return cls(spec, np.full((spec.n_rows, spec.n_cols), float(value)))

    def at(self, x: float, y: float) -> float:
        """Value of the cell containing (x, y)."""
        i, j = get_index(self.spec, x, y)
        return float(self.values[j, i])

    def __add__(self, other: "ScalarField") -> "ScalarField":
        if other.spec != self.spec:
            raise ValueError("cannot add fields on different grids")
        return ScalarField(self.spec, self.values + other.values)
