"""Wall parameterization and rasterization onto the terrain grid.

A wall is a rotated rectangle of fixed length, width and height placed by
its centroid (longitudinal x, latitudinal y) and an angle in [0, pi]
measured against the x axis. Walls modify the elevation field additively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, ScalarField


@dataclass(frozen=True)
class WallSpec:
    """Dimensions shared by every wall of a problem (meters)."""

    length: float
    width: float
    height: float

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0 and self.height > 0):
            raise ValueError("wall length, width and height must be positive")


@dataclass(frozen=True)
class WallParams:
    """One wall placement: centroid (center_x, center_y) and angle in radians."""

    center_x: float
    center_y: float
    angle: float

    def __post_init__(self):
        if not 0.0 <= self.angle <= math.pi:
            raise ValueError(f"wall angle must lie in [0, pi], got {self.angle}")


@dataclass(frozen=True)
class Configuration:
    """Ordered wall placements plus their shared dimensions.

    An empty wall list is the do-nothing configuration used as the
    optimizer's baseline.
    """

    walls: tuple[WallParams, ...]
    spec: WallSpec

    def __post_init__(self):
        object.__setattr__(self, "walls", tuple(self.walls))

    def __len__(self) -> int:
        return len(self.walls)

    @classmethod
    def empty(cls, spec: WallSpec) -> "Configuration":
        return cls((), spec)


def wall_footprint(wall: WallParams, spec: WallSpec, x, y):
    """Rotated-rectangle membership, boundary inclusive.

    Accepts scalars or arrays; returns booleans of the same shape.
    """
    dx = np.asarray(x, dtype=np.float64) - wall.center_x
    dy = np.asarray(y, dtype=np.float64) - wall.center_y
    cos_t = math.cos(wall.angle)
    sin_t = math.sin(wall.angle)
    along = dx * cos_t - dy * sin_t
    across = dx * sin_t + dy * cos_t
    inside = (np.abs(along) <= spec.length / 2.0) & (np.abs(across) <= spec.width / 2.0)
    if inside.ndim == 0:
        return bool(inside)
    return inside


def rasterize_configuration(config: Configuration, grid: GridSpec) -> ScalarField:
    """Additive height field: height times the number of covering footprints.

    A cell gets a wall's height iff its center lies in the footprint.
    Overlapping walls stack; portions outside the domain are clipped.
    """
    values = np.zeros((grid.n_rows, grid.n_cols))
    xc, yc = grid.cell_centers()
    half_diag = math.hypot(config.spec.length, config.spec.width) / 2.0
    for wall in config.walls:
        # only cells whose center can possibly be inside the rectangle
        i0 = max(0, int((wall.center_x - half_diag - grid.origin_x) / grid.cell_size) - 1)
        i1 = min(grid.n_cols, int((wall.center_x + half_diag - grid.origin_x) / grid.cell_size) + 2)
        j0 = max(0, int((wall.center_y - half_diag - grid.origin_y) / grid.cell_size) - 1)
        j1 = min(grid.n_rows, int((wall.center_y + half_diag - grid.origin_y) / grid.cell_size) + 2)
        if i0 >= i1 or j0 >= j1:
            continue
        mask = wall_footprint(wall, config.spec, xc[j0:j1, i0:i1], yc[j0:j1, i0:i1])
        values[j0:j1, i0:i1] += config.spec.height * mask
    return ScalarField(grid, values)


def wall_asset_volume(config: Configuration, assets, grid: GridSpec, masks=None) -> float:
    """Structure volume intruding into asset regions (m3), cell-center sampled.

    assets are polygons; masks may carry their precomputed cell masks (cells
    whose center lies inside each polygon) to avoid repeated point-in-polygon
    scans. Overlapping assets each count the intrusion, mirroring the
    per-asset sum in the penalty.
    """
    if not config.walls:
        return 0.0
    if masks is None:
        masks = [asset.cell_mask(grid) for asset in assets]
    field = rasterize_configuration(config, grid)
    total = 0.0
    for mask in masks:
        total += float(field.values[mask].sum())
    return total * grid.cell_area
