"""Reverse-time pathline tracing through recorded flow snapshots.

Pathlines are integrated backward from asset boundary points, starting at
the moment each point first becomes wet, to discover where flood water came
from. The collected point clouds (pathtubes) feed the alpha-shape
restriction of the wall search space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import get_index
from .swe import SimulationRecord

WET_DEPTH_DEFAULT = 1e-3  # one millimeter


@dataclass(frozen=True)
class PathlineConfig:
    """Tracing thresholds.

    l_max and alpha default per grid when left unset: l_max to four domain
    diagonals, alpha to five cell sizes (the same alpha used for alpha
    shapes, acting here as the segment-jump guard).
    """

    epsilon_h: float = WET_DEPTH_DEFAULT
    epsilon_m: float = 1e-6
    l_max: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        if not (self.epsilon_h > 0 and self.epsilon_m > 0):
            raise ValueError("thresholds must be positive")
        if not self.epsilon_m < self.epsilon_h:
            raise ValueError("epsilon_m must be below epsilon_h")
        if self.l_max is not None and not self.l_max > 0:
            raise ValueError("l_max must be positive")
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def resolved(self, record: SimulationRecord) -> tuple[float, float]:
        spec = record.spec
        l_max = self.l_max if self.l_max is not None else 4.0 * spec.diagonal
        alpha = self.alpha if self.alpha is not None else 5.0 * spec.cell_size
        return l_max, alpha


@dataclass(frozen=True)
class Pathline:
    """Saved trace points, starting at the seed; t_wet is None if never wet."""

    points: tuple[tuple[float, float], ...]
    seed: tuple[float, float]
    t_wet: float | None

    def __post_init__(self):
        if not self.points or self.points[0] != self.seed:
            raise ValueError("pathline must start at its seed")


def wet_time(record: SimulationRecord, x0: float, y0: float, epsilon_h: float = WET_DEPTH_DEFAULT):
    """Earliest snapshot time at which the cell containing (x0, y0) is wet.

    Returns None when the depth never reaches epsilon_h. Raises
    OutsideDomainError for seeds beyond the domain.
    """
    i, j = get_index(record.spec, x0, y0)
    for snap in record.snapshots:
        if snap.h[j, i] >= epsilon_h:
            return snap.time
    return None


class _Tracer:
    """Snapshot stacks and the integration loop shared across seeds."""

    def __init__(self, record: SimulationRecord, config: PathlineConfig):
        self.record = record
        self.config = config
        self.spec = record.spec
        self.times = record.timestamps
        h = record.depth_stack()
        with np.errstate(invalid="ignore", divide="ignore"):
            hu = np.stack([s.hu for s in record.snapshots])
            hv = np.stack([s.hv for s in record.snapshots])
            self.u = np.where(h > 0.0, hu / np.where(h > 0.0, h, 1.0), 0.0)
            self.v = np.where(h > 0.0, hv / np.where(h > 0.0, h, 1.0), 0.0)
        self.h = h
        self.l_max, self.alpha = config.resolved(record)

    def _nearest_time(self, t: float) -> int:
        return int(np.argmin(np.abs(self.times - t)))

    def trace(self, x0: float, y0: float) -> Pathline:
        spec = self.spec
        eps_m = self.config.epsilon_m
        d = spec.cell_size
        t_wet = wet_time(self.record, x0, y0, self.config.epsilon_h)
        points = [(x0, y0)]
        if t_wet is None:
            return Pathline(tuple(points), (x0, y0), None)
        t0 = self.record.t0
        length = 0.0
        segment = 0.0
        x, y, t = x0, y0, t_wet
        while length < self.l_max and t0 <= t <= t_wet:
            i, j = get_index(spec, x, y)
            k = self._nearest_time(t)
            u0 = self.u[k, j, i]
            v0 = self.v[k, j, i]
            if math.hypot(u0, v0) <= eps_m or self.h[k, j, i] <= eps_m:
                break
            # step backward, at most a third of a cell per component
            dt = -(1.0 / 3.0) * min(
                d / abs(u0) if u0 != 0.0 else math.inf,
                d / abs(v0) if v0 != 0.0 else math.inf,
            )
            x_star = x + u0 * dt
            y_star = y + v0 * dt
            t_star = t + dt
            if not spec.contains(x_star, y_star):
                break
            i_star, j_star = get_index(spec, x_star, y_star)
            k_star = self._nearest_time(t_star)
            if self.h[k_star, j_star, i_star] <= eps_m:
                break
            # trapezoidal corrector
            x_next = x + 0.5 * dt * (u0 + self.u[k_star, j_star, i_star])
            y_next = y + 0.5 * dt * (v0 + self.v[k_star, j_star, i_star])
            ds = math.hypot(x_next - x, y_next - y)
            if not spec.contains(x_next, y_next) or ds <= eps_m or ds > 2.0 * self.alpha:
                break
            length += ds
            segment += ds
            x, y, t = x_next, y_next, t_star
            if segment >= d:  # half the sum of the two (equal) cell spacings
                segment = 0.0
                points.append((x_next, y_next))
        return Pathline(tuple(points), (x0, y0), t_wet)


def compute_pathline(record: SimulationRecord, x0: float, y0: float, config: PathlineConfig | None = None) -> Pathline:
    """Trace one reverse pathline from (x0, y0) back toward the flood source."""
    return _Tracer(record, config or PathlineConfig()).trace(x0, y0)


def pathtube_points(record: SimulationRecord, exterior, config: PathlineConfig | None = None):
    """Union of pathline points over all seeds, exact duplicates removed.

    Seeds that never become wet contribute only themselves. Order follows
    seed order, then point order along each pathline.
    """
    tracer = _Tracer(record, config or PathlineConfig())
    seen: dict[tuple[float, float], None] = {}
    for x0, y0 in exterior:
        for p in tracer.trace(x0, y0).points:
            seen.setdefault(p, None)
    return list(seen.keys())
