"""The relaxed placement objective: asset flood volume plus feasibility penalty.

Feasible configurations run the flow solver; infeasible ones reuse the
cached structure-free record and pay an additive penalty, so they never
cost a PDE solve and never beat the do-nothing solution.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .geometry import Region
from .grid import GridSpec, ScalarField
from .structures import Configuration, rasterize_configuration, wall_asset_volume
from .swe import SimulationRecord, simulate


@dataclass(frozen=True)
class PenaltyWeights:
    """Scale factors for the overlap and distance penalty terms."""

    c1: float
    c2: float = 1.0

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("penalty weights must be non-negative")

    @classmethod
    def defaults(cls, grid: GridSpec) -> "PenaltyWeights":
        """c1 is the inverse squared cell size, c2 is one."""
        return cls(c1=grid.cell_size ** -2, c2=1.0)


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """Objective parts; the total is their sum and feasibility means no penalty."""

    flood_volume: float
    overlap_penalty: float
    distance_penalty: float

    def __post_init__(self):
        if self.flood_volume < 0 or self.overlap_penalty < 0 or self.distance_penalty < 0:
            raise ValueError("objective parts must be non-negative")

    @property
    def total(self) -> float:
        return self.flood_volume + self.overlap_penalty + self.distance_penalty

    @property
    def feasible(self) -> bool:
        return self.overlap_penalty == 0.0 and self.distance_penalty == 0.0


def flood_volume(max_depth: ScalarField, assets, masks=None) -> float:
    """Maximum water volume over the asset regions (m3), cell-center sampled."""
    if masks is None:
        masks = [asset.cell_mask(max_depth.spec) for asset in assets]
    total = 0.0
    for mask in masks:
        total += float(max_depth.values[mask].sum())
    return total * max_depth.spec.cell_area


def penalty(
    config: Configuration,
    assets,
    region: Region,
    weights: PenaltyWeights,
    grid: GridSpec,
    masks=None,
) -> tuple[float, float]:
    """(overlap, distance) penalty parts; both zero iff the placement is legal.

    Overlap charges structure volume intruding into assets; distance charges
    each centroid's distance to the restricted region. An empty restriction
    yields an infinite distance penalty.
    """
    overlap = weights.c1 * wall_asset_volume(config, assets, grid, masks)
    distance = 0.0
    for wall in config.walls:
        distance += region.distance(wall.center_x, wall.center_y)
    return overlap, weights.c2 * distance


class Evaluator:
    """Objective evaluation against one scenario with a cached baseline record.

    Thread safe: concurrent evaluations of distinct configurations are fine,
    and the PDE solve counter is kept consistent for audits.
    """

    def __init__(self, scenario, region: Region, weights: PenaltyWeights | None = None,
                 unmitigated: SimulationRecord | None = None):
        self.scenario = scenario
        self.region = region
        grid = scenario.terrain.spec
        self.weights = weights if weights is not None else PenaltyWeights.defaults(grid)
        self.asset_masks = [asset.cell_mask(grid) for asset in scenario.assets]
        if unmitigated is None:
            unmitigated = self.solve(Configuration.empty(scenario.wall_spec))
        self.unmitigated = unmitigated
        self.unmitigated_volume = flood_volume(unmitigated.max_depth, scenario.assets, self.asset_masks)
        self._lock = threading.Lock()
        self.pde_solves = 0

    def solve(self, config: Configuration) -> SimulationRecord:
        """Run the flow solver for one configuration (not counted)."""
        scn = self.scenario
        field = rasterize_configuration(config, scn.terrain.spec)
        return simulate(
            scn.terrain,
            field,
            scn.initial_depth,
            scn.sources,
            scn.boundary,
            scn.duration,
            scn.report_interval,
        )

    def penalty(self, config: Configuration) -> tuple[float, float]:
        return penalty(
            config,
            self.scenario.assets,
            self.region,
            self.weights,
            self.scenario.terrain.spec,
            self.asset_masks,
        )

    def flood_eval(self, config: Configuration) -> tuple[float, SimulationRecord]:
        """Simulate a feasible configuration; counts one PDE solve."""
        record = self.solve(config)
        with self._lock:
            self.pde_solves += 1
        volume = flood_volume(record.max_depth, self.scenario.assets, self.asset_masks)
        return volume, record

    def evaluate(self, config: Configuration) -> tuple[ObjectiveBreakdown, SimulationRecord | None]:
        """Objective for one configuration.

        Feasible placements are simulated and return their record; infeasible
        ones reuse the cached structure-free flood volume plus the penalty
        and return no record (and run no solver).
        """
        overlap, distance = self.penalty(config)
        if overlap == 0.0 and distance == 0.0:
            volume, record = self.flood_eval(config)
            return ObjectiveBreakdown(volume, 0.0, 0.0), record
        return ObjectiveBreakdown(self.unmitigated_volume, overlap, distance), None


def evaluate(scenario, config: Configuration, region: Region,
             weights: PenaltyWeights | None = None,
             unmitigated: SimulationRecord | None = None):
    """One-shot evaluation; prefer Evaluator when judging many configurations."""
    return Evaluator(scenario, region, weights, unmitigated).evaluate(config)
