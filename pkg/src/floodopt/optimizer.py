"""Search loop for wall placements: restriction handling, differential
evolution in direct and pathline-restricted modes, and the sequential
one-wall-at-a-time wrapper.

The coordinator draws every random number and applies results in candidate
order, so runs are bit-reproducible for any worker count. Feasibility
penalties are computed up front per batch; only feasible candidates cost a
flow simulation, dispatched to a thread pool.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .geometry import ALL_PLANE, AllPlaneRegion, Region, SamplingError, alpha_shape, region_subtract_assets
from .grid import ScalarField
from .objective import Evaluator, ObjectiveBreakdown
from .pathline import PathlineConfig, pathtube_points
from .scenario_io import Scenario, with_terrain
from .structures import Configuration, WallParams, rasterize_configuration
from .swe import SimulationRecord, simulate


class Mode(enum.Enum):
    """Where wall centroids may roam: the whole domain box, or near flood paths."""

    DIRECT = "direct"
    PATHLINE = "pathline"


class InitScheme(enum.Enum):
    LATIN_HYPERCUBE = "latin_hypercube"
    RESTRICTED_SAMPLING = "restricted_sampling"


@dataclass(frozen=True)
class SearchBudget:
    """Stopping rule: wall-clock seconds, candidate evaluations, or both."""

    wall_time_limit: float | None = None
    max_evaluations: int | None = None

    def __post_init__(self):
        if self.wall_time_limit is None and self.max_evaluations is None:
            raise ValueError("set a wall-time limit, an evaluation limit, or both")
        if self.wall_time_limit is not None and not self.wall_time_limit > 0:
            raise ValueError("wall_time_limit must be positive")
        if self.max_evaluations is not None and self.max_evaluations < 0:
            raise ValueError("max_evaluations must be non-negative")


@dataclass(frozen=True)
class DEConfig:
    """Differential-evolution settings: population 45 per wall, best/1/bin,
    mutation factor redrawn uniformly from [0.5, 1.0) each generation,
    crossover 0.9."""

    population_size_factor: int = 45
    mutation_range: tuple[float, float] = (0.5, 1.0)
    recombination: float = 0.9
    init: InitScheme | None = None  # default picked by mode
    rng_seed: int = 0

    def __post_init__(self):
        lo, hi = self.mutation_range
        if not (0.0 < lo < hi <= 2.0):
            raise ValueError("mutation_range must satisfy 0 < lo < hi <= 2")
        if not 0.0 < self.recombination <= 1.0:
            raise ValueError("recombination must lie in (0, 1]")
        if self.population_size_factor < 4:
            raise ValueError("population must be at least 4 per wall")


@dataclass(frozen=True)
class HistoryEntry:
    """One evaluated candidate: 1-based index, its objective, best total after it."""

    index: int
    config: Configuration
    objective: ObjectiveBreakdown
    best_total: float


@dataclass(frozen=True)
class SolveResult:
    best_config: Configuration
    best_objective: ObjectiveBreakdown
    best_elevation: ScalarField
    history: tuple[HistoryEntry, ...]
    restriction_trace: tuple[Region, ...]
    pde_solves: int
    stage_results: tuple["SolveResult", ...] = ()

    @property
    def evaluations(self) -> int:
        return len(self.history)


# ---------------------------------------------------------------------------
# Restriction computation
# ---------------------------------------------------------------------------

def _pathline_config(alpha: float, base: PathlineConfig | None) -> PathlineConfig:
    if base is None:
        return PathlineConfig(alpha=alpha)
    if base.alpha is None:
        return replace(base, alpha=alpha)
    return base


def _asset_shapes(record: SimulationRecord, assets, alpha: float, config: PathlineConfig) -> Region:
    triangles = []
    for asset in assets:
        points = pathtube_points(record, asset.exterior, config)
        triangles.extend(alpha_shape(points, alpha).triangles)
    return Region(triangles)


def initialize_restriction(
    scenario: Scenario,
    alpha: float,
    mode: Mode = Mode.PATHLINE,
    config: PathlineConfig | None = None,
) -> tuple[Region, SimulationRecord]:
    """Structure-free solve plus the initial centroid restriction.

    Direct mode admits the whole plane; pathline mode keeps the union of
    alpha shapes over the pathtubes leading to each asset, minus the assets
    themselves. The record is returned for reuse as the cached baseline.
    """
    record = simulate(
        scenario.terrain,
        ScalarField.zeros(scenario.grid),
        scenario.initial_depth,
        scenario.sources,
        scenario.boundary,
        scenario.duration,
        scenario.report_interval,
    )
    if mode is Mode.DIRECT:
        return ALL_PLANE, record
    shapes = _asset_shapes(record, scenario.assets, alpha, _pathline_config(alpha, config))
    return region_subtract_assets(shapes, scenario.assets), record


def update_restriction(
    record: SimulationRecord,
    assets,
    current: Region,
    alpha: float,
    config: PathlineConfig | None = None,
) -> Region:
    """Grow the restriction with the new record's pathtube alpha shapes.

    Membership is monotone non-decreasing; asset interiors stay excluded.
    """
    if isinstance(current, AllPlaneRegion):
        return current
    shapes = _asset_shapes(record, assets, alpha, _pathline_config(alpha, config))
    merged = Region(current.triangles + shapes.triangles)
    return region_subtract_assets(merged, assets)


# ---------------------------------------------------------------------------
# Candidate generation
# ---------------------------------------------------------------------------

def latin_hypercube(rng: np.random.Generator, count: int, lower, upper) -> np.ndarray:
    """Stratified samples: one point per equal-probability slice per dimension."""
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    out = np.empty((count, len(lower)))
    for d in range(len(lower)):
        strata = rng.permutation(count)
        out[:, d] = lower[d] + (strata + rng.random(count)) / count * (upper[d] - lower[d])
    return out


def fold_angle(theta: float) -> float:
    """Reflect an angle into [0, pi]."""
    t = theta % (2.0 * math.pi)
    return 2.0 * math.pi - t if t > math.pi else t


class DifferentialEvolution:
    """best/1/bin population with greedy selection.

    Trials take the best member plus a scaled difference of two random
    distinct members, binomial crossover with one forced coordinate, and
    per-dimension bound handling (clip positions, reflect angles).
    """

    def __init__(self, lower, upper, reflect, recombination: float, mutation_range):
        self.lower = np.asarray(lower, dtype=np.float64)
        self.upper = np.asarray(upper, dtype=np.float64)
        self.reflect = np.asarray(reflect, dtype=bool)
        self.recombination = recombination
        self.mutation_range = mutation_range
        self.vectors: np.ndarray | None = None
        self.totals: np.ndarray | None = None

    def set_population(self, vectors: np.ndarray, totals) -> None:
        if len(vectors) < 4:
            raise ValueError("population must hold at least 4 members")
        self.vectors = np.array(vectors, dtype=np.float64)
        self.totals = np.array(totals, dtype=np.float64)

    def _apply_bounds(self, vec: np.ndarray) -> np.ndarray:
        out = np.clip(vec, self.lower, self.upper)
        for d in np.nonzero(self.reflect)[0]:
            out[d] = fold_angle(vec[d])
        return out

    def trials(self, rng: np.random.Generator) -> np.ndarray:
        """One generation of trial vectors; mutation factor drawn once."""
        pop, dim = self.vectors.shape
        factor = rng.uniform(*self.mutation_range)
        base = self.vectors[int(np.argmin(self.totals))]
        out = np.empty_like(self.vectors)
        for m in range(pop):
            while True:
                r1 = int(rng.integers(pop))
                if r1 != m:
                    break
            while True:
                r2 = int(rng.integers(pop))
                if r2 != m and r2 != r1:
                    break
            cross = rng.random(dim) < self.recombination
            cross[int(rng.integers(dim))] = True
            mutant = base + factor * (self.vectors[r1] - self.vectors[r2])
            out[m] = self._apply_bounds(np.where(cross, mutant, self.vectors[m]))
        return out

    def select(self, member: int, vector: np.ndarray, total: float) -> None:
        """Greedy per-member replacement (ties prefer the trial)."""
        if total <= self.totals[member]:
            self.vectors[member] = vector
            self.totals[member] = total


# ---------------------------------------------------------------------------
# The solve loop
# ---------------------------------------------------------------------------

def _decode(vector: np.ndarray, wall_spec) -> Configuration:
    walls = []
    for k in range(0, len(vector), 3):
        walls.append(WallParams(center_x=float(vector[k]), center_y=float(vector[k + 1]), angle=float(vector[k + 2])))
    return Configuration(tuple(walls), wall_spec)


def _wall_bounds(scenario: Scenario, n: int):
    x0, y0, x1, y1 = scenario.grid.extent
    lower = np.tile([x0, y0, 0.0], n)
    upper = np.tile([x1, y1, math.pi], n)
    reflect = np.tile([False, False, True], n)
    return lower, upper, reflect


def _initial_vectors(rng, scheme: InitScheme, region: Region, n: int, pop: int, lower, upper):
    if scheme is InitScheme.RESTRICTED_SAMPLING:
        try:
            centroids = region.sample_uniform(rng, pop * n)
        except SamplingError:
            # degenerate restriction (asset never wetted); fall back to the box
            return latin_hypercube(rng, pop, lower, upper)
        angles = rng.uniform(0.0, math.pi, pop * n)
        vectors = np.empty((pop, 3 * n))
        for m in range(pop):
            for k in range(n):
                x, y = centroids[m * n + k]
                vectors[m, 3 * k] = x
                vectors[m, 3 * k + 1] = y
                vectors[m, 3 * k + 2] = angles[m * n + k]
        return vectors
    return latin_hypercube(rng, pop, lower, upper)


class _Search:
    """Shared state for one solve: evaluator, budget, incumbent, history."""

    def __init__(self, scenario, region, record, budget, workers, alpha, plc, mode, allow_updates):
        self.scenario = scenario
        self.evaluator = Evaluator(scenario, region, unmitigated=record)
        self.budget = budget
        self.workers = max(1, workers)
        self.alpha = alpha
        self.plc = plc
        self.mode = mode
        self.allow_updates = allow_updates
        self.start = time.monotonic()
        self.history: list[HistoryEntry] = []
        self.trace: list[Region] = [region]
        self.best_config = Configuration.empty(scenario.wall_spec)
        self.best = ObjectiveBreakdown(self.evaluator.unmitigated_volume, 0.0, 0.0)

    def evaluations_left(self) -> int:
        if self.budget.max_evaluations is None:
            return 10 ** 9
        return self.budget.max_evaluations - len(self.history)

    def time_exhausted(self) -> bool:
        limit = self.budget.wall_time_limit
        return limit is not None and (time.monotonic() - self.start) >= limit

    def run_batch(self, configs) -> list[float]:
        """Evaluate candidates in order; returns their objective totals.

        Penalties come from the batch-start restriction; only feasible
        candidates are simulated (in a thread pool when workers > 1). Best
        and restriction updates happen in candidate order afterwards.
        """
        penalties = [self.evaluator.penalty(c) for c in configs]
        feasible = [k for k, (o, d) in enumerate(penalties) if o == 0.0 and d == 0.0]
        if self.workers > 1 and len(feasible) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                solved = list(pool.map(self.evaluator.flood_eval, (configs[k] for k in feasible)))
        else:
            solved = [self.evaluator.flood_eval(configs[k]) for k in feasible]
        by_candidate = dict(zip(feasible, solved))
        totals = []
        for k, config in enumerate(configs):
            if k in by_candidate:
                volume, record = by_candidate[k]
                breakdown = ObjectiveBreakdown(volume, 0.0, 0.0)
            else:
                overlap, distance = penalties[k]
                breakdown = ObjectiveBreakdown(self.evaluator.unmitigated_volume, overlap, distance)
                record = None
            if breakdown.total < self.best.total:
                self.best = breakdown
                self.best_config = config
                if self.mode is Mode.PATHLINE and self.allow_updates and record is not None:
                    new_region = update_restriction(
                        record, self.scenario.assets, self.evaluator.region, self.alpha, self.plc
                    )
                    self.evaluator.region = new_region
                    self.trace.append(new_region)
            self.history.append(
                HistoryEntry(len(self.history) + 1, config, breakdown, self.best.total)
            )
            totals.append(breakdown.total)
        return totals

    def result(self, pde_solves_extra: int = 0) -> SolveResult:
        grid = self.scenario.grid
        elevation = ScalarField(
            grid,
            self.scenario.terrain.values + rasterize_configuration(self.best_config, grid).values,
        )
        return SolveResult(
            best_config=self.best_config,
            best_objective=self.best,
            best_elevation=elevation,
            history=tuple(self.history),
            restriction_trace=tuple(self.trace),
            pde_solves=self.evaluator.pde_solves + pde_solves_extra,
            stage_results=(),
        )


def solve_ofmp(
    scenario: Scenario,
    n: int,
    budget: SearchBudget,
    mode: Mode = Mode.DIRECT,
    de: DEConfig | None = None,
    alpha: float | None = None,
    pathline_config: PathlineConfig | None = None,
    workers: int = 1,
    allow_restriction_updates: bool = True,
) -> SolveResult:
    """Search for n wall placements minimizing flooding at the assets.

    Runs restriction initialization (one structure-free solve), seeds the
    population (Latin hypercube over the box in direct mode, uniform samples
    of the restriction in pathline mode), then iterates generations until
    the budget is exhausted. The incumbent starts at the do-nothing
    configuration, so a zero budget returns the baseline.
    """
    if n < 1:
        raise ValueError("need at least one wall")
    de = de or DEConfig()
    if alpha is None:
        alpha = 5.0 * scenario.grid.cell_size
    plc = _pathline_config(alpha, pathline_config)
    region, record = initialize_restriction(scenario, alpha, mode, plc)
    search = _Search(scenario, region, record, budget, workers, alpha, plc, mode, allow_restriction_updates)

    rng = np.random.default_rng(de.rng_seed)
    pop = de.population_size_factor * n
    lower, upper, reflect = _wall_bounds(scenario, n)
    scheme = de.init or (
        InitScheme.RESTRICTED_SAMPLING if mode is Mode.PATHLINE else InitScheme.LATIN_HYPERCUBE
    )
    vectors = _initial_vectors(rng, scheme, region, n, pop, lower, upper)

    generator = DifferentialEvolution(lower, upper, reflect, de.recombination, de.mutation_range)

    # zeroth generation: evaluate the initial population
    allowed = min(pop, search.evaluations_left())
    if allowed > 0 and not search.time_exhausted():
        configs = [_decode(v, scenario.wall_spec) for v in vectors[:allowed]]
        totals = search.run_batch(configs)
        if allowed == pop:
            generator.set_population(vectors, totals)
        else:
            vectors = None  # budget died mid-initialization
    else:
        vectors = None

    while vectors is not None and search.evaluations_left() > 0 and not search.time_exhausted():
        trials = generator.trials(rng)
        allowed = min(len(trials), search.evaluations_left())
        configs = [_decode(v, scenario.wall_spec) for v in trials[:allowed]]
        totals = search.run_batch(configs)
        for m in range(allowed):
            generator.select(m, trials[m], totals[m])

    return search.result(pde_solves_extra=1)  # the initialization solve


def solve_sequential(
    scenario: Scenario,
    n: int,
    budget: SearchBudget,
    mode: Mode = Mode.DIRECT,
    de: DEConfig | None = None,
    alpha: float | None = None,
    pathline_config: PathlineConfig | None = None,
    workers: int = 1,
) -> SolveResult:
    """Place walls one at a time, each stage baking its wall into the terrain.

    Every stage gets an equal share of the budget and a seed offset by its
    stage index, restriction updates are disabled (the restriction is built
    once per stage), and the combined solution concatenates the stage walls.
    The objective never rises across stages because each stage's incumbent
    includes doing nothing.
    """
    if n < 1:
        raise ValueError("need at least one wall")
    de = de or DEConfig()
    stage_budget = SearchBudget(
        wall_time_limit=None if budget.wall_time_limit is None else budget.wall_time_limit / n,
        max_evaluations=None if budget.max_evaluations is None else budget.max_evaluations // n,
    )
    current = scenario
    walls: list[WallParams] = []
    stages: list[SolveResult] = []
    history: list[HistoryEntry] = []
    trace: list[Region] = []
    pde_total = 0
    for stage in range(n):
        stage_de = replace(de, rng_seed=de.rng_seed + stage)
        res = solve_ofmp(
            current,
            1,
            stage_budget,
            mode,
            stage_de,
            alpha,
            pathline_config,
            workers,
            allow_restriction_updates=False,
        )
        stages.append(res)
        offset = len(history)
        for e in res.history:
            history.append(HistoryEntry(offset + e.index, e.config, e.objective, e.best_total))
        trace.extend(res.restriction_trace)
        pde_total += res.pde_solves
        if res.best_config.walls:
            walls.extend(res.best_config.walls)
        current = with_terrain(current, res.best_elevation)
    final = stages[-1]
    return SolveResult(
        best_config=Configuration(tuple(walls), scenario.wall_spec),
        best_objective=final.best_objective,
        best_elevation=current.terrain,
        history=tuple(history),
        restriction_trace=tuple(trace),
        pde_solves=pde_total,
        stage_results=tuple(stages),
    )
