"""Flood-barrier placement optimization over an embedded shallow-water solver."""

from .geometry import (
    ALL_PLANE,
    AllPlaneRegion,
    AssetPolygon,
    Region,
    SamplingError,
    Triangle,
    alpha_shape,
    delaunay,
    region_contains,
    region_distance,
    region_subtract_assets,
    region_union,
)
from .grid import GridSpec, OutsideDomainError, ScalarField, cell_center, get_index
from .objective import Evaluator, ObjectiveBreakdown, PenaltyWeights, evaluate, flood_volume, penalty
from .optimizer import (
    DEConfig,
    DifferentialEvolution,
    HistoryEntry,
    InitScheme,
    Mode,
    SearchBudget,
    SolveResult,
    initialize_restriction,
    latin_hypercube,
    solve_ofmp,
    solve_sequential,
    update_restriction,
)
from .pathline import Pathline, PathlineConfig, compute_pathline, pathtube_points, wet_time
from .scenario_io import (
    FIXTURE_COUNT,
    Scenario,
    ScenarioError,
    builtin_scenario,
    load_raster,
    load_scenario,
    save_scenario,
    write_configuration_csv,
    write_convergence_csv,
    write_pathlines_csv,
    write_raster,
    write_region_exteriors,
    write_snapshot_summary,
)
from .structures import Configuration, WallParams, WallSpec, rasterize_configuration, wall_asset_volume, wall_footprint
from .swe import (
    Boundary,
    FlowState,
    Manning,
    SimulationRecord,
    SolverDivergenceError,
    SourceTerms,
    VolumetricSource,
    simulate,
    step,
)

__all__ = [
    "ALL_PLANE",
    "AllPlaneRegion",
    "AssetPolygon",
    "Boundary",
    "Configuration",
    "DEConfig",
    "DifferentialEvolution",
    "Evaluator",
    "FIXTURE_COUNT",
    "FlowState",
    "GridSpec",
    "HistoryEntry",
    "InitScheme",
    "Manning",
    "Mode",
    "ObjectiveBreakdown",
    "OutsideDomainError",
    "Pathline",
    "PathlineConfig",
    "PenaltyWeights",
    "Region",
    "SamplingError",
    "Scenario",
    "ScenarioError",
    "ScalarField",
    "SearchBudget",
    "SimulationRecord",
    "SolveResult",
    "SolverDivergenceError",
    "SourceTerms",
    "Triangle",
    "VolumetricSource",
    "WallParams",
    "WallSpec",
    "alpha_shape",
    "builtin_scenario",
    "cell_center",
    "compute_pathline",
    "delaunay",
    "evaluate",
    "flood_volume",
    "get_index",
    "initialize_restriction",
    "latin_hypercube",
    "load_raster",
    "load_scenario",
    "pathtube_points",
    "penalty",
    "rasterize_configuration",
    "region_contains",
    "region_distance",
    "region_subtract_assets",
    "region_union",
    "save_scenario",
    "simulate",
    "solve_ofmp",
    "solve_sequential",
    "step",
    "update_restriction",
    "wall_asset_volume",
    "wall_footprint",
    "wet_time",
    "write_configuration_csv",
    "write_convergence_csv",
    "write_pathlines_csv",
    "write_raster",
    "write_region_exteriors",
    "write_snapshot_summary",
]
