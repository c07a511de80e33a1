"""Scenario definition, file formats, built-in fixtures and result writers.

A scenario on disk is a YAML manifest plus sibling ESRI ASCII rasters.
Round-trips are lossless: floats are written with shortest round-trip
formatting everywhere, so saving and loading reproduces fields bit for bit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np
import yaml

from .geometry import AssetPolygon, Region
from .grid import GridSpec, ScalarField
from .structures import Configuration, WallSpec
from .swe import Boundary, Manning, SourceTerms, VolumetricSource


class ScenarioError(ValueError):
    """A scenario file or definition failed validation."""


@dataclass(frozen=True)
class Scenario:
    """Everything one flood problem needs: rasters, assets, physics, walls."""

    terrain: ScalarField
    initial_depth: ScalarField
    assets: tuple[AssetPolygon, ...]
    sources: SourceTerms
    boundary: Boundary
    duration: float
    report_interval: float
    wall_spec: WallSpec
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(self.assets))
        spec = self.terrain.spec
        if self.initial_depth.spec != spec:
            raise ScenarioError("initial_depth grid does not match terrain grid")
        if np.any(self.initial_depth.values < 0):
            raise ScenarioError("initial depth must be non-negative")
        if not self.duration > 0 or not self.report_interval > 0:
            raise ScenarioError("duration and report_interval must be positive")
        n = round(self.duration / self.report_interval)
        if n < 1 or abs(n * self.report_interval - self.duration) > 1e-9 * self.duration:
            raise ScenarioError("duration must be a positive multiple of report_interval")
        if self.sources.volumetric is not None and self.sources.volumetric.spec != spec:
            raise ScenarioError("volumetric source grid does not match terrain grid")
        for idx, asset in enumerate(self.assets):
            for x, y in asset.exterior:
                if not spec.contains(x, y):
                    raise ScenarioError(f"asset {idx + 1} vertex ({x}, {y}) lies outside the domain")

    @property
    def grid(self) -> GridSpec:
        return self.terrain.spec


# ---------------------------------------------------------------------------
# ESRI ASCII grid rasters
# ---------------------------------------------------------------------------

def write_raster(field: ScalarField, path) -> None:
    """ESRI ASCII grid, rows north to south, shortest round-trip floats."""
    spec = field.spec
    lines = [
        f"ncols {spec.n_cols}",
        f"nrows {spec.n_rows}",
        f"xllcorner {spec.origin_x!r}",
        f"yllcorner {spec.origin_y!r}",
        f"cellsize {spec.cell_size!r}",
        "NODATA_value -9999",
    ]
    for j in range(spec.n_rows - 1, -1, -1):
        lines.append(" ".join(repr(float(v)) for v in field.values[j]))
    _atomic_write(path, "\n".join(lines) + "\n")


def load_raster(path) -> ScalarField:
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    header: dict[str, float] = {}
    pos = 0
    while pos + 1 < len(tokens) and tokens[pos].lower() in (
        "ncols",
        "nrows",
        "xllcorner",
        "yllcorner",
        "cellsize",
        "nodata_value",
    ):
        header[tokens[pos].lower()] = float(tokens[pos + 1])
        pos += 2
    for key in ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize"):
        if key not in header:
            raise ScenarioError(f"{path}: raster header misses {key}")
    n_cols = int(header["ncols"])
    n_rows = int(header["nrows"])
    values = tokens[pos:]
    if len(values) != n_cols * n_rows:
        raise ScenarioError(
            f"{path}: expected {n_cols * n_rows} raster values, found {len(values)}"
        )
    arr = np.array([float(v) for v in values], dtype=np.float64).reshape(n_rows, n_cols)
    nodata = header.get("nodata_value")
    if nodata is not None and np.any(arr == nodata):
        raise ScenarioError(f"{path}: NODATA cells are not supported")
    spec = GridSpec(
        n_cols=n_cols,
        n_rows=n_rows,
        cell_size=header["cellsize"],
        origin_x=header["xllcorner"],
        origin_y=header["yllcorner"],
    )
    return ScalarField(spec, arr[::-1].copy())


# ---------------------------------------------------------------------------
# Scenario manifests
# ---------------------------------------------------------------------------

def save_scenario(scenario: Scenario, path) -> None:
    """Write the manifest at ``path`` and its rasters beside it."""
    path = os.fspath(path)
    base = os.path.splitext(os.path.basename(path))[0]
    directory = os.path.dirname(path) or "."
    spec = scenario.grid

    def raster_name(kind: str) -> str:
        return f"{base}.{kind}.asc"

    write_raster(scenario.terrain, os.path.join(directory, raster_name("terrain")))
    write_raster(scenario.initial_depth, os.path.join(directory, raster_name("initial_depth")))

    manifest: dict = {
        "name": scenario.name or base,
        "grid": {
            "n_cols": spec.n_cols,
            "n_rows": spec.n_rows,
            "cell_size": float(spec.cell_size),
            "origin_x": float(spec.origin_x),
            "origin_y": float(spec.origin_y),
        },
        "terrain": raster_name("terrain"),
        "initial_depth": raster_name("initial_depth"),
        "boundary": scenario.boundary.value,
        "duration": float(scenario.duration),
        "report_interval": float(scenario.report_interval),
        "gravity": float(scenario.sources.gravity),
        "wall": {
            "length": float(scenario.wall_spec.length),
            "width": float(scenario.wall_spec.width),
            "height": float(scenario.wall_spec.height),
        },
        "assets": [[[float(x), float(y)] for x, y in a.exterior] for a in scenario.assets],
    }
    friction = scenario.sources.friction
    manifest["friction"] = (
        {"type": "manning", "n": float(friction.n)} if friction is not None else {"type": "none"}
    )
    vol = scenario.sources.volumetric
    if vol is not None:
        names = []
        for k in range(len(vol.times)):
            name = raster_name(f"rate_{k}")
            write_raster(ScalarField(spec, vol.rates[k]), os.path.join(directory, name))
            names.append(name)
        manifest["volumetric"] = {"times": [float(t) for t in vol.times], "rates": names}
    _atomic_write(path, yaml.safe_dump(manifest, sort_keys=False))


def load_scenario(path) -> Scenario:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    try:
        with open(path, "r", encoding="utf-8") as fh:
            manifest = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: manifest does not parse: {exc}") from exc
    if not isinstance(manifest, dict):
        raise ScenarioError(f"{path}: manifest must be a mapping")

    def require(key):
        if key not in manifest:
            raise ScenarioError(f"{path}: manifest misses '{key}'")
        return manifest[key]

    terrain = load_raster(os.path.join(directory, require("terrain")))
    initial_depth = load_raster(os.path.join(directory, require("initial_depth")))
    if "grid" in manifest:
        g = manifest["grid"]
        declared = GridSpec(
            n_cols=int(g["n_cols"]),
            n_rows=int(g["n_rows"]),
            cell_size=float(g["cell_size"]),
            origin_x=float(g["origin_x"]),
            origin_y=float(g["origin_y"]),
        )
        if declared != terrain.spec:
            raise ScenarioError(f"{path}: terrain raster grid does not match the declared grid")
    if initial_depth.spec != terrain.spec:
        raise ScenarioError(f"{path}: initial_depth raster grid does not match terrain")

    friction_entry = manifest.get("friction", {"type": "none"})
    if friction_entry.get("type") == "manning":
        friction = Manning(float(friction_entry["n"]))
    elif friction_entry.get("type") in (None, "none"):
        friction = None
    else:
        raise ScenarioError(f"{path}: unknown friction type {friction_entry.get('type')!r}")

    volumetric = None
    if "volumetric" in manifest:
        entry = manifest["volumetric"]
        times = [float(t) for t in entry["times"]]
        rates = []
        for name in entry["rates"]:
            rf = load_raster(os.path.join(directory, name))
            if rf.spec != terrain.spec:
                raise ScenarioError(f"{path}: rate raster {name} grid does not match terrain")
            rates.append(rf.values)
        volumetric = VolumetricSource(terrain.spec, times, np.stack(rates))

    try:
        boundary = Boundary(require("boundary"))
    except ValueError as exc:
        raise ScenarioError(f"{path}: unknown boundary {manifest.get('boundary')!r}") from exc

    wall = require("wall")
    assets = []
    for idx, ring in enumerate(require("assets")):
        try:
            assets.append(AssetPolygon(tuple((float(x), float(y)) for x, y in ring)))
        except ValueError as exc:
            raise ScenarioError(f"{path}: asset {idx + 1} invalid: {exc}") from exc
    return Scenario(
        terrain=terrain,
        initial_depth=initial_depth,
        assets=tuple(assets),
        sources=SourceTerms(volumetric=volumetric, friction=friction, gravity=float(manifest.get("gravity", 9.81))),
        boundary=boundary,
        duration=float(require("duration")),
        report_interval=float(require("report_interval")),
        wall_spec=WallSpec(
            length=float(wall["length"]), width=float(wall["width"]), height=float(wall["height"])
        ),
        name=str(manifest.get("name", "")),
    )


# ---------------------------------------------------------------------------
# Built-in fixtures
# ---------------------------------------------------------------------------

FIXTURE_COUNT = 6
_FIXTURE_GRID = GridSpec(n_cols=64, n_rows=64, cell_size=1.0)
_WALL_SPEC = WallSpec(length=8.0, width=2.5, height=1.0)
_WATER_CENTER = (32.0, 32.0)
_WATER_RADIUS = 8.0


def _rect_asset(x0: float, y0: float, x1: float, y1: float) -> AssetPolygon:
    """Axis-aligned rectangle densified to roughly one vertex per meter."""
    ring: list[tuple[float, float]] = []
    for x in np.arange(x0, x1, 1.0):
        ring.append((float(x), y0))
    for y in np.arange(y0, y1, 1.0):
        ring.append((x1, float(y)))
    for x in np.arange(x1, x0, -1.0):
        ring.append((float(x), y1))
    for y in np.arange(y1, y0, -1.0):
        ring.append((x0, float(y)))
    return AssetPolygon(tuple(ring))


def _disc_depth(spec: GridSpec) -> np.ndarray:
    xc, yc = spec.cell_centers()
    cx, cy = _WATER_CENTER
    return np.where((xc - cx) ** 2 + (yc - cy) ** 2 <= _WATER_RADIUS ** 2, 1.0, 0.0)


def _barrier(terrain: np.ndarray, cols, rows) -> None:
    terrain[rows, cols] = 1.0


def builtin_scenario(index: int) -> Scenario:
    """One of the six bundled demonstration layouts.

    All share a 64 x 64 one-meter grid, a centered circular water column of
    one meter depth, frictionless ground, open (critical-depth) boundaries,
    one-meter barrier walls and 100 s of simulated time. They differ in
    barrier topology and asset placement: a gap to plug, a wide gap needing
    several walls, open fields to shield, or multiple assets to trade off.
    """
    if not 1 <= index <= FIXTURE_COUNT:
        raise ValueError(f"builtin scenario index must be in 1..{FIXTURE_COUNT}")
    spec = _FIXTURE_GRID
    terrain = np.zeros((spec.n_rows, spec.n_cols))
    if index == 1:
        # barrier east of the water with one 8 m gap; asset behind the gap
        _barrier(terrain, 44, slice(10, 28))
        _barrier(terrain, 44, slice(36, 54))
        assets = (_rect_asset(50.0, 29.0, 56.0, 35.0),)
    elif index == 2:
        # same barrier line with a 12 m gap, wider than a single wall
        _barrier(terrain, 44, slice(10, 26))
        _barrier(terrain, 44, slice(38, 54))
        assets = (_rect_asset(50.0, 29.0, 56.0, 35.0),)
    elif index == 3:
        # open field, asset southeast of the water
        assets = (_rect_asset(46.0, 12.0, 52.0, 18.0),)
    elif index == 4:
        # L-shaped shelter with an open corner to the northeast
        _barrier(terrain, 44, slice(20, 40))
        _barrier(terrain, slice(48, 64), 44)
        assets = (_rect_asset(52.0, 48.0, 58.0, 54.0),)
    elif index == 5:
        # two assets on opposite sides of the water
        assets = (
            _rect_asset(8.0, 29.0, 14.0, 35.0),
            _rect_asset(50.0, 29.0, 56.0, 35.0),
        )
    else:
        # northern barrier with an offset gap; asset behind the eastern arm
        _barrier(terrain, slice(4, 36), 44)
        _barrier(terrain, slice(44, 60), 44)
        assets = (_rect_asset(40.0, 48.0, 48.0, 56.0),)
    return Scenario(
        terrain=ScalarField(spec, terrain),
        initial_depth=ScalarField(spec, _disc_depth(spec)),
        assets=assets,
        sources=SourceTerms(),
        boundary=Boundary.CRITICAL_DEPTH,
        duration=100.0,
        report_interval=1.0,
        wall_spec=_WALL_SPEC,
        name=f"builtin-{index}",
    )


def with_terrain(scenario: Scenario, terrain: ScalarField) -> Scenario:
    """Copy of the scenario over different terrain (same grid)."""
    return replace(scenario, terrain=terrain)


# ---------------------------------------------------------------------------
# Result writers
# ---------------------------------------------------------------------------

def _atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_convergence_csv(result, path) -> None:
    """Per-evaluation log: 1-based index, candidate objective, best so far, feasibility."""
    rows = []
    for entry in result.history:
        rows.append(
            (
                str(entry.index),
                repr(float(entry.objective.total)),
                repr(float(entry.best_total)),
                "1" if entry.objective.feasible else "0",
            )
        )
    _atomic_write(path, _csv_text(("evaluation", "objective", "best_objective", "feasible"), rows))


def write_region_exteriors(region: Region, path) -> None:
    """Region boundary polylines as (polyline id, vertex index, x, y) rows."""
    rows = []
    for pid, line in enumerate(region.exterior_polylines(), start=1):
        for vid, (x, y) in enumerate(line, start=1):
            rows.append((str(pid), str(vid), repr(float(x)), repr(float(y))))
    _atomic_write(path, _csv_text(("polyline", "vertex", "x", "y"), rows))


def write_pathlines_csv(pathlines, path) -> None:
    """Traced points as (seed index, point index, x, y) rows."""
    rows = []
    for sid, line in enumerate(pathlines, start=1):
        for pid, (x, y) in enumerate(line.points, start=1):
            rows.append((str(sid), str(pid), repr(float(x)), repr(float(y))))
    _atomic_write(path, _csv_text(("seed", "point", "x", "y"), rows))


def write_configuration_csv(config: Configuration, path) -> None:
    """Wall placements as (wall, center_y, center_x, angle) rows."""
    rows = []
    for wid, wall in enumerate(config.walls, start=1):
        rows.append(
            (
                str(wid),
                repr(float(wall.center_y)),
                repr(float(wall.center_x)),
                repr(float(wall.angle)),
            )
        )
    _atomic_write(path, _csv_text(("wall", "center_y", "center_x", "angle"), rows))


def write_snapshot_summary(record, path) -> None:
    """Per-snapshot totals: time, water volume, peak depth at that time."""
    rows = []
    for snap in record.snapshots:
        rows.append(
            (
                repr(float(snap.time)),
                repr(float(snap.volume())),
                repr(float(snap.h.max())),
            )
        )
    _atomic_write(path, _csv_text(("time", "volume", "max_depth"), rows))
