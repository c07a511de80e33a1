"""Acceptance suite: one test per criterion, each printing a PASS line.

Criteria 4 through 6 run real optimization campaigns and dominate the
runtime (roughly an hour on two cores); everything else finishes in
seconds. Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import csv
import math
import statistics

import numpy as np
import pytest

from floodopt import (
    Boundary,
    DEConfig,
    GridSpec,
    Mode,
    PathlineConfig,
    ScalarField,
    SearchBudget,
    SourceTerms,
    alpha_shape,
    builtin_scenario,
    compute_pathline,
    delaunay,
    load_raster,
    load_scenario,
    save_scenario,
    simulate,
    solve_ofmp,
    solve_sequential,
    write_raster,
)
from floodopt.cli import main as cli_main
from floodopt.geometry import AssetPolygon, region_subtract_assets
from tests.test_pathline import steady_record

WORKERS = 2
G = 9.81


def unmitigated(scenario, duration=None):
    return simulate(
        scenario.terrain,
        ScalarField.zeros(scenario.grid),
        scenario.initial_depth,
        scenario.sources,
        scenario.boundary,
        duration or scenario.duration,
        scenario.report_interval,
    )


def test_criterion_1_solver_physics():
    # lake at rest over stepped submerged bathymetry: no spurious currents
    spec = GridSpec(32, 32, 1.0)
    bed = np.zeros((32, 32))
    bed[10:20, 8:25] = 0.4
    bed[14:17, 12:15] = 0.7
    rec = simulate(
        ScalarField(spec, bed), ScalarField.zeros(spec), ScalarField(spec, 1.0 - bed),
        SourceTerms(), Boundary.CRITICAL_DEPTH, 10.0, 1.0,
    )
    worst = max(max(np.abs(s.hu).max(), np.abs(s.hv).max()) for s in rec.snapshots)
    assert worst <= 1e-10, f"lake-at-rest discharge {worst:.2e}"

    # closed-domain mass conservation over 100 s
    spec64 = GridSpec(64, 64, 1.0)
    xc, yc = spec64.cell_centers()
    disc = ScalarField(spec64, np.where((xc - 32) ** 2 + (yc - 32) ** 2 <= 64.0, 1.0, 0.0))
    box = simulate(
        ScalarField.zeros(spec64), ScalarField.zeros(spec64), disc,
        SourceTerms(), Boundary.REFLECTIVE, 100.0, 1.0,
    )
    v0 = box.snapshots[0].volume()
    drift = max(abs(s.volume() - v0) for s in box.snapshots) / v0
    assert drift <= 1e-6, f"conservation drift {drift:.2e}"

    # positivity across every fixture run
    for index in range(1, 7):
        rec = unmitigated(builtin_scenario(index))
        assert min(s.h.min() for s in rec.snapshots) >= 0.0, f"negative depth in fixture {index}"

    # dry-bed dam break against the closed-form profile
    strip = GridSpec(400, 3, 1.0)
    sxc, _ = strip.cell_centers()
    init = ScalarField(strip, np.where(sxc < 200.0, 1.0, 0.0))
    rec = simulate(
        ScalarField.zeros(strip), ScalarField.zeros(strip), init,
        SourceTerms(), Boundary.REFLECTIVE, 20.0, 10.0,
    )
    c0 = math.sqrt(G)
    xi = (sxc[1] - 200.0) / 20.0
    exact = np.where(xi <= -c0, 1.0, np.where(xi >= 2 * c0, 0.0, (2 * c0 - xi) ** 2 / (9 * G)))
    l1 = np.abs(rec.snapshots[-1].h[1] - exact).sum() / exact.sum()
    assert l1 <= 0.05, f"dam-break L1 error {l1:.3%}"
    print(f"\nACCEPTANCE 1 (solver physics): PASS "
          f"[rest {worst:.1e}, drift {drift:.1e}, dam-break L1 {l1:.2%}]")


def test_criterion_2_geometry_oracles():
    rng = np.random.default_rng(2024)

    def circumcircle(a, b, c):
        ax, ay = a
        bx, by = b
        cx, cy = c
        d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
        uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
        return (ux, uy), math.hypot(ax - ux, ay - uy)

    # 20 random 50-point sets: no input point strictly inside a circumcircle
    for trial in range(20):
        pts = [tuple(p) for p in rng.uniform(0, 100, size=(50, 2))]
        for tri in delaunay(pts):
            center, radius = circumcircle(tri.a, tri.b, tri.c)
            for p in pts:
                assert math.dist(center, p) >= radius - 1e-9, f"set {trial}"

    # analytic circumradius boundary for the unit equilateral triangle
    equilateral = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0)]
    assert len(alpha_shape(equilateral, 1.0).triangles) == 1
    assert alpha_shape(equilateral, 0.5).is_empty

    # membership and distance against a brute-force oracle on 10^4 points
    cloud = [tuple(p) for p in rng.uniform(0, 20, size=(120, 2))]
    region = region_subtract_assets(
        alpha_shape(cloud, 4.0),
        [AssetPolygon(((4.0, 4.0), (9.0, 4.0), (9.0, 9.0), (4.0, 9.0)))],
    )
    tris = [(t.a, t.b, t.c) for t in region.triangles]

    def oracle_in_triangles(x, y):
        for a, b, c in tris:
            d1 = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0])
            d2 = (c[0] - b[0]) * (y - b[1]) - (c[1] - b[1]) * (x - b[0])
            d3 = (a[0] - c[0]) * (y - c[1]) - (a[1] - c[1]) * (x - c[0])
            if not ((d1 < 0 or d2 < 0 or d3 < 0) and (d1 > 0 or d2 > 0 or d3 > 0)):
                return True
        return False

    def oracle_in_hole(x, y):
        return 4.0 < x < 9.0 and 4.0 < y < 9.0

    def oracle_contains(x, y):
        return oracle_in_triangles(x, y) and not oracle_in_hole(x, y)

    def oracle_distance(x, y):
        in_tris = oracle_in_triangles(x, y)
        if in_tris and not oracle_in_hole(x, y):
            return 0.0
        if in_tris:
            ring = ((4.0, 4.0), (9.0, 4.0), (9.0, 9.0), (4.0, 9.0))
            return min(_segdist(x, y, ring[k], ring[(k + 1) % 4]) for k in range(4))
        best = math.inf
        for a, b, c in tris:
            for p, q in ((a, b), (b, c), (c, a)):
                best = min(best, _segdist(x, y, p, q))
        return best

    def _segdist(x, y, p, q):
        px, py = p
        qx, qy = q
        seg2 = (qx - px) ** 2 + (qy - py) ** 2
        if seg2 == 0:
            return math.hypot(x - px, y - py)
        t = max(0.0, min(1.0, ((x - px) * (qx - px) + (y - py) * (qy - py)) / seg2))
        return math.hypot(x - (px + t * (qx - px)), y - (py + t * (qy - py)))

    queries = rng.uniform(-2, 22, size=(10_000, 2))
    for x, y in queries:
        assert region.contains(x, y) == oracle_contains(x, y), (x, y)
        assert abs(region.distance(x, y) - oracle_distance(x, y)) <= 1e-9, (x, y)
    print("\nACCEPTANCE 2 (geometry oracles): PASS "
          f"[20 triangulations, {len(queries)} membership/distance queries]")


def test_criterion_3_pathlines():
    # zero field: the trace is the seed alone
    spec = GridSpec(16, 16, 1.0)
    rec = steady_record(spec, np.zeros((16, 16)), np.zeros((16, 16)), t_end=10.0)
    assert compute_pathline(rec, 8.5, 8.5).points == ((8.5, 8.5),)

    # uniform field: reverse trace collinear within 1e-6 m
    strip = GridSpec(400, 3, 1.0)
    rec = steady_record(
        strip, np.ones((3, 400)), np.zeros((3, 400)), dry_cell=(350, 1), wet_from=150.0, t_end=200.0
    )
    line = compute_pathline(rec, 350.5, 1.5)
    dev = max(abs(y - 1.5) for _, y in line.points)
    assert dev <= 1e-6, f"collinearity deviation {dev:.2e}"
    assert len(line.points) > 100

    # rotational field: saved points stay within 2% of the seed radius
    fine = GridSpec(128, 128, 0.5)
    xc, yc = fine.cell_centers()
    omega = 0.05
    rec = steady_record(
        fine, -omega * (yc - 32.0), omega * (xc - 32.0),
        dry_cell=(104, 64), wet_from=300.0, t_end=400.0,
    )
    config = PathlineConfig(l_max=40.0, alpha=5.0)
    circle = compute_pathline(rec, 52.25, 32.25, config)
    r0 = math.hypot(52.25 - 32.0, 32.25 - 32.0)
    worst_radius = max(abs(math.hypot(x - 32.0, y - 32.0) - r0) / r0 for x, y in circle.points)
    assert worst_radius <= 0.02, f"radius error {worst_radius:.3%}"

    # every saved point in the domain, arc length bounded by l_max plus a step
    drift_rec = steady_record(
        GridSpec(32, 32, 1.0), np.full((32, 32), 1.5), np.full((32, 32), -0.7),
        dry_cell=(28, 28), wet_from=150.0, t_end=200.0,
    )
    bounded = compute_pathline(drift_rec, 28.5, 28.5, PathlineConfig(l_max=12.0, alpha=5.0))
    arc = sum(math.dist(a, b) for a, b in zip(bounded.points, bounded.points[1:]))
    for p in bounded.points:
        assert drift_rec.spec.contains(*p)
    assert arc <= 12.0 + 1.0
    print(f"\nACCEPTANCE 3 (pathlines): PASS "
          f"[collinear {dev:.1e} m, radius {worst_radius:.2%}, arc {arc:.1f} <= 13]")


def test_criterion_4_optimization_behavior():
    from floodopt import flood_volume

    scenario = builtin_scenario(1)
    baseline = flood_volume(unmitigated(scenario).max_depth, scenario.assets)
    improved = 0
    for seed in range(10):
        res = solve_ofmp(
            scenario, 1, SearchBudget(max_evaluations=500), Mode.PATHLINE,
            DEConfig(rng_seed=seed), workers=WORKERS,
        )
        best = [e.best_total for e in res.history]
        assert all(b <= a for a, b in zip(best, best[1:])), f"seed {seed} best curve rose"
        feasible = sum(1 for e in res.history if e.objective.feasible)
        assert res.pde_solves == feasible + 1, (
            f"seed {seed}: {res.pde_solves} flow solves for {feasible} feasible evaluations"
        )
        if res.best_objective.feasible and res.best_objective.total < baseline:
            improved += 1
    assert improved >= 9, f"only {improved}/10 seeds improved on doing nothing"
    print(f"\nACCEPTANCE 4 (optimization behavior): PASS "
          f"[{improved}/10 seeds beat the baseline {baseline:.3f} m^3, audits clean]")


def test_criterion_5_mode_comparison():
    medians = {}
    for index in (1, 2):
        scenario = builtin_scenario(index)
        for mode in (Mode.PATHLINE, Mode.DIRECT):
            bests = []
            for seed in range(5):
                res = solve_ofmp(
                    scenario, 3, SearchBudget(max_evaluations=1500), mode,
                    DEConfig(rng_seed=seed), workers=WORKERS,
                )
                bests.append(res.best_objective.total)
            medians[(index, mode)] = statistics.median(bests)
    for index in (1, 2):
        assert medians[(index, Mode.PATHLINE)] <= medians[(index, Mode.DIRECT)], (
            f"fixture {index}: pathline median {medians[(index, Mode.PATHLINE)]:.4f} "
            f"> direct median {medians[(index, Mode.DIRECT)]:.4f}"
        )
    print("\nACCEPTANCE 5 (mode comparison): PASS [" + ", ".join(
        f"fixture {i}: pathline {medians[(i, Mode.PATHLINE)]:.3f} <= direct {medians[(i, Mode.DIRECT)]:.3f}"
        for i in (1, 2)
    ) + "]")


def test_criterion_6_sequential_properties():
    scenario = builtin_scenario(1)
    per_stage = 150
    three = solve_sequential(
        scenario, 3, SearchBudget(max_evaluations=3 * per_stage), Mode.PATHLINE,
        DEConfig(rng_seed=11), workers=WORKERS,
    )
    two = solve_sequential(
        scenario, 2, SearchBudget(max_evaluations=2 * per_stage), Mode.PATHLINE,
        DEConfig(rng_seed=11), workers=WORKERS,
    )
    stage_totals = [s.best_objective.total for s in three.stage_results]
    assert all(b <= a for a, b in zip(stage_totals, stage_totals[1:])), stage_totals
    assert three.best_config.walls[: len(two.best_config.walls)] == two.best_config.walls
    for stage in three.stage_results + two.stage_results:
        assert len(stage.restriction_trace) == 1, "restriction updated mid-stage"
    print(f"\nACCEPTANCE 6 (sequential): PASS [stage objectives {stage_totals}, prefix holds]")


def test_criterion_7_determinism(tmp_path):
    args = [
        "optimize", "--builtin", "1", "--mode", "pathline", "--walls", "1",
        "--seed", "123", "--max-evals", "60",
    ]
    outputs = []
    for tag, workers in (("a", 1), ("b", 8), ("c", 1)):
        out = tmp_path / tag
        assert cli_main(args + ["--workers", str(workers), "--out", str(out)]) == 0
        outputs.append((out / "convergence.csv").read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    print("\nACCEPTANCE 7 (determinism): PASS [byte-identical CSVs at workers 1 and 8]")


def test_criterion_8_io_round_trips(tmp_path):
    # raster round trip is bit exact
    spec = GridSpec(17, 13, 0.75, origin_x=-4.5, origin_y=9.25)
    rng = np.random.default_rng(31)
    field = ScalarField(spec, rng.uniform(-5, 5, (13, 17)))
    write_raster(field, tmp_path / "f.asc")
    assert np.array_equal(load_raster(tmp_path / "f.asc").values, field.values)
    assert load_raster(tmp_path / "f.asc").spec == spec

    # scenario round trip is bit exact on rasters and exact on metadata
    scenario = builtin_scenario(4)
    save_scenario(scenario, tmp_path / "s.yaml")
    loaded = load_scenario(tmp_path / "s.yaml")
    assert np.array_equal(loaded.terrain.values, scenario.terrain.values)
    assert np.array_equal(loaded.initial_depth.values, scenario.initial_depth.values)
    assert loaded.assets == scenario.assets
    assert (loaded.duration, loaded.report_interval) == (100.0, 1.0)
    assert loaded.wall_spec == scenario.wall_spec

    # every emitted convergence CSV keeps a non-increasing best column
    for seed, mode in ((5, "direct"), (6, "pathline")):
        out = tmp_path / f"run{seed}"
        assert cli_main(
            [
                "optimize", "--builtin", "2", "--mode", mode, "--walls", "1",
                "--seed", str(seed), "--max-evals", "50", "--workers", str(WORKERS),
                "--out", str(out),
            ]
        ) == 0
        with open(out / "convergence.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 50
        best = [float(r["best_objective"]) for r in rows]
        assert all(b <= a for a, b in zip(best, best[1:]))
    print("\nACCEPTANCE 8 (round trips): PASS [rasters and scenarios bit-exact, CSVs monotone]")
