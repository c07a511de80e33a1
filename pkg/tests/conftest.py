import numpy as np
import pytest

from floodopt import (
    AssetPolygon,
    Boundary,
    GridSpec,
    ScalarField,
    Scenario,
    SourceTerms,
    WallSpec,
)


def rect_ring(x0, y0, x1, y1, step=1.0):
    """Densified rectangle exterior, counterclockwise, one vertex per step."""
    ring = []
    for x in np.arange(x0, x1, step):
        ring.append((float(x), float(y0)))
    for y in np.arange(y0, y1, step):
        ring.append((float(x1), float(y)))
    for x in np.arange(x1, x0, -step):
        ring.append((float(x), float(y1)))
    for y in np.arange(y1, y0, -step):
        ring.append((float(x0), float(y)))
    return tuple(ring)


@pytest.fixture(scope="session")
def mini_scenario():
    """Small, fast scenario: 32x32 grid, water disc, gap barrier, one asset.

    Mirrors the built-in layouts at a quarter of the cost; a simulation takes
    a few hundredths of a second.
    """
    spec = GridSpec(32, 32, 1.0)
    terrain = np.zeros((32, 32))
    terrain[4:13, 22] = 1.0
    terrain[19:28, 22] = 1.0
    xc, yc = spec.cell_centers()
    depth = np.where((xc - 12.0) ** 2 + (yc - 16.0) ** 2 <= 5.0 ** 2, 1.0, 0.0)
    return Scenario(
        terrain=ScalarField(spec, terrain),
        initial_depth=ScalarField(spec, depth),
        assets=(AssetPolygon(rect_ring(26.0, 13.0, 30.0, 19.0)),),
        sources=SourceTerms(),
        boundary=Boundary.CRITICAL_DEPTH,
        duration=30.0,
        report_interval=1.0,
        wall_spec=WallSpec(length=8.0, width=2.5, height=1.0),
        name="mini",
    )
