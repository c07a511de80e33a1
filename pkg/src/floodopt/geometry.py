"""Planar geometry: Delaunay triangulation, alpha shapes and triangle-set regions.

Regions are triangle soups with optional polygonal holes. They support the
queries the optimizer needs (membership, minimum distance, uniform sampling,
exterior polylines) without explicit boolean polygon arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay as _SciPyDelaunay
from scipy.spatial import QhullError


class SamplingError(RuntimeError):
    """Uniform sampling could not produce the requested points."""


@dataclass(frozen=True)
class Triangle:
    """Three vertices, possibly degenerate."""

    a: tuple[float, float]
    b: tuple[float, float]
    c: tuple[float, float]

    def vertices(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=np.float64)

    def area(self) -> float:
        """Area via Heron's formula from the edge lengths."""
        d_a = math.dist(self.a, self.b)
        d_b = math.dist(self.b, self.c)
        d_c = math.dist(self.c, self.a)
        s = 0.5 * (d_a + d_b + d_c)
        radicand = s * (s - d_a) * (s - d_b) * (s - d_c)
        return math.sqrt(radicand) if radicand > 0.0 else 0.0

    def circumradius(self) -> float:
        """Product of edges over 4 area; inf for degenerate triangles."""
        area = self.area()
        if area == 0.0:
            return math.inf
        d_a = math.dist(self.a, self.b)
        d_b = math.dist(self.b, self.c)
        d_c = math.dist(self.c, self.a)
        return d_a * d_b * d_c / (4.0 * area)


@dataclass(frozen=True)
class AssetPolygon:
    """A simple polygon to protect, given by its exterior vertex ring.

    The exterior vertices double as the seed points for pathline tracing, so
    fixture rectangles carry densified rings (about one vertex per meter).
    """

    exterior: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.exterior)
        if len(pts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if len(set(pts)) != len(pts):
            raise ValueError("polygon vertices must be distinct")
        object.__setattr__(self, "exterior", pts)
        if self.area() <= 0.0:
            raise ValueError("polygon must have positive area")

    def area(self) -> float:
        xs = np.array([p[0] for p in self.exterior])
        ys = np.array([p[1] for p in self.exterior])
        return 0.5 * abs(float(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1))))

    def contains(self, x: float, y: float, include_boundary: bool = True) -> bool:
        return _point_in_polygon(self.exterior, x, y, include_boundary)

    def cell_mask(self, grid) -> np.ndarray:
        """Boolean mask of grid cells whose center lies inside the polygon."""
        xc, yc = grid.cell_centers()
        mask = np.zeros(xc.shape, dtype=bool)
        xs = [p[0] for p in self.exterior]
        ys = [p[1] for p in self.exterior]
        i0 = max(0, int((min(xs) - grid.origin_x) / grid.cell_size) - 1)
        i1 = min(grid.n_cols, int((max(xs) - grid.origin_x) / grid.cell_size) + 2)
        j0 = max(0, int((min(ys) - grid.origin_y) / grid.cell_size) - 1)
        j1 = min(grid.n_rows, int((max(ys) - grid.origin_y) / grid.cell_size) + 2)
        for j in range(j0, j1):
            for i in range(i0, i1):
                mask[j, i] = self.contains(xc[j, i], yc[j, i])
        return mask


def _point_on_segment(px, py, ax, ay, bx, by, tol=1e-12) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    scale = max(abs(bx - ax), abs(by - ay), 1.0)
    if abs(cross) > tol * scale:
        return False
    dot = (px - ax) * (bx - ax) + (py - ay) * (by - ay)
    return -tol <= dot <= (bx - ax) ** 2 + (by - ay) ** 2 + tol


def _point_in_polygon(ring, x: float, y: float, include_boundary: bool) -> bool:
    """Ray casting with explicit boundary handling."""
    n = len(ring)
    for k in range(n):
        ax, ay = ring[k]
        bx, by = ring[(k + 1) % n]
        if _point_on_segment(x, y, ax, ay, bx, by):
            return include_boundary
    inside = False
    for k in range(n):
        ax, ay = ring[k]
        bx, by = ring[(k + 1) % n]
        if (ay > y) != (by > y):
            x_cross = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < x_cross:
                inside = not inside
    return inside


def _segment_distance(px, py, a, b) -> float:
    ax, ay = a
    bx, by = b
    dx = bx - ax
    dy = by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / seg2
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def delaunay(points) -> list[Triangle]:
    """Delaunay triangulation of a 2D point set.

    Satisfies the empty-circumcircle property up to co-circular ties and
    covers the convex hull. Collinear input yields an empty triangulation.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError("need at least 3 planar points")
    try:
        tri = _SciPyDelaunay(pts)
    except QhullError:
        return []
    out = []
    for ia, ib, ic in tri.simplices:
        out.append(Triangle(tuple(pts[ia]), tuple(pts[ib]), tuple(pts[ic])))
    return out


class Region:
    """Point set represented as triangles minus polygonal holes.

    Membership is closed on triangle boundaries and open on hole interiors:
    a point counts as inside when some triangle contains it and no hole
    strictly contains it.
    """

    def __init__(self, triangles=(), holes=()):
        self.triangles: tuple[Triangle, ...] = tuple(triangles)
        self.holes: tuple[AssetPolygon, ...] = tuple(holes)
        if self.triangles:
            self._verts = np.stack([t.vertices() for t in self.triangles])
        else:
            self._verts = np.zeros((0, 3, 2))
        ab = self._verts[:, 1] - self._verts[:, 0]
        ac = self._verts[:, 2] - self._verts[:, 0]
        self._double_areas = ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0]

    @property
    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    def triangle_area(self) -> float:
        """Total triangle area, counting overlaps multiply."""
        return 0.5 * float(np.abs(self._double_areas).sum())

    def _in_triangles(self, x: float, y: float) -> bool:
        if self.is_empty:
            return False
        a = self._verts[:, 0]
        b = self._verts[:, 1]
        c = self._verts[:, 2]
        d1 = (b[:, 0] - a[:, 0]) * (y - a[:, 1]) - (b[:, 1] - a[:, 1]) * (x - a[:, 0])
        d2 = (c[:, 0] - b[:, 0]) * (y - b[:, 1]) - (c[:, 1] - b[:, 1]) * (x - b[:, 0])
        d3 = (a[:, 0] - c[:, 0]) * (y - c[:, 1]) - (a[:, 1] - c[:, 1]) * (x - c[:, 0])
        tol = 1e-12
        neg = (d1 < -tol) | (d2 < -tol) | (d3 < -tol)
        pos = (d1 > tol) | (d2 > tol) | (d3 > tol)
        hit = ~(neg & pos) & (np.abs(self._double_areas) > 0.0)
        return bool(hit.any())

    def _in_hole(self, x: float, y: float) -> bool:
        return any(h.contains(x, y, include_boundary=False) for h in self.holes)

    def contains(self, x: float, y: float) -> bool:
        return self._in_triangles(x, y) and not self._in_hole(x, y)

    def distance(self, x: float, y: float) -> float:
        """Distance to the nearest region point; 0 iff contained, inf if empty."""
        if self.is_empty:
            return math.inf
        if self._in_triangles(x, y):
            blocking = [h for h in self.holes if h.contains(x, y, include_boundary=False)]
            if not blocking:
                return 0.0
            # nearest escape from the holes covering this point
            return min(
                _segment_distance(x, y, h.exterior[k], h.exterior[(k + 1) % len(h.exterior)])
                for h in blocking
                for k in range(len(h.exterior))
            )
        best = math.inf
        for t in self.triangles:
            for a, b in ((t.a, t.b), (t.b, t.c), (t.c, t.a)):
                d = _segment_distance(x, y, a, b)
                if d < best:
                    best = d
        return best

    def sample_uniform(self, rng: np.random.Generator, count: int) -> list[tuple[float, float]]:
        """count i.i.d. uniform points over the hole-adjusted region."""
        areas = 0.5 * np.abs(self._double_areas)
        total = float(areas.sum())
        if total <= 0.0:
            raise SamplingError("region has no positive-area triangles")
        cum = np.cumsum(areas) / total
        out: list[tuple[float, float]] = []
        attempts = 0
        budget = max(1000, 1000 * count)
        while len(out) < count:
            attempts += 1
            if attempts > budget:
                raise SamplingError(f"rejection budget exhausted after {attempts} draws")
            k = int(np.searchsorted(cum, rng.random()))
            a, b, c = self._verts[k]
            u = rng.random()
            v = rng.random()
            if u + v > 1.0:
                u, v = 1.0 - u, 1.0 - v
            x = a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0])
            y = a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1])
            if self._in_hole(x, y):
                continue
            out.append((x, y))
        return out

    def exterior_polylines(self) -> list[list[tuple[float, float]]]:
        """Boundary polylines: triangle edges used exactly once, plus hole rings."""
        counts: dict[tuple, int] = {}
        for t in self.triangles:
            for a, b in ((t.a, t.b), (t.b, t.c), (t.c, t.a)):
                key = (a, b) if a <= b else (b, a)
                counts[key] = counts.get(key, 0) + 1
        boundary = [key for key, n in counts.items() if n == 1]
        adjacency: dict[tuple, list[tuple]] = {}
        for a, b in boundary:
            adjacency.setdefault(a, []).append(b)
            adjacency.setdefault(b, []).append(a)
        unused = {edge: True for edge in boundary}
        lines: list[list[tuple[float, float]]] = []
        for start_edge in boundary:
            if not unused[start_edge]:
                continue
            a, b = start_edge
            unused[start_edge] = False
            line = [a, b]
            current = b
            while True:
                nxt = None
                for cand in adjacency.get(current, ()):
                    key = (current, cand) if current <= cand else (cand, current)
                    if unused.get(key):
                        nxt = cand
                        unused[key] = False
                        break
                if nxt is None:
                    break
                line.append(nxt)
                current = nxt
                if current == line[0]:
                    break
            lines.append(line)
        for hole in self.holes:
            lines.append(list(hole.exterior) + [hole.exterior[0]])
        return lines


class AllPlaneRegion(Region):
    """The whole plane: contains every point at distance zero."""

    def __init__(self):
        super().__init__()

    def contains(self, x: float, y: float) -> bool:
        return True

    def distance(self, x: float, y: float) -> float:
        return 0.0

    def sample_uniform(self, rng, count):
        raise SamplingError("cannot sample uniformly from the whole plane")

    def exterior_polylines(self):
        return []


ALL_PLANE = AllPlaneRegion()


def alpha_shape(points, alpha: float) -> Region:
    """Delaunay triangles with positive area and circumradius below alpha.

    Degenerate (zero-area) triangles are skipped. Fewer than 3 points, or a
    fully collinear set, yields the empty region.
    """
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or len(pts) < 3:
        return Region()
    kept = []
    for tri in delaunay(pts):
        area = tri.area()
        if area == 0.0:
            continue
        if tri.circumradius() < alpha:
            kept.append(tri)
    return Region(kept)


def region_union(a: Region, b: Region) -> Region:
    """Membership OR of two regions: concatenated triangles and holes."""
    if isinstance(a, AllPlaneRegion) or isinstance(b, AllPlaneRegion):
        return ALL_PLANE
    return Region(a.triangles + b.triangles, a.holes + b.holes)


def region_subtract_assets(region: Region, assets) -> Region:
    """Exclude the strict interiors of the asset polygons from the region."""
    if isinstance(region, AllPlaneRegion):
        raise ValueError("cannot subtract from the whole plane")
    return Region(region.triangles, region.holes + tuple(assets))


def region_contains(region: Region, point) -> bool:
    return region.contains(point[0], point[1])


def region_distance(region: Region, point) -> float:
    return region.distance(point[0], point[1])
