"""Geometric data model: points, polygonal obstacles, terrain grids, and the
collision primitives every distance metric builds on.

All types are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# Tolerance on cross-product signs for orientation predicates.  Scenario
# coordinates are user-supplied decimals at ~1e2 scale, so exact arithmetic
# is unnecessary; 1e-9 sits far above float64 noise at those magnitudes.
EPS_GEOM = 1e-9

# Merge tolerance for intersection parameters along a unit-parameterized
# segment.
_EPS_PARAM = 1e-12


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def orientation(o: Point2, a: Point2, b: Point2) -> int:
    """Sign of the cross product (a-o) x (b-o): +1 left turn, -1 right, 0 collinear."""
    v = (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    if v > EPS_GEOM:
        return 1
    if v < -EPS_GEOM:
        return -1
    return 0


def _point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    ax, ay = b.x - a.x, b.y - a.y
    px, py = p.x - a.x, p.y - a.y
    denom = ax * ax + ay * ay
    if denom == 0.0:
        return math.hypot(px, py)
    t = (px * ax + py * ay) / denom
    t = min(1.0, max(0.0, t))
    return math.hypot(px - t * ax, py - t * ay)


def _segments_touch(p1: Point2, q1: Point2, p2: Point2, q2: Point2) -> bool:
    """True if closed segments [p1,q1] and [p2,q2] share any point (within tolerance)."""
    o1 = orientation(p1, q1, p2)
    o2 = orientation(p1, q1, q2)
    o3 = orientation(p2, q2, p1)
    o4 = orientation(p2, q2, q1)
    if o1 != o2 and o3 != o4:
        return True
    # Collinear / endpoint contact cases.
    for p, a, b in ((p2, p1, q1), (q2, p1, q1), (p1, p2, q2), (q1, p2, q2)):
        if _point_segment_distance(p, a, b) <= EPS_GEOM:
            return True
    return False


@dataclass(frozen=True)
class Polygon:
    """Simple polygon stored counter-clockwise; CW input is reoriented.

    Rejects: fewer than 3 vertices, repeated consecutive vertices, collinear
    triples (zero-area ears), and self-intersections.
    """

    vertices: tuple[Point2, ...]

    def __post_init__(self):
        verts = tuple(self.vertices)
        if len(verts) < 3:
            raise ValidationError(f"polygon needs >= 3 vertices, got {len(verts)}")
        n = len(verts)
        for i in range(n):
            if verts[i].distance_to(verts[(i + 1) % n]) <= EPS_GEOM:
                raise ValidationError(f"polygon has repeated consecutive vertices at index {i}")
        area2 = _signed_area2(verts)
        if area2 < 0:
            verts = tuple(reversed(verts))
        for i in range(n):
            if orientation(verts[i - 1], verts[i], verts[(i + 1) % n]) == 0:
                raise ValidationError(f"polygon has collinear vertex triple at index {i}")
        _check_simple(verts)
        object.__setattr__(self, "vertices", verts)

    def edges(self) -> list[tuple[Point2, Point2]]:
        n = len(self.vertices)
        return [(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]

    def convex_vertex_mask(self) -> list[bool]:
        """Per-vertex flag: interior angle < pi (left turn in CCW order)."""
        n = len(self.vertices)
        return [
            orientation(self.vertices[i - 1], self.vertices[i], self.vertices[(i + 1) % n]) > 0
            for i in range(n)
        ]

    def contains_strict(self, p: Point2) -> bool:
        """True iff p lies strictly inside; boundary points are outside."""
        for a, b in self.edges():
            if _point_segment_distance(p, a, b) <= EPS_GEOM:
                return False
        return _even_odd_inside(self.vertices, p)

    def on_boundary(self, p: Point2) -> bool:
        return any(_point_segment_distance(p, a, b) <= EPS_GEOM for a, b in self.edges())

    def interior_point(self) -> Point2:
        """A representative point strictly inside (centroid of a valid ear)."""
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            a, b, c = verts[i - 1], verts[i], verts[(i + 1) % n]
            if orientation(a, b, c) <= 0:
                continue
            m = Point2((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
            if self.contains_strict(m):
                return m
        raise ValidationError("polygon has no valid interior ear")


def _signed_area2(verts: tuple[Point2, ...]) -> float:
    s = 0.0
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        s += a.x * b.y - b.x * a.y
    return s


def _check_simple(verts: tuple[Point2, ...]) -> None:
    n = len(verts)
    for i in range(n):
        a1, b1 = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # adjacent edges share a vertex by construction
            a2, b2 = verts[j], verts[(j + 1) % n]
            if _segments_touch(a1, b1, a2, b2):
                raise ValidationError(f"polygon self-intersects (edges {i} and {j})")


def _even_odd_inside(verts: tuple[Point2, ...], p: Point2) -> bool:
    inside = False
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        if (a.y > p.y) != (b.y > p.y):
            x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x)
            if p.x < x_cross:
                inside = not inside
    return inside


@dataclass(frozen=True)
class Rect:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("bounds must be finite")
        if self.xmax <= self.xmin or self.ymax <= self.ymin:
            raise ValidationError("bounds must have positive extent")

    def contains(self, p: Point2) -> bool:
        return self.xmin <= p.x <= self.xmax and self.ymin <= p.y <= self.ymax

    @property
    def diagonal(self) -> float:
        return math.hypot(self.xmax - self.xmin, self.ymax - self.ymin)


@dataclass(frozen=True)
class Workspace2D:
    bounds: Rect
    obstacles: tuple[Polygon, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        for k, poly in enumerate(self.obstacles):
            for v in poly.vertices:
                if not self.bounds.contains(v):
                    raise ValidationError(f"obstacle {k} has vertex outside bounds: ({v.x}, {v.y})")
        for i in range(len(self.obstacles)):
            for j in range(i + 1, len(self.obstacles)):
                if _interiors_overlap(self.obstacles[i], self.obstacles[j]):
                    raise ValidationError(f"obstacles {i} and {j} have overlapping interiors")


def _interiors_overlap(a: Polygon, b: Polygon) -> bool:
    for p1, q1 in a.edges():
        for p2, q2 in b.edges():
            o1 = orientation(p1, q1, p2)
            o2 = orientation(p1, q1, q2)
            o3 = orientation(p2, q2, p1)
            o4 = orientation(p2, q2, q1)
            if o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4):
                return True  # proper edge crossing
    if any(b.contains_strict(v) for v in a.vertices):
        return True
    if any(a.contains_strict(v) for v in b.vertices):
        return True
    for p, q in a.edges():
        if b.contains_strict(Point2(0.5 * (p.x + q.x), 0.5 * (p.y + q.y))):
            return True
    for p, q in b.edges():
        if a.contains_strict(Point2(0.5 * (p.x + q.x), 0.5 * (p.y + q.y))):
            return True
    # Nested or coincident polygons with no vertex strictly inside the other.
    return b.contains_strict(a.interior_point()) or a.contains_strict(b.interior_point())


def _segment_polygon_params(a: Point2, b: Point2, poly: Polygon) -> list[float]:
    """Parameters t in [0,1] where segment a+t(b-a) meets the polygon boundary."""
    rx, ry = b.x - a.x, b.y - a.y
    rr = rx * rx + ry * ry
    params: list[float] = []
    for p, q in poly.edges():
        sx, sy = q.x - p.x, q.y - p.y
        den = rx * sy - ry * sx
        wx, wy = p.x - a.x, p.y - a.y
        if abs(den) > EPS_GEOM:
            t = (wx * sy - wy * sx) / den
            u = (wx * ry - wy * rx) / den
            if -_EPS_PARAM <= t <= 1.0 + _EPS_PARAM and -_EPS_PARAM <= u <= 1.0 + _EPS_PARAM:
                params.append(min(1.0, max(0.0, t)))
        elif abs(wx * ry - wy * rx) <= EPS_GEOM and rr > 0.0:
            # Collinear overlap: record both ends of the shared stretch.
            tp = (wx * rx + wy * ry) / rr
            tq = ((q.x - a.x) * rx + (q.y - a.y) * ry) / rr
            lo, hi = min(tp, tq), max(tp, tq)
            lo, hi = max(0.0, lo), min(1.0, hi)
            if lo <= hi:
                params.extend((lo, hi))
    return params


def _segment_enters_interior(a: Point2, b: Point2, poly: Polygon) -> bool:
    """True iff the open segment (a,b) passes through the polygon's interior.

    Splits the segment at every boundary contact and tests the midpoint of
    each piece for strict containment, so transversal crossings register and
    grazing contact along edges or vertices does not.
    """
    if a.distance_to(b) <= EPS_GEOM:
        return poly.contains_strict(a)
    ts = [0.0, 1.0]
    ts.extend(_segment_polygon_params(a, b, poly))
    ts.sort()
    prev = ts[0]
    for t in ts[1:]:
        if t - prev > _EPS_PARAM:
            tm = 0.5 * (prev + t)
            m = Point2(a.x + tm * (b.x - a.x), a.y + tm * (b.y - a.y))
            if poly.contains_strict(m):
                return True
        prev = t
    return False


def segment_intersects_obstacles(a: Point2, b: Point2, w: Workspace2D) -> bool:
    """True iff the open segment (a,b) penetrates any obstacle interior.

    Collinear contact with an obstacle edge is not an intersection: obstacle
    boundaries belong to the free workspace.
    """
    return any(_segment_enters_interior(a, b, poly) for poly in w.obstacles)


def point_in_free_space(p: Point2, w: Workspace2D) -> bool:
    """Inside the bounds and not strictly inside any obstacle; boundaries are free."""
    if not w.bounds.contains(p):
        return False
    return not any(poly.contains_strict(p) for poly in w.obstacles)


@dataclass(frozen=True)
class TerrainGrid:
    """Node-centered heightmap: node (r, c) sits at origin + (c, r) * cell_size."""

    origin: Point2
    cell_size: float
    heights: np.ndarray = field(repr=False, default=())

    def __post_init__(self):
        h = np.asarray(self.heights, dtype=float)
        if h.ndim != 2 or h.shape[0] < 2 or h.shape[1] < 2:
            raise ValidationError(f"terrain heights must be an RxC array with R,C >= 2, got shape {h.shape}")
        if not np.isfinite(h).all():
            raise ValidationError("terrain heights must be finite")
        if not (math.isfinite(self.cell_size) and self.cell_size > 0):
            raise ValidationError(f"terrain cell_size must be > 0, got {self.cell_size}")
        h.setflags(write=False)
        object.__setattr__(self, "heights", h)

    @property
    def shape(self) -> tuple[int, int]:
        return self.heights.shape

    @property
    def footprint(self) -> Rect:
        rows, cols = self.heights.shape
        return Rect(
            self.origin.x,
            self.origin.y,
            self.origin.x + (cols - 1) * self.cell_size,
            self.origin.y + (rows - 1) * self.cell_size,
        )

    def contains(self, p: Point2) -> bool:
        return self.footprint.contains(p)
