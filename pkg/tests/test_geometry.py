import math
from fractions import Fraction

import numpy as np
import pytest

from deployopt.errors import ValidationError
from deployopt.geometry import (
    Point2,
    Polygon,
    Rect,
    TerrainGrid,
    Workspace2D,
    point_in_free_space,
    segment_intersects_obstacles,
)


def test_point_requires_finite_coordinates():
    with pytest.raises(ValidationError):
        Point2(float("nan"), 0.0)
    with pytest.raises(ValidationError):
        Point2(0.0, float("inf"))


def test_polygon_reorients_clockwise_input():
    def area2(poly):
        s = 0.0
        vs = poly.vertices
        for i in range(len(vs)):
            a, b = vs[i], vs[(i + 1) % len(vs)]
            s += a.x * b.y - b.x * a.y
        return s

    cw = Polygon((Point2(0, 0), Point2(0, 4), Point2(4, 4), Point2(4, 0)))
    ccw = Polygon((Point2(0, 0), Point2(4, 0), Point2(4, 4), Point2(0, 4)))
    assert area2(cw) > 0
    assert area2(ccw) > 0
    assert all(cw.convex_vertex_mask())


@pytest.mark.parametrize(
    "verts",
    [
        [(0, 0), (1, 0)],  # too few
        [(0, 0), (1, 0), (1, 0), (0, 1)],  # repeated consecutive vertex
        [(0, 0), (2, 0), (4, 0), (4, 4)],  # collinear triple
        [(0, 0), (4, 4), (4, 0), (0, 4)],  # bowtie self-intersection
    ],
)
def test_polygon_rejects_degenerate(verts):
    with pytest.raises(ValidationError):
        Polygon(tuple(Point2(float(x), float(y)) for x, y in verts))


def test_segment_no_obstacles(empty_workspace):
    assert segment_intersects_obstacles(Point2(0, 0), Point2(10, 0), empty_workspace) is False


def test_segment_through_interior(square_workspace):
    assert segment_intersects_obstacles(Point2(0, 6), Point2(12, 6), square_workspace) is True


def test_segment_collinear_on_edge(square_workspace):
    # Grazing along the bottom edge of the square: free.
    assert segment_intersects_obstacles(Point2(3, 4), Point2(9, 4), square_workspace) is False


def test_segment_diagonal_of_square(square_workspace):
    assert segment_intersects_obstacles(Point2(4, 4), Point2(8, 8), square_workspace) is True


def test_obstacle_edges_are_free(square_workspace, enclosure_workspace):
    for ws in (square_workspace, enclosure_workspace):
        for poly in ws.obstacles:
            for u, v in poly.edges():
                assert segment_intersects_obstacles(u, v, ws) is False


def test_segment_symmetry(square_workspace):
    rng = np.random.default_rng(5)
    for _ in range(200):
        a = Point2(*rng.uniform(0, 12, 2))
        b = Point2(*rng.uniform(0, 12, 2))
        assert segment_intersects_obstacles(a, b, square_workspace) == segment_intersects_obstacles(
            b, a, square_workspace
        )


# --- exact rational-arithmetic reference predicate -------------------------

def _exact_strictly_inside(m, verts):
    for i in range(len(verts)):
        p, q = verts[i], verts[(i + 1) % len(verts)]
        cross = (q[0] - p[0]) * (m[1] - p[1]) - (q[1] - p[1]) * (m[0] - p[0])
        if cross == 0 and min(p[0], q[0]) <= m[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= m[1] <= max(p[1], q[1]):
            return False  # exactly on the boundary
    inside = False
    for i in range(len(verts)):
        p, q = verts[i], verts[(i + 1) % len(verts)]
        if (p[1] > m[1]) != (q[1] > m[1]):
            xcross = p[0] + (m[1] - p[1]) * (q[0] - p[0]) / (q[1] - p[1])
            if m[0] < xcross:
                inside = not inside
    return inside


def _exact_segment_blocked(a, b, polygons):
    """Exact-arithmetic twin of the interval-splitting intersection test."""
    a = (Fraction(a[0]), Fraction(a[1]))
    b = (Fraction(b[0]), Fraction(b[1]))
    r = (b[0] - a[0], b[1] - a[1])
    rr = r[0] * r[0] + r[1] * r[1]
    for verts in polygons:
        verts = [(Fraction(x), Fraction(y)) for x, y in verts]
        if rr == 0:
            if _exact_strictly_inside(a, verts):
                return True
            continue
        ts = [Fraction(0), Fraction(1)]
        for i in range(len(verts)):
            p, q = verts[i], verts[(i + 1) % len(verts)]
            s = (q[0] - p[0], q[1] - p[1])
            den = r[0] * s[1] - r[1] * s[0]
            w = (p[0] - a[0], p[1] - a[1])
            if den != 0:
                t = (w[0] * s[1] - w[1] * s[0]) / den
                u = (w[0] * r[1] - w[1] * r[0]) / den
                if 0 <= t <= 1 and 0 <= u <= 1:
                    ts.append(t)
            elif w[0] * r[1] - w[1] * r[0] == 0:
                tp = (w[0] * r[0] + w[1] * r[1]) / rr
                tq = ((q[0] - a[0]) * r[0] + (q[1] - a[1]) * r[1]) / rr
                lo, hi = max(min(tp, tq), Fraction(0)), min(max(tp, tq), Fraction(1))
                if lo <= hi:
                    ts.extend((lo, hi))
        ts = sorted(set(ts))
        for t0, t1 in zip(ts, ts[1:]):
            tm = (t0 + t1) / 2
            m = (a[0] + tm * r[0], a[1] + tm * r[1])
            if _exact_strictly_inside(m, verts):
                return True
    return False


EXACT_CASES = [
    ((3, 4), (9, 4), False),     # collinear along the bottom edge
    ((4, 4), (8, 8), True),      # diagonal through the interior
    ((0, 6), (12, 6), True),     # transversal crossing
    ((0, 0), (12, 0), False),    # fully outside
    ((0, 0), (8, 8), True),      # enters through the corner, exits the far one
    ((0, 8), (8, 0), False),     # touches only the corner (4, 4)... see oracle
    ((2, 2), (6, 2), False),     # below the square
    ((4, 0), (4, 12), False),    # collinear with the left edge extended
    ((5, 5), (7, 7), True),      # entirely interior
    ((0, 4), (12, 4), False),    # grazing along the full bottom edge line
]


def test_segment_matches_exact_rational_predicate(square_workspace):
    square = [[(4, 4), (8, 4), (8, 8), (4, 8)]]
    for a, b, _ in EXACT_CASES:
        exact = _exact_segment_blocked(a, b, square)
        approx = segment_intersects_obstacles(
            Point2(float(a[0]), float(a[1])), Point2(float(b[0]), float(b[1])), square_workspace
        )
        assert approx == exact, f"mismatch on {a}->{b}: impl={approx} exact={exact}"


def test_exact_cases_expected_values(square_workspace):
    for a, b, expected in EXACT_CASES:
        got = segment_intersects_obstacles(
            Point2(float(a[0]), float(a[1])), Point2(float(b[0]), float(b[1])), square_workspace
        )
        assert got == expected, f"{a}->{b}"


# --- free-space predicate ---------------------------------------------------

def test_point_in_free_space_examples(square_workspace):
    assert point_in_free_space(Point2(6, 6), square_workspace) is False  # obstacle center
    assert point_in_free_space(Point2(4, 4), square_workspace) is True   # vertex is free
    assert point_in_free_space(Point2(-1, 0), square_workspace) is False  # out of bounds
    assert point_in_free_space(Point2(6, 4), square_workspace) is True   # boundary edge


def _ray_cast_inside(x, y, verts):
    inside = False
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            if x < x1 + (y - y1) / (y2 - y1) * (x2 - x1):
                inside = not inside
    return inside


def test_point_free_matches_ray_casting_oracle(square_workspace, enclosure_workspace):
    rng = np.random.default_rng(17)
    for ws in (square_workspace, enclosure_workspace):
        verts_list = [[(v.x, v.y) for v in poly.vertices] for poly in ws.obstacles]
        checked = 0
        while checked < 1000:
            x, y = rng.uniform(0.0, 12.0, 2)
            near_boundary = any(
                abs((q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]))
                / max(math.hypot(q[0] - p[0], q[1] - p[1]), 1e-12)
                < 1e-6
                for verts in verts_list
                for p, q in zip(verts, verts[1:] + verts[:1])
            )
            if near_boundary:
                continue
            oracle_free = not any(_ray_cast_inside(x, y, verts) for verts in verts_list)
            assert point_in_free_space(Point2(x, y), ws) == oracle_free
            checked += 1


# --- workspace validation ----------------------------------------------------

def test_workspace_rejects_overlapping_obstacles():
    a = Polygon((Point2(0, 0), Point2(4, 0), Point2(4, 4), Point2(0, 4)))
    b = Polygon((Point2(2, 2), Point2(6, 2), Point2(6, 6), Point2(2, 6)))
    with pytest.raises(ValidationError):
        Workspace2D(Rect(0, 0, 10, 10), (a, b))


def test_workspace_rejects_nested_obstacles():
    outer = Polygon((Point2(0, 0), Point2(8, 0), Point2(8, 8), Point2(0, 8)))
    inner = Polygon((Point2(3, 3), Point2(5, 3), Point2(5, 5), Point2(3, 5)))
    with pytest.raises(ValidationError):
        Workspace2D(Rect(0, 0, 10, 10), (outer, inner))


def test_workspace_allows_touching_obstacles():
    a = Polygon((Point2(0, 0), Point2(4, 0), Point2(4, 4), Point2(0, 4)))
    b = Polygon((Point2(4, 0), Point2(8, 0), Point2(8, 4), Point2(4, 4)))
    ws = Workspace2D(Rect(0, 0, 10, 10), (a, b))
    assert len(ws.obstacles) == 2


def test_workspace_rejects_vertex_outside_bounds():
    poly = Polygon((Point2(0, 0), Point2(4, 0), Point2(4, 4), Point2(0, 4)))
    with pytest.raises(ValidationError):
        Workspace2D(Rect(1, 1, 10, 10), (poly,))


def test_rect_validation():
    with pytest.raises(ValidationError):
        Rect(0, 0, 0, 10)
    assert Rect(0, 0, 3, 4).diagonal == 5.0


def test_terrain_grid_validation():
    with pytest.raises(ValidationError):
        TerrainGrid(Point2(0, 0), 1.0, np.zeros((1, 5)))
    with pytest.raises(ValidationError):
        TerrainGrid(Point2(0, 0), 0.0, np.zeros((5, 5)))
    with pytest.raises(ValidationError):
        TerrainGrid(Point2(0, 0), 1.0, np.full((5, 5), np.nan))
    grid = TerrainGrid(Point2(1, 2), 0.5, np.zeros((5, 9)))
    fp = grid.footprint
    assert (fp.xmin, fp.ymin, fp.xmax, fp.ymax) == (1, 2, 5, 4)
    assert grid.contains(Point2(3, 3))
    assert not grid.contains(Point2(6, 3))
