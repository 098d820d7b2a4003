"""Exact shortest-path distances among polygonal obstacles via a visibility
roadmap over convex obstacle vertices plus per-query Dijkstra searches.

Shortest paths only turn at convex corners, so reflex vertices are excluded
from the node set. Query points are linked to visible nodes on the fly; the
stored roadmap never mutates, which keeps concurrent queries safe.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import UNREACHABLE, InvalidQuery
from .geometry import (
    Point2,
    Workspace2D,
    point_in_free_space,
    segment_intersects_obstacles,
)
from .metrics import DistanceMatrix


class VisibilityGraph:
    """Immutable roadmap: convex obstacle vertices joined by mutually visible
    straight edges, obstacle boundary edges included."""

    def __init__(self, workspace: Workspace2D, nodes: list[Point2], adjacency: list[list[tuple[int, float]]]):
        self.workspace = workspace
        self.nodes = tuple(nodes)
        self._adjacency = tuple(tuple(nbrs) for nbrs in adjacency)
        self._node_xy = np.array([[p.x, p.y] for p in nodes]).reshape(len(nodes), 2)
        self._all_pairs: np.ndarray | None = None
        self._parents: np.ndarray | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def neighbors(self, i: int) -> tuple[tuple[int, float], ...]:
        return self._adjacency[i]

    def edges(self) -> list[tuple[int, int, float]]:
        out = []
        for i, nbrs in enumerate(self._adjacency):
            for j, w in nbrs:
                if i < j:
                    out.append((i, j, w))
        return out

    def _ensure_all_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        if self._all_pairs is None:
            n = self.n_nodes
            dist = np.full((n, n), np.inf)
            parents = np.full((n, n), -1, dtype=int)
            for src in range(n):
                d, par = _dijkstra(self._adjacency, src)
                dist[src] = d
                parents[src] = par
            self._all_pairs = dist
            self._parents = parents
        return self._all_pairs, self._parents


def _dijkstra(adjacency, src: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(adjacency)
    dist = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=int)
    dist[src] = 0.0
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adjacency[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, parent


def _mutually_visible(a: Point2, b: Point2, w: Workspace2D, shared_obstacles=()) -> bool:
    if segment_intersects_obstacles(a, b, w):
        return False
    # Guard against through-polygon "visibility" between vertices of the same
    # obstacle: the chord midpoint must not be interior to it.
    mid = Point2(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
    return not any(poly.contains_strict(mid) for poly in shared_obstacles)


def build_visibility_graph(w: Workspace2D) -> VisibilityGraph:
    """Roadmap over the convex vertices of all obstacles."""
    nodes: list[Point2] = []
    node_obstacles: list[set[int]] = []
    index_by_xy: dict[tuple[float, float], int] = {}
    for k, poly in enumerate(w.obstacles):
        mask = poly.convex_vertex_mask()
        for v, convex in zip(poly.vertices, mask):
            if not convex:
                continue
            key = v.as_tuple()
            if key in index_by_xy:
                node_obstacles[index_by_xy[key]].add(k)
            else:
                index_by_xy[key] = len(nodes)
                nodes.append(v)
                node_obstacles.append({k})
    n = len(nodes)
    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            shared = node_obstacles[i] & node_obstacles[j]
            if _mutually_visible(nodes[i], nodes[j], w, [w.obstacles[k] for k in shared]):
                dist = nodes[i].distance_to(nodes[j])
                adjacency[i].append((j, dist))
                adjacency[j].append((i, dist))
    return VisibilityGraph(w, nodes, adjacency)


def _require_free(g: VisibilityGraph, p: Point2, label: str) -> None:
    if not point_in_free_space(p, g.workspace):
        raise InvalidQuery(f"{label} point ({p.x}, {p.y}) is not in the free workspace")


def _visible_node_distances(g: VisibilityGraph, p: Point2) -> np.ndarray:
    """|p - node| where the node is visible from p, inf elsewhere."""
    out = np.full(g.n_nodes, np.inf)
    for i, node in enumerate(g.nodes):
        if not segment_intersects_obstacles(p, node, g.workspace):
            out[i] = p.distance_to(node)
    return out


def query_distance(g: VisibilityGraph, a: Point2, b: Point2):
    """Exact free-space shortest-path length from a to b, or UNREACHABLE."""
    result = _query(g, a, b, want_path=False)
    return result if result is UNREACHABLE else result[0]


def query_path(g: VisibilityGraph, a: Point2, b: Point2):
    """Shortest obstacle-free polyline from a to b, or UNREACHABLE."""
    result = _query(g, a, b, want_path=True)
    return result if result is UNREACHABLE else result[1]


def query(g: VisibilityGraph, a: Point2, b: Point2):
    """Distance and polyline in one search: (length, path) or UNREACHABLE."""
    return _query(g, a, b, want_path=True)


def _query(g: VisibilityGraph, a: Point2, b: Point2, want_path: bool):
    _require_free(g, a, "query")
    _require_free(g, b, "query")
    if a.distance_to(b) == 0.0:
        return 0.0, [a]
    if not segment_intersects_obstacles(a, b, g.workspace):
        return a.distance_to(b), [a, b]
    if g.n_nodes == 0:
        return UNREACHABLE
    da = _visible_node_distances(g, a)
    db = _visible_node_distances(g, b)
    dist_nodes, parents = g._ensure_all_pairs()
    total = da[:, None] + dist_nodes + db[None, :]
    best = total.min()
    if not math.isfinite(best):
        return UNREACHABLE
    u, v = np.unravel_index(int(total.argmin()), total.shape)
    if not want_path:
        return float(best), None
    chain = [int(v)]
    while chain[-1] != u:
        chain.append(int(parents[u][chain[-1]]))
    node_path = [g.nodes[i] for i in reversed(chain)]
    return float(best), [a, *node_path, b]


def path_length(path: list[Point2]) -> float:
    return sum(path[i].distance_to(path[i + 1]) for i in range(len(path) - 1))


def site_target_matrix(
    g: VisibilityGraph,
    sites: list[Point2],
    targets: list[Point2],
    d_max: float | None = None,
    threads: int = 0,
) -> DistanceMatrix:
    """All site-to-target shortest-path distances; unreachable pairs are
    stored as the cap d_max (default: 10x the workspace diagonal)."""
    for p in sites:
        _require_free(g, p, "site")
    for p in targets:
        _require_free(g, p, "target")
    if d_max is None:
        d_max = 10.0 * g.workspace.bounds.diagonal
    ns, nt = len(sites), len(targets)
    dist_nodes, _ = g._ensure_all_pairs() if g.n_nodes else (np.zeros((0, 0)), None)
    target_vis = np.full((g.n_nodes, nt), np.inf)
    for j, t in enumerate(targets):
        target_vis[:, j] = _visible_node_distances(g, t)

    def site_row(i: int) -> np.ndarray:
        s = sites[i]
        row = np.empty(nt)
        for j, t in enumerate(targets):
            row[j] = s.distance_to(t) if not segment_intersects_obstacles(s, t, g.workspace) else np.inf
        if g.n_nodes:
            ds = _visible_node_distances(g, s)
            via_nodes = (ds[:, None] + dist_nodes).min(axis=0)  # best cost s -> each node
            row = np.minimum(row, (via_nodes[:, None] + target_vis).min(axis=0))
        return row

    # Site rows are independent; the backend is GIL-bound so auto means serial.
    workers = threads if threads > 0 else 1
    if workers > 1 and ns > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(site_row, range(ns)))
    else:
        rows = [site_row(i) for i in range(ns)]
    vals = np.vstack(rows) if rows else np.zeros((0, nt))
    vals = np.where(np.isfinite(vals), vals, d_max)
    vals = np.minimum(vals, d_max)
    return DistanceMatrix(vals, d_max=float(d_max), metric_tag="visgraph")
