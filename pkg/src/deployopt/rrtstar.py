"""Traversability-aware RRT* over terrain grids: approximate shortest
traversable path lengths between point pairs.

Nodes and edges enter the tree only when interpolated traversability stays
within the threshold; edge interiors are sampled at a configurable
resolution. Path cost is horizontal Euclidean length, terrain enters purely
through the feasibility filter. Runs are deterministic for a fixed seed, and
pairwise matrices derive an independent stream per (site, target) pair so the
computation parallelizes without shared state.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import UNREACHABLE, InvalidEndpoint, ValidationError
from .geometry import Point2
from .metrics import DistanceMatrix
from .terrain import TraversabilityMap

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RrtParams:
    samples: int
    step: float
    radius_const: float
    seed: int
    tau_max: float
    edge_check_resolution: float

    def __post_init__(self):
        if self.samples < 1:
            raise ValidationError(f"rrt samples must be >= 1, got {self.samples}")
        if not self.step > 0:
            raise ValidationError(f"rrt step must be > 0, got {self.step}")
        if not self.radius_const > 0:
            raise ValidationError(f"rrt radius_const must be > 0, got {self.radius_const}")
        if not 0 < self.tau_max <= 1:
            raise ValidationError(f"tau_max must lie in (0, 1], got {self.tau_max}")
        if not self.edge_check_resolution > 0:
            raise ValidationError("edge_check_resolution must be > 0")


@dataclass(frozen=True)
class RrtTree:
    """Grown tree snapshot: row 0 of ``xy`` is the root."""

    root: Point2
    xy: np.ndarray = field(repr=False)
    parents: np.ndarray = field(repr=False)
    costs: np.ndarray = field(repr=False)
    goal_links: tuple[int, ...] = ()


def _pair_seed(seed: int, i: int, j: int) -> int:
    """Stable 64-bit mix of the master seed with a pair index (splitmix-style)."""
    h = (seed * 0x9E3779B97F4A7C15 + (i + 1) * 0xBF58476D1CE4E5B9 + (j + 1) * 0x94D049BB133111EB) & _MASK64
    h = ((h ^ (h >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    h = ((h ^ (h >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (h ^ (h >> 31)) & _MASK64


def _edge_ok(a: np.ndarray, b: np.ndarray, tmap: TraversabilityMap, tau_max: float, resolution: float) -> bool:
    length = math.hypot(b[0] - a[0], b[1] - a[1])
    n = max(1, math.ceil(length / resolution))
    ts = np.linspace(0.0, 1.0, n + 1)
    pts = a[None, :] + ts[:, None] * (b - a)[None, :]
    return bool((tmap.values_at(pts) <= tau_max).all())


def build_tree(start: Point2, goal: Point2, tmap: TraversabilityMap, params: RrtParams) -> RrtTree:
    """Run the sampling loop and return the full tree with goal connections."""
    if tmap.value_at(start) > params.tau_max:
        raise InvalidEndpoint(f"start ({start.x}, {start.y}) violates the traversability threshold")
    if tmap.value_at(goal) > params.tau_max:
        raise InvalidEndpoint(f"goal ({goal.x}, {goal.y}) violates the traversability threshold")
    rows, cols = tmap.shape
    lo = np.array([tmap.origin.x, tmap.origin.y])
    hi = lo + np.array([(cols - 1) * tmap.cell_size, (rows - 1) * tmap.cell_size])
    rng = np.random.default_rng(params.seed)

    cap = params.samples + 1
    xy = np.empty((cap, 2))
    xy[0] = (start.x, start.y)
    parents = np.full(cap, -1, dtype=int)
    costs = np.zeros(cap)
    children: list[list[int]] = [[] for _ in range(cap)]
    goal_xy = np.array([goal.x, goal.y])
    goal_links: list[int] = []

    def try_goal(idx: int) -> None:
        if math.hypot(*(xy[idx] - goal_xy)) <= params.step and _edge_ok(
            xy[idx], goal_xy, tmap, params.tau_max, params.edge_check_resolution
        ):
            goal_links.append(idx)

    try_goal(0)
    n = 1
    for _ in range(params.samples):
        q = rng.uniform(lo, hi)
        diff = xy[:n] - q
        d2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
        nearest = int(d2.argmin())
        gap = math.sqrt(d2[nearest])
        if gap < 1e-12:
            continue
        if gap > params.step:
            x_new = xy[nearest] + (q - xy[nearest]) * (params.step / gap)
        else:
            x_new = q.copy()
        if float(tmap.values_at(x_new[None, :])[0]) > params.tau_max:
            continue

        radius = min(params.radius_const * math.sqrt(math.log(n) / n), 4.0 * params.step) if n > 1 else 0.0
        dn = np.hypot(xy[:n, 0] - x_new[0], xy[:n, 1] - x_new[1])
        neighbor_idx = np.nonzero(dn <= radius)[0]
        candidates = neighbor_idx if nearest in neighbor_idx else np.append(neighbor_idx, nearest)

        # Cheapest feasible parent; candidates tried in ascending tentative
        # cost so edge checks stop at the first valid one.
        order = np.argsort(costs[candidates] + dn[candidates], kind="stable")
        parent = -1
        for c in candidates[order]:
            if _edge_ok(xy[c], x_new, tmap, params.tau_max, params.edge_check_resolution):
                parent = int(c)
                break
        if parent == -1:
            continue

        idx = n
        xy[idx] = x_new
        parents[idx] = parent
        costs[idx] = costs[parent] + dn[parent]
        children[parent].append(idx)
        n += 1

        for c in neighbor_idx:
            c = int(c)
            if c == parent:
                continue
            new_cost = costs[idx] + dn[c]
            if new_cost < costs[c] - 1e-12 and _edge_ok(
                xy[idx], xy[c], tmap, params.tau_max, params.edge_check_resolution
            ):
                children[parents[c]].remove(c)
                parents[c] = idx
                children[idx].append(c)
                delta = new_cost - costs[c]
                stack = [c]
                while stack:
                    u = stack.pop()
                    costs[u] += delta
                    stack.extend(children[u])
        try_goal(idx)

    return RrtTree(
        root=start,
        xy=xy[:n].copy(),
        parents=parents[:n].copy(),
        costs=costs[:n].copy(),
        goal_links=tuple(goal_links),
    )


def plan(start: Point2, goal: Point2, tmap: TraversabilityMap, params: RrtParams):
    """Best traversable path from start to goal as (length, polyline), or
    UNREACHABLE when no goal connection exists after the sample budget."""
    if start.distance_to(goal) == 0.0:
        if tmap.value_at(start) > params.tau_max:
            raise InvalidEndpoint(f"start ({start.x}, {start.y}) violates the traversability threshold")
        return 0.0, [start]
    tree = build_tree(start, goal, tmap, params)
    if not tree.goal_links:
        return UNREACHABLE
    goal_xy = np.array([goal.x, goal.y])
    best_idx = -1
    best_cost = math.inf
    for i in sorted(tree.goal_links):
        c = float(tree.costs[i]) + math.hypot(*(tree.xy[i] - goal_xy))
        if c < best_cost - 1e-15:
            best_cost = c
            best_idx = i
    chain = [best_idx]
    while tree.parents[chain[-1]] != -1:
        chain.append(int(tree.parents[chain[-1]]))
    polyline = [Point2(float(tree.xy[i][0]), float(tree.xy[i][1])) for i in reversed(chain)]
    polyline.append(goal)
    return best_cost, polyline


def pairwise_matrix(
    sites: list[Point2],
    targets: list[Point2],
    tmap: TraversabilityMap,
    params: RrtParams,
    d_max: float | None = None,
    threads: int = 0,
    warnings: list[str] | None = None,
) -> DistanceMatrix:
    """Planner path lengths for every (site, target) pair.

    Non-traversable endpoints and unreachable pairs are stored as the cap
    d_max (with a warning collected), never raised. Each pair plans with its
    own derived seed, so the matrix is reproducible regardless of thread
    count.
    """
    rows, cols = tmap.shape
    if d_max is None:
        d_max = 10.0 * math.hypot((cols - 1) * tmap.cell_size, (rows - 1) * tmap.cell_size)
    ns, nt = len(sites), len(targets)

    def compute(pair: tuple[int, int]) -> tuple[float, str | None]:
        i, j = pair
        pair_params = RrtParams(
            samples=params.samples,
            step=params.step,
            radius_const=params.radius_const,
            seed=_pair_seed(params.seed, i, j),
            tau_max=params.tau_max,
            edge_check_resolution=params.edge_check_resolution,
        )
        try:
            result = plan(sites[i], targets[j], tmap, pair_params)
        except InvalidEndpoint as exc:
            return d_max, f"site {i} -> target {j}: {exc}; stored cap value"
        if result is UNREACHABLE:
            return d_max, f"site {i} -> target {j}: unreachable within sample budget; stored cap value"
        return min(result[0], d_max), None

    pairs = [(i, j) for i in range(ns) for j in range(nt)]
    workers = threads if threads > 0 else min(4, len(pairs)) or 1
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(compute, pairs))
    else:
        outcomes = [compute(p) for p in pairs]
    if warnings is not None:
        warnings.extend(note for _, note in outcomes if note is not None)
    flat = [value for value, _ in outcomes]
    vals = np.array(flat).reshape(ns, nt) if pairs else np.zeros((ns, nt))
    tag = (
        f"rrtstar[tau_max={params.tau_max!r},samples={params.samples},step={params.step!r},"
        f"radius_const={params.radius_const!r},seed={params.seed}]"
    )
    return DistanceMatrix(vals, d_max=float(d_max), metric_tag=tag)
