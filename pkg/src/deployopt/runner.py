"""Pipeline orchestration: scenario document in, report + rendering out.

These entry points are what the HTTP service exposes; everything below them
is deterministic for a fixed scenario and seed, so repeated runs differ only
in the timing fields.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from . import rrtstar, visgraph
from .coverage import build_problem, max_target_distance, target_assignments
from .errors import UNREACHABLE, InvalidParams
from .geometry import Point2, Workspace2D
from .metrics import build_matrix
from .scenario import Scenario, scenario_from_dict
from .render import scenario_svg
from .submodular import brute_force, check_properties
from .terrain import tau_to_csv, tau_to_pgm

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class DeployOutcome:
    report: dict
    svg: str


def _effective_seed(scenario: Scenario, metric: str, seed: int | None) -> int:
    if seed is not None:
        return int(seed)
    if metric.startswith("rrtstar") and scenario.rrt is not None:
        return scenario.rrt.seed
    return 0


def run_deploy(
    doc: dict,
    *,
    metric: str,
    task: str | None = None,
    seed: int | None = None,
    cache_dir: str | None = None,
    use_cache: bool = True,
    threads: int = 0,
    base_dir=None,
) -> DeployOutcome:
    """Full deployment pipeline: load, distance matrix (cached), greedy
    selection, report JSON and SVG."""
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    scenario = scenario_from_dict(doc, base_dir=base_dir)
    timings["load"] = time.perf_counter() - t0

    metric = metric.replace("-", "_")
    warnings: list[str] = []
    t1 = time.perf_counter()
    matrix = build_matrix(
        scenario, metric, seed=seed, cache_dir=cache_dir, use_cache=use_cache, threads=threads, warnings=warnings
    )
    timings["matrix"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    problem = build_problem(scenario, matrix, task=task)
    result = problem.solve()
    timings["solve"] = time.perf_counter() - t2

    t3 = time.perf_counter()
    tau = scenario.traversability_map() if scenario.is_terrain else None
    svg = scenario_svg(scenario, selected=list(result.selected), tau=tau)
    timings["render"] = time.perf_counter() - t3
    timings["total"] = time.perf_counter() - t0

    report = {
        "schema_version": SCHEMA_VERSION,
        "scenario_hash": scenario.scenario_hash,
        "metric": metric,
        "task": problem.task,
        "seed": _effective_seed(scenario, metric, seed),
        "result": result.to_json(),
        "max_target_distance": max_target_distance(result.selected, matrix),
        "assignments": target_assignments(result.selected, matrix),
        "warnings": warnings,
        "timings": timings,
    }
    return DeployOutcome(report=report, svg=svg)


def run_matrix(
    doc: dict,
    *,
    metric: str,
    seed: int | None = None,
    cache_dir: str | None = None,
    use_cache: bool = True,
    threads: int = 0,
    base_dir=None,
) -> tuple[str, dict]:
    """Distance matrix only; returns the CSV payload and its sidecar metadata."""
    scenario = scenario_from_dict(doc, base_dir=base_dir)
    metric = metric.replace("-", "_")
    warnings: list[str] = []
    matrix = build_matrix(
        scenario, metric, seed=seed, cache_dir=cache_dir, use_cache=use_cache, threads=threads, warnings=warnings
    )
    meta = {
        "schema_version": SCHEMA_VERSION,
        "scenario_hash": scenario.scenario_hash,
        "metric": metric,
        "metric_tag": matrix.metric_tag,
        "d_max": matrix.d_max,
        "shape": list(matrix.values.shape),
        "warnings": warnings,
    }
    return matrix.to_csv(), meta


def run_terrain(doc: dict, *, base_dir=None) -> tuple[str, str, str]:
    """Traversability products for a terrain scenario: CSV, PGM image, SVG."""
    scenario = scenario_from_dict(doc, base_dir=base_dir)
    tau = scenario.traversability_map()
    svg = scenario_svg(scenario, tau=tau)
    return tau_to_csv(tau), tau_to_pgm(tau), svg


def run_path(
    doc: dict,
    *,
    start: tuple[float, float],
    end: tuple[float, float],
    metric: str | None = None,
    seed: int | None = None,
    base_dir=None,
) -> tuple[dict, str]:
    """Single shortest-path query with an SVG of the route."""
    scenario = scenario_from_dict(doc, base_dir=base_dir)
    a = Point2(float(start[0]), float(start[1]))
    b = Point2(float(end[0]), float(end[1]))
    if metric is None:
        metric = "visgraph" if isinstance(scenario.geometry, Workspace2D) else "rrtstar"
    metric = metric.replace("-", "_")

    if metric == "visgraph":
        if not isinstance(scenario.geometry, Workspace2D):
            raise InvalidParams("visgraph path queries need an obstacle workspace")
        graph = visgraph.build_visibility_graph(scenario.geometry)
        result = visgraph.query(graph, a, b)
    elif metric in ("rrtstar", "rrtstar_unweighted"):
        if not scenario.is_terrain:
            raise InvalidParams("rrtstar path queries need a terrain scenario")
        tau_max = 1.0 if metric == "rrtstar_unweighted" else scenario.terrain_config().tau_max
        params = scenario.rrt_params(tau_max=tau_max, seed=seed)
        result = rrtstar.plan(a, b, scenario.traversability_map(), params)
    elif metric == "euclidean":
        result = (a.distance_to(b), [a, b])
    else:
        raise InvalidParams(f"unknown path metric {metric!r}")

    if result is UNREACHABLE:
        payload = {"reachable": False, "distance": None, "polyline": []}
        svg = scenario_svg(scenario, tau=scenario.traversability_map() if scenario.is_terrain else None)
        return payload, svg
    distance, polyline = result
    payload = {
        "reachable": True,
        "distance": float(distance),
        "polyline": [[p.x, p.y] for p in polyline],
    }
    tau = scenario.traversability_map() if scenario.is_terrain else None
    svg = scenario_svg(scenario, path=polyline, tau=tau)
    return payload, svg


def run_verify(
    doc: dict,
    *,
    metric: str = "euclidean",
    task: str | None = None,
    trials: int = 200,
    seed: int = 0,
    threads: int = 0,
    base_dir=None,
) -> dict:
    """Property and guarantee audit on a scenario small enough for the
    exhaustive oracle: monotonicity/submodularity violation counts plus the
    greedy value against the brute-force optimum."""
    scenario = scenario_from_dict(doc, base_dir=base_dir)
    metric = metric.replace("-", "_")
    matrix = build_matrix(scenario, metric, seed=seed, use_cache=False, threads=threads)
    problem = build_problem(scenario, matrix, task=task)
    f = problem.utility
    ground = list(f.ground_set)

    prop = check_properties(f, ground, trials=trials, seed=seed)
    result = problem.solve()
    best_set, best_val = brute_force(f, ground, problem.constraint)
    bound = 1.0 - 1.0 / math.e if not hasattr(problem.constraint, "blocks") else 0.5
    satisfied = result.value >= bound * best_val - 1e-9
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario_hash": scenario.scenario_hash,
        "metric": metric,
        "task": problem.task,
        "exhaustive": len(ground) <= 8,
        "checks": prop.checks,
        "monotone_violations": prop.monotone_violations,
        "submodular_violations": prop.submodular_violations,
        "greedy_value": result.value,
        "greedy_selected": list(result.selected),
        "brute_force_value": best_val,
        "brute_force_selected": list(best_set),
        "guarantee": result.guarantee,
        "guarantee_satisfied": bool(satisfied),
        "clean": bool(prop.clean and satisfied),
    }
