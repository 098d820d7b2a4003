"""Scenario files: parsing, invariant validation, and canonical hashing.

A scenario document is JSON with either polygonal ``obstacles`` (2D
workspace) or a ``terrain`` heightmap; exactly one of the two drives the
metric choice. Validation never repairs silently: any broken invariant
raises with the offending field named.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .geometry import Point2, Polygon, Rect, TerrainGrid, Workspace2D, point_in_free_space
from .submodular import PartitionConstraint
from .terrain import DEFAULT_WEIGHTS, TraversabilityMap, traversability_from_grid

TASKS = ("fair-access", "hotspot")

DEFAULT_TERRAIN_PARAMS = {"s_crit": 0.5, "f_crit": 0.5, "zeta_crit": 1.0, "tau_max": 0.7}


@dataclass(frozen=True)
class HotspotParams:
    ell: float
    cap: float

    def __post_init__(self):
        if not self.ell > 0:
            raise ValidationError(f"hotspot.ell must be > 0, got {self.ell}")
        if self.cap < math.log1p(self.ell) - 1e-12:
            raise ValidationError(f"hotspot.L must be >= log(1+ell), got {self.cap}")


@dataclass(frozen=True)
class TerrainParams:
    weights: tuple[float, float, float]
    s_crit: float
    f_crit: float
    zeta_crit: float
    tau_max: float

    def __post_init__(self):
        if abs(sum(self.weights) - 1.0) > 1e-9 or min(self.weights) <= 0:
            raise ValidationError(f"terrain_params weights must be positive and sum to 1, got {self.weights}")
        if min(self.s_crit, self.f_crit, self.zeta_crit) <= 0:
            raise ValidationError("terrain_params critical thresholds must be positive")
        if not 0 < self.tau_max <= 1:
            raise ValidationError(f"terrain_params.tau_max must lie in (0, 1], got {self.tau_max}")


@dataclass(frozen=True)
class RrtConfig:
    samples: int
    step: float
    radius_const: float
    seed: int

    def __post_init__(self):
        if int(self.samples) < 1:
            raise ValidationError(f"rrt.samples must be >= 1, got {self.samples}")
        if not self.step > 0:
            raise ValidationError(f"rrt.step must be > 0, got {self.step}")
        if not self.radius_const > 0:
            raise ValidationError(f"rrt.radius_const must be > 0, got {self.radius_const}")
        if int(self.seed) < 0:
            raise ValidationError(f"rrt.seed must be >= 0, got {self.seed}")


@dataclass(frozen=True)
class Scenario:
    geometry: Workspace2D | TerrainGrid
    targets: tuple[Point2, ...]
    candidates: tuple[Point2, ...]
    k: int
    task: str
    partition: PartitionConstraint | None
    hotspot: HotspotParams | None
    terrain_params: TerrainParams | None
    rrt: RrtConfig | None
    scenario_hash: str

    @property
    def is_terrain(self) -> bool:
        return isinstance(self.geometry, TerrainGrid)

    def diagonal(self) -> float:
        rect = self.geometry.footprint if self.is_terrain else self.geometry.bounds
        return rect.diagonal

    def constraint(self):
        """Partition constraint when present, otherwise the plain cardinality."""
        return self.partition if self.partition is not None else self.k

    def hotspot_params(self) -> HotspotParams:
        if self.hotspot is not None:
            return self.hotspot
        diag = self.diagonal()
        return HotspotParams(ell=0.25 * diag, cap=math.log1p(diag))

    def terrain_config(self) -> TerrainParams:
        if self.terrain_params is None:
            raise ValidationError("scenario has no terrain_params")
        return self.terrain_params

    def rrt_config(self) -> RrtConfig:
        if self.rrt is None:
            raise ValidationError("scenario has no rrt config")
        return self.rrt

    def traversability_map(self) -> TraversabilityMap:
        if not self.is_terrain:
            raise ValidationError("traversability map requires terrain geometry")
        tp = self.terrain_config()
        return traversability_from_grid(
            self.geometry,
            weights=tp.weights,
            thresholds=(tp.s_crit, tp.f_crit, tp.zeta_crit),
        )

    def rrt_params(self, tau_max: float | None = None, seed: int | None = None):
        from .rrtstar import RrtParams

        rrt = self.rrt_config()
        return RrtParams(
            samples=rrt.samples,
            step=rrt.step,
            radius_const=rrt.radius_const,
            seed=int(seed if seed is not None else rrt.seed),
            tau_max=float(tau_max if tau_max is not None else self.terrain_config().tau_max),
            edge_check_resolution=self.geometry.cell_size / 2.0,
        )


def load_scenario(path) -> Scenario:
    p = Path(path)
    if not p.exists():
        raise ParseError(f"scenario file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"scenario file {p} is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc, base_dir=p.parent)


def scenario_hash_of(doc: dict) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _parse_point(raw, label: str) -> Point2:
    if not (isinstance(raw, (list, tuple)) and len(raw) == 2):
        raise ValidationError(f"{label} must be an [x, y] pair, got {raw!r}")
    try:
        return Point2(float(raw[0]), float(raw[1]))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{label} has non-numeric coordinates: {raw!r}") from exc


def _parse_points(raw, label: str) -> tuple[Point2, ...]:
    if not isinstance(raw, list) or not raw:
        raise ValidationError(f"{label} must be a nonempty list of [x, y] pairs")
    return tuple(_parse_point(p, f"{label}[{i}]") for i, p in enumerate(raw))


def _resolve_heights(raw, base_dir: Path | None):
    if isinstance(raw, str):
        path = Path(raw)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ParseError(f"terrain.heights CSV not found: {path}")
        try:
            return np.loadtxt(path, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ParseError(f"terrain.heights CSV {path} is malformed: {exc}") from exc
    return np.asarray(raw, dtype=float)


def scenario_from_dict(doc, base_dir: Path | None = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError(f"scenario document must be a JSON object, got {type(doc).__name__}")
    has_obstacles = "obstacles" in doc
    has_terrain = "terrain" in doc
    if has_obstacles == has_terrain:
        raise ValidationError("exactly one of 'obstacles' or 'terrain' must be present")

    canonical = dict(doc)
    if has_terrain:
        geometry, canonical["terrain"] = _parse_terrain(doc["terrain"], base_dir)
    else:
        geometry = _parse_workspace(doc)

    targets = _parse_points(doc.get("targets"), "targets")
    candidates = _parse_points(doc.get("candidates"), "candidates")
    _check_placement(geometry, targets, "targets")
    _check_placement(geometry, candidates, "candidates")

    k = doc.get("K")
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ValidationError(f"K must be a positive integer, got {k!r}")
    if len(candidates) <= k:
        raise ValidationError(f"|X| > K required (got |X|={len(candidates)}, K={k})")

    task = doc.get("task", "fair-access")
    if task not in TASKS:
        raise ValidationError(f"task must be one of {TASKS}, got {task!r}")

    partition = _parse_partition(doc.get("partition"), len(candidates), k)
    hotspot = _parse_hotspot(doc.get("hotspot"))
    terrain_params = _parse_terrain_params(doc.get("terrain_params"), required=has_terrain)
    rrt = _parse_rrt(doc.get("rrt"), geometry if has_terrain else None)

    return Scenario(
        geometry=geometry,
        targets=targets,
        candidates=candidates,
        k=k,
        task=task,
        partition=partition,
        hotspot=hotspot,
        terrain_params=terrain_params if has_terrain else None,
        rrt=rrt if has_terrain else None,
        scenario_hash=scenario_hash_of(canonical),
    )


def _parse_workspace(doc) -> Workspace2D:
    bounds_raw = doc.get("bounds")
    if not isinstance(bounds_raw, dict):
        raise ValidationError("bounds must be an object with xmin/ymin/xmax/ymax")
    try:
        bounds = Rect(
            float(bounds_raw["xmin"]), float(bounds_raw["ymin"]),
            float(bounds_raw["xmax"]), float(bounds_raw["ymax"]),
        )
    except KeyError as exc:
        raise ValidationError(f"bounds is missing field {exc}") from exc
    obstacles_raw = doc["obstacles"]
    if not isinstance(obstacles_raw, list):
        raise ValidationError("obstacles must be a list of vertex lists")
    polygons = []
    for i, verts in enumerate(obstacles_raw):
        pts = [_parse_point(v, f"obstacles[{i}][{j}]") for j, v in enumerate(verts)]
        try:
            polygons.append(Polygon(tuple(pts)))
        except ValidationError as exc:
            raise ValidationError(f"obstacles[{i}]: {exc}") from exc
    return Workspace2D(bounds=bounds, obstacles=tuple(polygons))


def _parse_terrain(raw, base_dir: Path | None) -> tuple[TerrainGrid, dict]:
    if not isinstance(raw, dict):
        raise ValidationError("terrain must be an object with origin/cell_size/heights")
    origin = _parse_point(raw.get("origin", [0.0, 0.0]), "terrain.origin")
    try:
        cell_size = float(raw["cell_size"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"terrain.cell_size missing or non-numeric: {exc}") from exc
    if "heights" not in raw:
        raise ValidationError("terrain.heights is required")
    heights = _resolve_heights(raw["heights"], base_dir)
    try:
        grid = TerrainGrid(origin=origin, cell_size=cell_size, heights=heights)
    except ValidationError as exc:
        raise ValidationError(f"terrain: {exc}") from exc
    resolved = {
        "origin": [origin.x, origin.y],
        "cell_size": cell_size,
        "heights": [[float(v) for v in row] for row in grid.heights],
    }
    return grid, resolved


def _check_placement(geometry, points: tuple[Point2, ...], label: str) -> None:
    if isinstance(geometry, Workspace2D):
        for i, p in enumerate(points):
            if not point_in_free_space(p, geometry):
                raise ValidationError(f"{label}[{i}] at ({p.x}, {p.y}) is not in the free workspace")
    else:
        for i, p in enumerate(points):
            if not geometry.contains(p):
                raise ValidationError(f"{label}[{i}] at ({p.x}, {p.y}) is outside the terrain footprint")


def _parse_partition(raw, n_candidates: int, k: int) -> PartitionConstraint | None:
    if raw is None:
        return None
    if not isinstance(raw, list) or not raw:
        raise ValidationError("partition must be a nonempty list of {indices, quota} objects")
    blocks = []
    quotas = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or "indices" not in entry or "quota" not in entry:
            raise ValidationError(f"partition[{i}] must have 'indices' and 'quota'")
        indices = entry["indices"]
        if not isinstance(indices, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in indices):
            raise ValidationError(f"partition[{i}].indices must be a list of integers")
        bad = [v for v in indices if not 0 <= v < n_candidates]
        if bad:
            raise ValidationError(f"partition[{i}].indices out of candidate range: {bad}")
        blocks.append(frozenset(indices))
        quotas.append(entry["quota"])
    try:
        constraint = PartitionConstraint(tuple(blocks), tuple(quotas))
        constraint.validate_cover(range(n_candidates))
    except Exception as exc:
        raise ValidationError(f"partition: {exc}") from exc
    if constraint.total != k:
        raise ValidationError(f"partition quotas must sum to K (got {constraint.total}, K={k})")
    return constraint


def _parse_hotspot(raw) -> HotspotParams | None:
    if raw is None:
        return None
    if not isinstance(raw, dict) or "ell" not in raw or "L" not in raw:
        raise ValidationError("hotspot must be an object with 'ell' and 'L'")
    return HotspotParams(ell=float(raw["ell"]), cap=float(raw["L"]))


def _parse_terrain_params(raw, required: bool) -> TerrainParams | None:
    if raw is None:
        if not required:
            return None
        raw = {}
    if not isinstance(raw, dict):
        raise ValidationError("terrain_params must be an object")
    weights = (
        float(raw.get("w1", DEFAULT_WEIGHTS[0])),
        float(raw.get("w2", DEFAULT_WEIGHTS[1])),
        float(raw.get("w3", DEFAULT_WEIGHTS[2])),
    )
    return TerrainParams(
        weights=weights,
        s_crit=float(raw.get("s_crit", DEFAULT_TERRAIN_PARAMS["s_crit"])),
        f_crit=float(raw.get("f_crit", DEFAULT_TERRAIN_PARAMS["f_crit"])),
        zeta_crit=float(raw.get("zeta_crit", DEFAULT_TERRAIN_PARAMS["zeta_crit"])),
        tau_max=float(raw.get("tau_max", DEFAULT_TERRAIN_PARAMS["tau_max"])),
    )


def _parse_rrt(raw, grid: TerrainGrid | None) -> RrtConfig | None:
    if raw is None and grid is None:
        return None
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ValidationError("rrt must be an object")
    if grid is not None:
        diag = grid.footprint.diagonal
        area = (grid.footprint.xmax - grid.footprint.xmin) * (grid.footprint.ymax - grid.footprint.ymin)
        defaults = {"samples": 1000, "step": diag / 40.0, "radius_const": 1.5 * math.sqrt(area), "seed": 0}
    else:
        defaults = {"samples": 1000, "step": 1.0, "radius_const": 10.0, "seed": 0}
    return RrtConfig(
        samples=int(raw.get("samples", defaults["samples"])),
        step=float(raw.get("step", defaults["step"])),
        radius_const=float(raw.get("radius_const", defaults["radius_const"])),
        seed=int(raw.get("seed", defaults["seed"])),
    )
