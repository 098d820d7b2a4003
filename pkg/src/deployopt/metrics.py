"""Distance-matrix layer: metric backends behind one builder, the phantom-row
augmentation that turns loss minimization into a normalized utility, the
truncated-log transform for density-seeking deployments, and the on-disk
matrix cache.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidD0, InvalidParams, MetricGeometryMismatch, ValidationError
from .geometry import TerrainGrid, Workspace2D

METRICS = ("euclidean", "visgraph", "rrtstar", "rrtstar_unweighted")

CACHE_DIR_ENV = "DEPLOYOPT_CACHE_DIR"
_DEFAULT_CACHE_DIR = Path.home() / ".cache" / "deployopt"


@dataclass(frozen=True)
class DistanceMatrix:
    """Dense site-by-target travel costs; not necessarily symmetric in origin
    and destination roles and free to violate the triangle inequality."""

    values: np.ndarray = field(repr=False)
    d_max: float
    metric_tag: str
    site_ids: tuple[int, ...] = ()
    target_ids: tuple[int, ...] = ()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValidationError(f"distance matrix must be 2D, got shape {vals.shape}")
        if not np.isfinite(vals).all():
            raise ValidationError("distance matrix entries must be finite")
        if (vals < -1e-12).any() or (vals > self.d_max + 1e-9).any():
            raise ValidationError(f"distance matrix entries must lie in [0, {self.d_max}]")
        vals = np.clip(vals, 0.0, self.d_max)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if not self.site_ids:
            object.__setattr__(self, "site_ids", tuple(range(vals.shape[0])))
        if not self.target_ids:
            object.__setattr__(self, "target_ids", tuple(range(vals.shape[1])))
        if len(self.site_ids) != vals.shape[0] or len(self.target_ids) != vals.shape[1]:
            raise ValidationError("site/target id lengths must match matrix shape")

    @property
    def n_sites(self) -> int:
        return self.values.shape[0]

    @property
    def n_targets(self) -> int:
        return self.values.shape[1]

    def to_csv(self) -> str:
        lines = ["site_index,target_index,distance"]
        for i, sid in enumerate(self.site_ids):
            for j, tid in enumerate(self.target_ids):
                lines.append(f"{sid},{tid},{float(self.values[i, j])!r}")
        return "\n".join(lines) + "\n"


def matrix_from_csv(text: str, d_max: float, metric_tag: str) -> DistanceMatrix:
    rows = text.strip().splitlines()
    if not rows or rows[0].strip() != "site_index,target_index,distance":
        raise ValidationError("matrix CSV must start with header 'site_index,target_index,distance'")
    entries = {}
    for line in rows[1:]:
        s, t, d = line.split(",")
        entries[(int(s), int(t))] = float(d)
    site_ids = sorted({s for s, _ in entries})
    target_ids = sorted({t for _, t in entries})
    vals = np.empty((len(site_ids), len(target_ids)))
    for i, sid in enumerate(site_ids):
        for j, tid in enumerate(target_ids):
            vals[i, j] = entries[(sid, tid)]
    return DistanceMatrix(vals, d_max=d_max, metric_tag=metric_tag, site_ids=tuple(site_ids), target_ids=tuple(target_ids))


@dataclass(frozen=True)
class AugmentedMatrix:
    """Distance matrix plus a phantom site whose constant dissimilarity d0
    weakly dominates every real site for every target."""

    base: DistanceMatrix
    d0: float

    def __post_init__(self):
        top = float(self.base.values.max()) if self.base.values.size else 0.0
        if self.d0 < top - 1e-12:
            raise InvalidD0(f"d0 ({self.d0}) must be >= the largest matrix entry ({top})")

    @property
    def phantom_index(self) -> int:
        return self.base.n_sites

    @property
    def n_targets(self) -> int:
        return self.base.n_targets

    def row(self, index: int) -> np.ndarray:
        if index == self.phantom_index:
            return np.full(self.base.n_targets, self.d0)
        return self.base.values[index]


def augment_with_phantom(m: DistanceMatrix, d0: float | None = None) -> AugmentedMatrix:
    """Append the phantom row; by default d0 equals the largest entry so every
    real site improves weakly on it everywhere."""
    if d0 is None:
        d0 = float(m.values.max()) if m.values.size else 0.0
    return AugmentedMatrix(base=m, d0=float(d0))


def hotspot_transform(d: float, ell: float, cap: float) -> float:
    """Truncated natural-log distance: log(1+d) up to the threshold ell,
    the constant cap beyond it."""
    _validate_hotspot_params(ell, cap)
    if d < 0:
        raise InvalidParams(f"distance must be nonnegative, got {d}")
    return math.log1p(d) if d <= ell else cap


def _validate_hotspot_params(ell: float, cap: float) -> None:
    if not ell > 0:
        raise InvalidParams(f"hotspot threshold ell must be > 0, got {ell}")
    if cap < math.log1p(ell) - 1e-12:
        raise InvalidParams(
            f"hotspot cap {cap} < log(1+ell) = {math.log1p(ell)}; the transform would not be monotone"
        )


def apply_hotspot(m: DistanceMatrix, ell: float, cap: float) -> DistanceMatrix:
    """Element-wise truncated-log transform; the result is capped at ``cap``."""
    _validate_hotspot_params(ell, cap)
    vals = np.where(m.values <= ell, np.log1p(m.values), cap)
    tag = f"hotspot(ell={ell!r},cap={cap!r},log=natural)|{m.metric_tag}"
    return DistanceMatrix(vals, d_max=float(cap), metric_tag=tag, site_ids=m.site_ids, target_ids=m.target_ids)


def resolve_cache_dir(cache_dir: str | os.PathLike | None) -> Path:
    if cache_dir is not None:
        return Path(cache_dir)
    env = os.environ.get(CACHE_DIR_ENV)
    return Path(env) if env else _DEFAULT_CACHE_DIR


def build_matrix(
    scenario,
    metric: str,
    *,
    seed: int | None = None,
    cache_dir: str | os.PathLike | None = None,
    use_cache: bool = True,
    threads: int = 0,
    warnings: list[str] | None = None,
) -> DistanceMatrix:
    """Site-target distances for a scenario under the chosen metric backend.

    Results are cached on disk keyed by the scenario hash, metric name and
    backend parameters; a second identical call loads byte-identical values.
    ``rrtstar_unweighted`` runs the terrain planner with the traversability
    filter disabled (threshold 1), the baseline oblivious to terrain.
    """
    metric = metric.replace("-", "_")
    if metric not in METRICS:
        raise InvalidParams(f"unknown metric '{metric}'; expected one of {METRICS}")
    _check_geometry(scenario, metric)
    params = _backend_params(scenario, metric, seed)
    cache = _MatrixCache(resolve_cache_dir(cache_dir)) if use_cache else None
    if cache is not None:
        cached = cache.load(scenario.scenario_hash, metric, params)
        if cached is not None:
            return cached
    m = _compute_matrix(scenario, metric, params, threads, warnings)
    if cache is not None:
        cache.store(scenario.scenario_hash, metric, params, m)
    return m


def _check_geometry(scenario, metric: str) -> None:
    if metric == "visgraph" and not isinstance(scenario.geometry, Workspace2D):
        raise MetricGeometryMismatch("visgraph metric requires a 2D obstacle workspace")
    if metric in ("rrtstar", "rrtstar_unweighted") and not isinstance(scenario.geometry, TerrainGrid):
        raise MetricGeometryMismatch(f"{metric} metric requires a terrain grid")


def _backend_params(scenario, metric: str, seed: int | None) -> dict:
    if metric in ("rrtstar", "rrtstar_unweighted"):
        rrt = scenario.rrt_config()
        params = {
            "samples": rrt.samples,
            "step": rrt.step,
            "radius_const": rrt.radius_const,
            "seed": int(seed if seed is not None else rrt.seed),
            "tau_max": 1.0 if metric == "rrtstar_unweighted" else scenario.terrain_config().tau_max,
        }
        return params
    return {}


def _compute_matrix(scenario, metric: str, params: dict, threads: int, warnings: list[str] | None) -> DistanceMatrix:
    # Imported here: the backends depend on this module's DistanceMatrix.
    if metric == "euclidean":
        return _euclidean_matrix(scenario)
    if metric == "visgraph":
        from . import visgraph

        graph = visgraph.build_visibility_graph(scenario.geometry)
        return visgraph.site_target_matrix(graph, scenario.candidates, scenario.targets, threads=threads)
    from . import rrtstar

    tmap = scenario.traversability_map()
    rrt_params = scenario.rrt_params(tau_max=params["tau_max"], seed=params["seed"])
    m = rrtstar.pairwise_matrix(
        scenario.candidates, scenario.targets, tmap, rrt_params, threads=threads, warnings=warnings
    )
    if metric == "rrtstar_unweighted":
        return DistanceMatrix(
            m.values, d_max=m.d_max, metric_tag="rrtstar_unweighted|" + m.metric_tag.split("|", 1)[-1],
            site_ids=m.site_ids, target_ids=m.target_ids,
        )
    return m


def _euclidean_matrix(scenario) -> DistanceMatrix:
    sites = np.array([[p.x, p.y] for p in scenario.candidates])
    targets = np.array([[p.x, p.y] for p in scenario.targets])
    diff = sites[:, None, :] - targets[None, :, :]
    vals = np.hypot(diff[..., 0], diff[..., 1])
    d_max = 10.0 * scenario.diagonal()
    return DistanceMatrix(vals, d_max=d_max, metric_tag="euclidean")


class _MatrixCache:
    """CSV matrix files with JSON sidecars; stale entries (hash, metric or
    backend parameter mismatch) are recomputed."""

    def __init__(self, root: Path):
        self.root = Path(root)

    def _paths(self, scenario_hash: str, metric: str) -> tuple[Path, Path]:
        stem = f"{scenario_hash}.{metric}"
        return self.root / f"{stem}.csv", self.root / f"{stem}.meta.json"

    def load(self, scenario_hash: str, metric: str, params: dict) -> DistanceMatrix | None:
        csv_path, meta_path = self._paths(scenario_hash, metric)
        if not (csv_path.exists() and meta_path.exists()):
            return None
        try:
            meta = json.loads(meta_path.read_text())
        except (OSError, json.JSONDecodeError):
            return None
        if meta.get("scenario_hash") != scenario_hash or meta.get("metric") != metric:
            return None
        if meta.get("params") != _jsonable(params):
            return None
        try:
            return matrix_from_csv(csv_path.read_text(), d_max=meta["d_max"], metric_tag=meta["metric_tag"])
        except (OSError, KeyError, ValidationError, ValueError):
            return None

    def store(self, scenario_hash: str, metric: str, params: dict, m: DistanceMatrix) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        csv_path, meta_path = self._paths(scenario_hash, metric)
        meta = {
            "schema_version": 1,
            "scenario_hash": scenario_hash,
            "metric": metric,
            "metric_tag": m.metric_tag,
            "d_max": m.d_max,
            "params": _jsonable(params),
        }
        csv_path.write_text(m.to_csv())
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _jsonable(params: dict) -> dict:
    return json.loads(json.dumps(params))
