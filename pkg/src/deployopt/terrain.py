"""Terrain analysis: slope / flatness / step-height feature maps and the
combined traversability score per grid node.

Feature realizations (the inputs to the weighted traversability combination):
slope is the central-difference gradient magnitude of the heightmap, flatness
the windowed height standard deviation, step height the windowed height range.
All three are linear in height scale. Border nodes use replicated windows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import InvalidWeights, OutOfGrid, ValidationError, WindowTooLarge
from .geometry import Point2, TerrainGrid

DEFAULT_WINDOW = 3
DEFAULT_WEIGHTS = (0.4, 0.3, 0.3)

_WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class FeatureMaps:
    slope: np.ndarray = field(repr=False)
    flatness: np.ndarray = field(repr=False)
    step_height: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("slope", "flatness", "step_height"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.isfinite(arr).all() or (arr < 0).any():
                raise ValidationError(f"feature map '{name}' must be finite and nonnegative")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.slope.shape == self.flatness.shape == self.step_height.shape):
            raise ValidationError("feature map shapes differ")


@dataclass(frozen=True)
class TraversabilityMap:
    """Per-node score in [0, 1]; 0 is best, 1 is critical."""

    tau: np.ndarray = field(repr=False)
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS
    thresholds: tuple[float, float, float] = (1.0, 1.0, 1.0)
    origin: Point2 = Point2(0.0, 0.0)
    cell_size: float = 1.0

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        if tau.ndim != 2:
            raise ValidationError("tau must be a 2D array")
        if (tau < -1e-12).any() or (tau > 1 + 1e-12).any():
            raise ValidationError("tau entries must lie in [0, 1]")
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)

    @property
    def shape(self) -> tuple[int, int]:
        return self.tau.shape

    def value_at(self, p: Point2) -> float:
        """Bilinear interpolation of tau at a workspace point."""
        return float(self.values_at(np.array([[p.x, p.y]]))[0])

    def values_at(self, points: np.ndarray) -> np.ndarray:
        """Vectorized bilinear tau at an (m, 2) array of xy points."""
        rows, cols = self.tau.shape
        pts = np.asarray(points, dtype=float)
        fx = (pts[:, 0] - self.origin.x) / self.cell_size
        fy = (pts[:, 1] - self.origin.y) / self.cell_size
        tol = 1e-9
        if (fx < -tol).any() or (fy < -tol).any() or (fx > cols - 1 + tol).any() or (fy > rows - 1 + tol).any():
            raise OutOfGrid("point outside the terrain grid footprint")
        fx = np.clip(fx, 0.0, cols - 1)
        fy = np.clip(fy, 0.0, rows - 1)
        c0 = np.minimum(fx.astype(int), cols - 2)
        r0 = np.minimum(fy.astype(int), rows - 2)
        ax = fx - c0
        ay = fy - r0
        t = self.tau
        return (
            t[r0, c0] * (1 - ax) * (1 - ay)
            + t[r0, c0 + 1] * ax * (1 - ay)
            + t[r0 + 1, c0] * (1 - ax) * ay
            + t[r0 + 1, c0 + 1] * ax * ay
        )


def compute_feature_maps(grid: TerrainGrid, window: int = DEFAULT_WINDOW) -> FeatureMaps:
    """Slope, flatness, and step-height maps over the terrain grid."""
    if window % 2 == 0 or window < 3:
        raise ValidationError(f"window must be odd and >= 3, got {window}")
    rows, cols = grid.heights.shape
    if window > min(rows, cols):
        raise WindowTooLarge(f"window {window} exceeds grid extent {min(rows, cols)}")
    h = grid.heights
    hp = np.pad(h, 1, mode="edge")
    gx = (hp[1:-1, 2:] - hp[1:-1, :-2]) / (2.0 * grid.cell_size)
    gy = (hp[2:, 1:-1] - hp[:-2, 1:-1]) / (2.0 * grid.cell_size)
    slope = np.hypot(gx, gy)

    mean = ndimage.uniform_filter(h, size=window, mode="nearest")
    mean_sq = ndimage.uniform_filter(h * h, size=window, mode="nearest")
    flatness = np.sqrt(np.maximum(mean_sq - mean * mean, 0.0))

    step = ndimage.maximum_filter(h, size=window, mode="nearest") - ndimage.minimum_filter(
        h, size=window, mode="nearest"
    )
    return FeatureMaps(slope=slope, flatness=flatness, step_height=step)


def compute_traversability(
    features: FeatureMaps,
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS,
    thresholds: tuple[float, float, float] = (1.0, 1.0, 1.0),
    origin: Point2 = Point2(0.0, 0.0),
    cell_size: float = 1.0,
    allow_degenerate_weights: bool = False,
) -> TraversabilityMap:
    """Weighted, threshold-normalized blend of the three feature maps,
    clamped to [0, 1].

    ``allow_degenerate_weights`` relaxes the strict-positivity invariant so
    single-feature sensitivity checks can run; the weights must still sum to 1.
    """
    w1, w2, w3 = weights
    if abs(w1 + w2 + w3 - 1.0) > _WEIGHT_SUM_TOL:
        raise InvalidWeights(f"weights must sum to 1, got {w1 + w2 + w3!r}")
    positive = all(w > 0 for w in weights)
    nonnegative = all(w >= 0 for w in weights)
    if not positive and not (allow_degenerate_weights and nonnegative):
        raise InvalidWeights(f"weights must be positive, got {weights}")
    s_crit, f_crit, z_crit = thresholds
    if min(thresholds) <= 0:
        raise InvalidWeights(f"critical thresholds must be positive, got {thresholds}")
    raw = w1 * features.slope / s_crit + w2 * features.flatness / f_crit + w3 * features.step_height / z_crit
    tau = np.clip(raw, 0.0, 1.0)
    return TraversabilityMap(
        tau=tau, weights=(w1, w2, w3), thresholds=(s_crit, f_crit, z_crit), origin=origin, cell_size=cell_size
    )


def traversability_from_grid(
    grid: TerrainGrid,
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS,
    thresholds: tuple[float, float, float] = (1.0, 1.0, 1.0),
    window: int = DEFAULT_WINDOW,
) -> TraversabilityMap:
    features = compute_feature_maps(grid, window=window)
    return compute_traversability(
        features, weights=weights, thresholds=thresholds, origin=grid.origin, cell_size=grid.cell_size
    )


def is_traversable(tmap: TraversabilityMap, p: Point2, tau_max: float) -> bool:
    """True iff the interpolated tau at p does not exceed tau_max."""
    return tmap.value_at(p) <= tau_max


def tau_to_csv(tmap: TraversabilityMap) -> str:
    lines = [",".join(f"{v:.6f}" for v in row) for row in tmap.tau]
    return "\n".join(lines) + "\n"


def tau_to_pgm(tmap: TraversabilityMap) -> str:
    """ASCII PGM image; traversable (tau=0) renders white, critical black."""
    rows, cols = tmap.tau.shape
    gray = np.round((1.0 - tmap.tau) * 255).astype(int)
    body = "\n".join(" ".join(str(v) for v in row) for row in gray[::-1])
    return f"P2\n{cols} {rows}\n255\n{body}\n"
