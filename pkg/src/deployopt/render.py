"""Deterministic SVG rendering of scenarios, selections, paths, and
traversability heatmaps. Same inputs always produce byte-identical output:
floats are written with fixed precision and elements in input order.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .geometry import Point2, TerrainGrid, Workspace2D
from .scenario import Scenario
from .terrain import TraversabilityMap

_CANVAS = 760.0
_PAD = 20.0


class _Frame:
    def __init__(self, xmin, ymin, xmax, ymax):
        extent = max(xmax - xmin, ymax - ymin)
        self.scale = _CANVAS / extent
        self.xmin, self.ymin, self.ymax = xmin, ymin, ymax
        self.width = (xmax - xmin) * self.scale + 2 * _PAD
        self.height = (ymax - ymin) * self.scale + 2 * _PAD
        self.marker = max(3.0, 0.009 * _CANVAS)

    def x(self, v: float) -> float:
        return (v - self.xmin) * self.scale + _PAD

    def y(self, v: float) -> float:
        return (self.ymax - v) * self.scale + _PAD

    def pt(self, p: Point2) -> str:
        return f"{self.x(p.x):.3f},{self.y(p.y):.3f}"


def _svg_open(frame: _Frame) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{frame.width:.0f}" '
        f'height="{frame.height:.0f}" viewBox="0 0 {frame.width:.3f} {frame.height:.3f}">',
        f'<rect x="0" y="0" width="{frame.width:.3f}" height="{frame.height:.3f}" fill="#ffffff"/>',
    ]


def _tau_cells(tmap: TraversabilityMap, frame: _Frame) -> list[str]:
    rows, cols = tmap.shape
    cell = tmap.cell_size * frame.scale
    out = []
    gray = np.round((1.0 - tmap.tau) * 255).astype(int)
    for r in range(rows):
        cy = tmap.origin.y + r * tmap.cell_size
        for c in range(cols):
            cx = tmap.origin.x + c * tmap.cell_size
            g = gray[r, c]
            out.append(
                f'<rect x="{frame.x(cx) - cell / 2:.3f}" y="{frame.y(cy) - cell / 2:.3f}" '
                f'width="{cell:.3f}" height="{cell:.3f}" fill="rgb({g},{g},{g})"/>'
            )
    return out


def scenario_svg(
    scenario: Scenario,
    selected: list[int] | None = None,
    path: list[Point2] | None = None,
    tau: TraversabilityMap | None = None,
) -> str:
    """Scene with obstacles or terrain heatmap, targets as filled dots,
    candidates as hollow markers, selected sites emphasized, paths as
    polylines."""
    geometry = scenario.geometry
    if isinstance(geometry, TerrainGrid):
        rect = geometry.footprint
    else:
        rect = geometry.bounds
    frame = _Frame(rect.xmin, rect.ymin, rect.xmax, rect.ymax)
    parts = _svg_open(frame)

    if tau is not None:
        parts.extend(_tau_cells(tau, frame))
    if isinstance(geometry, Workspace2D):
        for poly in geometry.obstacles:
            pts = " ".join(frame.pt(v) for v in poly.vertices)
            parts.append(f'<polygon points="{pts}" fill="#9ca3af" stroke="#4b5563" stroke-width="1"/>')
    parts.append(
        f'<rect x="{frame.x(rect.xmin):.3f}" y="{frame.y(rect.ymax):.3f}" '
        f'width="{(rect.xmax - rect.xmin) * frame.scale:.3f}" '
        f'height="{(rect.ymax - rect.ymin) * frame.scale:.3f}" fill="none" stroke="#111827" stroke-width="1"/>'
    )

    if path is not None and len(path) >= 2:
        pts = " ".join(frame.pt(p) for p in path)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#dc2626" stroke-width="2.5"/>')

    r = frame.marker
    for t in scenario.targets:
        parts.append(f'<circle cx="{frame.x(t.x):.3f}" cy="{frame.y(t.y):.3f}" r="{0.6 * r:.3f}" fill="#dc2626"/>')
    for c in scenario.candidates:
        parts.append(
            f'<circle cx="{frame.x(c.x):.3f}" cy="{frame.y(c.y):.3f}" r="{0.8 * r:.3f}" '
            f'fill="none" stroke="#374151" stroke-width="1.2"/>'
        )
    for idx in selected or []:
        p = scenario.candidates[idx]
        parts.append(
            f'<circle cx="{frame.x(p.x):.3f}" cy="{frame.y(p.y):.3f}" r="{1.4 * r:.3f}" '
            f'fill="#2563eb" stroke="#1e3a8a" stroke-width="1.5"/>'
        )
    if path is not None and path:
        for p, color in ((path[0], "#16a34a"), (path[-1], "#7c3aed")):
            parts.append(
                f'<circle cx="{frame.x(p.x):.3f}" cy="{frame.y(p.y):.3f}" r="{0.9 * r:.3f}" '
                f'fill="{color}" stroke="#111827" stroke-width="1"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_svg(svg_text: str, out_path) -> Path:
    """Write rendered SVG to disk; parent directories are created."""
    p = Path(out_path)
    p.parent.mkdir(parents=True, exist_ok=True)
    try:
        p.write_text(svg_text)
    except OSError as exc:
        raise OSError(f"could not write SVG to {p}: {exc}") from exc
    return p
