"""deployopt: agent placement over obstacle-aware and traversability-aware
shortest-path distances via greedy submodular coverage maximization."""

__version__ = "0.1.0"

from .errors import UNREACHABLE, DeployError
from .geometry import Point2, Polygon, Rect, TerrainGrid, Workspace2D
from .scenario import Scenario, load_scenario, scenario_from_dict

__all__ = [
    "__version__",
    "UNREACHABLE",
    "DeployError",
    "Point2",
    "Polygon",
    "Rect",
    "TerrainGrid",
    "Workspace2D",
    "Scenario",
    "load_scenario",
    "scenario_from_dict",
]
