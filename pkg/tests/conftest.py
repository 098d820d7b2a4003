import json
from importlib import resources
from pathlib import Path

import pytest

from deployopt.geometry import Point2, Polygon, Rect, Workspace2D


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return Path(resources.files("deployopt")) / "data"


@pytest.fixture(scope="session")
def load_doc(data_dir):
    def _load(name: str) -> dict:
        return json.loads((data_dir / name).read_text())

    return _load


@pytest.fixture()
def square_workspace() -> Workspace2D:
    square = Polygon((Point2(4, 4), Point2(8, 4), Point2(8, 8), Point2(4, 8)))
    return Workspace2D(Rect(0, 0, 12, 12), (square,))


@pytest.fixture()
def empty_workspace() -> Workspace2D:
    return Workspace2D(Rect(0, 0, 20, 20))


# Four rectangles that seal a pocket around (6, 6); nothing inside can be
# reached from outside.
ENCLOSURE_VERTS = [
    [[3, 3], [9, 3], [9, 4], [3, 4]],
    [[3, 8], [9, 8], [9, 9], [3, 9]],
    [[3, 4], [4, 4], [4, 8], [3, 8]],
    [[8, 4], [9, 4], [9, 8], [8, 8]],
]


@pytest.fixture()
def enclosure_workspace() -> Workspace2D:
    polys = tuple(Polygon(tuple(Point2(*v) for v in verts)) for verts in ENCLOSURE_VERTS)
    return Workspace2D(Rect(0, 0, 12, 12), polys)
