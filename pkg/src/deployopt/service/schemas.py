"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

Metric = Literal["euclidean", "visgraph", "rrtstar", "rrtstar_unweighted", "rrtstar-unweighted"]
Task = Literal["fair-access", "hotspot"]


class DeployRequest(BaseModel):
    scenario: dict
    metric: Metric
    task: Optional[Task] = None
    seed: Optional[int] = None
    use_cache: bool = True
    cache_dir: Optional[str] = None
    threads: int = Field(default=0, ge=0)


class GreedyResultModel(BaseModel):
    selected: list[int]
    gains: list[float]
    value: float
    guarantee: str
    evaluations: int


class RunReport(BaseModel):
    schema_version: int
    scenario_hash: str
    metric: str
    task: str
    seed: int
    result: GreedyResultModel
    max_target_distance: float
    assignments: list[int]
    warnings: list[str]
    timings: dict[str, float]


class DeployResponse(BaseModel):
    report: RunReport
    svg: str


class MatrixRequest(BaseModel):
    scenario: dict
    metric: Metric
    seed: Optional[int] = None
    use_cache: bool = True
    cache_dir: Optional[str] = None
    threads: int = Field(default=0, ge=0)


class MatrixResponse(BaseModel):
    csv: str
    meta: dict


class TerrainRequest(BaseModel):
    scenario: dict


class TerrainResponse(BaseModel):
    csv: str
    pgm: str
    svg: str


class PathRequest(BaseModel):
    scenario: dict
    start: tuple[float, float]
    end: tuple[float, float]
    metric: Optional[Metric] = None
    seed: Optional[int] = None


class PathResponse(BaseModel):
    reachable: bool
    distance: Optional[float]
    polyline: list[tuple[float, float]]
    svg: str


class VerifyRequest(BaseModel):
    scenario: dict
    metric: Metric = "euclidean"
    task: Optional[Task] = None
    trials: int = Field(default=200, ge=1)
    seed: int = 0


class VerifyResponse(BaseModel):
    schema_version: int
    scenario_hash: str
    metric: str
    task: str
    exhaustive: bool
    checks: int
    monotone_violations: int
    submodular_violations: int
    greedy_value: float
    greedy_selected: list[int]
    brute_force_value: float
    brute_force_selected: list[int]
    guarantee: str
    guarantee_satisfied: bool
    clean: bool


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorBody(BaseModel):
    error_class: str
    detail: str
