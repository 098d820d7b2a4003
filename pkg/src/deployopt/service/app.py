"""FastAPI application wrapping the deployment pipeline.

Domain exceptions surface as JSON bodies carrying an ``error_class`` the CLI
maps onto its exit-code contract.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, runner
from ..errors import DeployError
from .schemas import (
    DeployRequest,
    DeployResponse,
    HealthResponse,
    MatrixRequest,
    MatrixResponse,
    PathRequest,
    PathResponse,
    TerrainRequest,
    TerrainResponse,
    VerifyRequest,
    VerifyResponse,
)

_STATUS_BY_CLASS = {
    "parse": 400,
    "validation": 422,
    "metric_mismatch": 409,
    "runtime": 500,
}


def create_app() -> FastAPI:
    app = FastAPI(title="deployopt service", version=__version__)

    @app.exception_handler(DeployError)
    async def deploy_error_handler(_request: Request, exc: DeployError):
        status = _STATUS_BY_CLASS.get(exc.error_class, 500)
        return JSONResponse(status_code=status, content={"error_class": exc.error_class, "detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/deploy", response_model=DeployResponse)
    def deploy(req: DeployRequest) -> DeployResponse:
        outcome = runner.run_deploy(
            req.scenario,
            metric=req.metric,
            task=req.task,
            seed=req.seed,
            cache_dir=req.cache_dir,
            use_cache=req.use_cache,
            threads=req.threads,
        )
        return DeployResponse(report=outcome.report, svg=outcome.svg)

    @app.post("/matrix", response_model=MatrixResponse)
    def matrix(req: MatrixRequest) -> MatrixResponse:
        csv, meta = runner.run_matrix(
            req.scenario,
            metric=req.metric,
            seed=req.seed,
            cache_dir=req.cache_dir,
            use_cache=req.use_cache,
            threads=req.threads,
        )
        return MatrixResponse(csv=csv, meta=meta)

    @app.post("/terrain", response_model=TerrainResponse)
    def terrain(req: TerrainRequest) -> TerrainResponse:
        csv, pgm, svg = runner.run_terrain(req.scenario)
        return TerrainResponse(csv=csv, pgm=pgm, svg=svg)

    @app.post("/path", response_model=PathResponse)
    def path(req: PathRequest) -> PathResponse:
        payload, svg = runner.run_path(
            req.scenario, start=req.start, end=req.end, metric=req.metric, seed=req.seed
        )
        return PathResponse(**payload, svg=svg)

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        report = runner.run_verify(
            req.scenario, metric=req.metric, task=req.task, trials=req.trials, seed=req.seed
        )
        return VerifyResponse(**report)

    return app


app = create_app()
