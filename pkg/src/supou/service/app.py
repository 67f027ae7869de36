"""HTTP service exposing the pipelines.

Configuration problems (bad measures, laws, grids, parameters) map to 422;
numerical failures inside an otherwise valid computation map to 500.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import pipeline
from ..config import (CorrelationRequest, CumulantsRequest, ScalingRequest,
                      SimulateRequest, VerifyRequest, default_config)
from ..errors import ComputationError, ConfigurationError


def create_app() -> FastAPI:
    app = FastAPI(title="supou", description="cumulant growth of aggregated "
                  "Ornstein-Uhlenbeck superpositions")

    @app.exception_handler(ConfigurationError)
    async def _config_error(request: Request, exc: ConfigurationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ComputationError)
    async def _computation_error(request: Request, exc: ComputationError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health")
    async def health() -> dict:
        return {"status": "ok"}

    @app.get("/config/default")
    async def config_default() -> dict:
        return default_config()

    @app.post("/correlation", response_model=pipeline.CorrelationResponse)
    async def correlation(req: CorrelationRequest):
        return pipeline.run_correlation(req)

    @app.post("/cumulants", response_model=pipeline.CumulantsResponse)
    async def cumulants(req: CumulantsRequest):
        return pipeline.run_cumulants(req)

    @app.post("/scaling", response_model=pipeline.ScalingResponse)
    async def scaling(req: ScalingRequest):
        return pipeline.run_scaling(req)

    @app.post("/simulate", response_model=pipeline.SimulateResponse)
    async def simulate(req: SimulateRequest):
        return pipeline.run_simulate(req)

    @app.post("/verify", response_model=pipeline.VerifyResponse)
    async def verify(req: VerifyRequest):
        return pipeline.run_verify(req)

    return app
