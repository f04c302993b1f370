"""HTTP JSON service backing the web planner.

Stateless apart from the loaded model: an identical request with the
same master seed produces an identical response body (excluding the
elapsed-time field).
"""

from __future__ import annotations

import secrets
import time
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict, Field

from . import diagnostics
from .econometrics import ModelSpec
from .engine import (
    MAX_HORIZON,
    Cashflow,
    ConfigError,
    FactorOverrides,
    SimConfig,
    run_ensemble,
)

MAX_PATHS = 100_000

#: Accepted ranges for user-supplied initial factor values.
FACTOR_RANGES = {
    "vol": (0.1, 150.0),
    "rate": (0.1, 30.0),
    "spread": (-10.0, 10.0),
    "valuation": (-5.0, 5.0),
}


class CashflowIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    amount: float = Field(0.0, ge=0)
    sign: Literal["contribute", "withdraw"] = "withdraw"
    growth_rate: float = Field(0.0, gt=-1)
    frequency: Literal[1, 4, 12] = 1


class FactorOverridesIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    vol: Optional[float] = Field(None, ge=FACTOR_RANGES["vol"][0], le=FACTOR_RANGES["vol"][1])
    rate: Optional[float] = Field(None, ge=FACTOR_RANGES["rate"][0], le=FACTOR_RANGES["rate"][1])
    spread: Optional[float] = Field(
        None, ge=FACTOR_RANGES["spread"][0], le=FACTOR_RANGES["spread"][1]
    )
    valuation: Optional[float] = Field(
        None, ge=FACTOR_RANGES["valuation"][0], le=FACTOR_RANGES["valuation"][1]
    )


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    initial_wealth: float = Field(gt=0)
    horizon: int = Field(ge=1, le=MAX_HORIZON)
    stock_share_start: float = Field(ge=0, le=1)
    stock_share_end: float = Field(ge=0, le=1)
    domestic_share: float = Field(ge=0, le=1)
    cashflow: CashflowIn = CashflowIn()
    n_paths: int = Field(10_000, ge=100, le=MAX_PATHS)
    master_seed: Optional[int] = Field(None, ge=0)
    factor_overrides: Optional[FactorOverridesIn] = None
    allow_nonstationary: bool = False

    def to_config(self) -> SimConfig:
        overrides = None
        if self.factor_overrides is not None:
            overrides = FactorOverrides(
                vol=self.factor_overrides.vol,
                rate=self.factor_overrides.rate,
                spread=self.factor_overrides.spread,
                valuation=self.factor_overrides.valuation,
            )
        seed = self.master_seed if self.master_seed is not None else secrets.randbits(62)
        config = SimConfig(
            initial_wealth=self.initial_wealth,
            horizon=self.horizon,
            stock_share_start=self.stock_share_start,
            stock_share_end=self.stock_share_end,
            domestic_share=self.domestic_share,
            cashflow=Cashflow(
                amount=self.cashflow.amount,
                sign=self.cashflow.sign,
                growth_rate=self.cashflow.growth_rate,
                frequency=self.cashflow.frequency,
            ),
            n_paths=self.n_paths,
            master_seed=seed,
            factor_overrides=overrides,
            allow_nonstationary=self.allow_nonstationary,
        )
        config.validate()
        return config


def _model_summary(model: ModelSpec) -> dict:
    data = model.to_dict()
    summary = {
        key: data[key]
        for key in ("version", "window", "vol", "rate", "spread", "growth", "domestic", "intl", "bond", "gate")
    }
    summary["valuation"] = {
        k: data["valuation"][k] for k in ("alpha", "beta", "gamma", "slope_b", "trend_c", "mean_h", "window")
    }
    matrix = model.residuals
    residual_reports = {}
    for name in matrix.series_names:
        column = matrix.column(name)
        report = diagnostics.describe(column[~np.isnan(column)])
        residual_reports[name] = {
            "n": report.n,
            "stdev": report.stdev,
            "skew": report.skew,
            "kurt": report.kurt,
            "sw_p": report.sw_p,
            "jb_p": report.jb_p,
            "l1_original": report.l1_original,
            "l1_absolute": report.l1_absolute,
        }
    summary["residual_diagnostics"] = residual_reports
    if matrix.correlation is not None:
        summary["residual_correlation"] = {
            "names": list(matrix.correlation_names),
            "matrix": [[float(v) for v in row] for row in matrix.correlation],
        }
    return summary


def create_app(model: ModelSpec, static_dir: Optional[Path] = None, max_workers: int = 4) -> FastAPI:
    """Build the service around one immutable fitted model."""
    app = FastAPI(title="trisim", version=model.version, docs_url="/docs")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        errors = [
            {
                "field": ".".join(str(part) for part in err["loc"] if part != "body") or "body",
                "message": err["msg"],
            }
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.get("/healthz", response_class=PlainTextResponse)
    async def healthz() -> str:
        return "ok"

    @app.get("/api/defaults")
    async def defaults() -> dict:
        init = model.initial_state
        return {
            "initial_factors": {
                "year": init.year,
                "vol": init.vol,
                "rate": init.rate,
                "spread": init.spread,
                "valuation": init.valuation,
            },
            "factor_ranges": {k: {"min": lo, "max": hi} for k, (lo, hi) in FACTOR_RANGES.items()},
            "horizon": {"min": 1, "max": MAX_HORIZON},
            "share_range": {"min": 0.0, "max": 1.0},
            "n_paths": {"default": 10_000, "min": 100, "max": MAX_PATHS},
            "cashflow_frequencies": [1, 4, 12],
            "stationary": model.gate.passed,
        }

    @app.get("/api/model")
    async def model_view() -> dict:
        return _model_summary(model)

    @app.post("/api/simulate")
    async def simulate(request: SimulateRequest):
        if not model.gate.passed and not request.allow_nonstationary:
            return JSONResponse(
                status_code=409,
                content={
                    "errors": [
                        {
                            "field": "allow_nonstationary",
                            "message": "model failed the stationarity gate; set allow_nonstationary to force",
                        }
                    ]
                },
            )
        try:
            config = request.to_config()
        except ConfigError as exc:
            return JSONResponse(
                status_code=400, content={"errors": [{"field": exc.field, "message": str(exc)}]}
            )
        started = time.perf_counter()
        result = run_ensemble(model, config, workers=max_workers)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        body = result.to_dict()
        body["model_version"] = model.version
        body["elapsed_ms"] = elapsed_ms
        return body

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="webui")

    return app
