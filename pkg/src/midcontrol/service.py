"""HTTP service over a loaded model: predict, control, relevance, model info.

Inputs arrive raw-scale; the stored normalization maps them into model space
and adjusted values are mapped back before they leave.  The model snapshot is
immutable, so handlers are safe under concurrent requests; control requests
use a request-local RNG seed.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from .control import CONTROLLABLE_VARIABLES, ControlProblem, control_dyad
from .data import LIBERAL_VARIABLES
from .evidence import EvidenceModel


class DyadFeatures(BaseModel):
    democracy: float = Field(ge=-10, le=10)
    allies: float
    contingency: float
    distance: float
    capability: float
    dependency: float = Field(ge=0)
    major_power: float

    @field_validator("allies", "contingency", "major_power")
    @classmethod
    def binary(cls, v, info):
        if v not in (0.0, 1.0):
            raise ValueError(f"{info.field_name} must be 0 or 1")
        return v

    def row(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in LIBERAL_VARIABLES], dtype=float)


class ControlRequest(DyadFeatures):
    strategy: str = "multi"
    threshold: float = Field(default=0.5, gt=0, lt=1)
    seed: int = 0

    @field_validator("strategy")
    @classmethod
    def known_strategy(cls, v):
        if v == "multi" or (v.startswith("single:") and
                            v.split(":", 1)[1] in CONTROLLABLE_VARIABLES):
            return v
        raise ValueError(
            f"strategy must be 'multi' or 'single:<var>' with var in {CONTROLLABLE_VARIABLES}")


def create_app(model, metadata: dict | None = None) -> FastAPI:
    if model.normalization is None:
        raise ValueError("served models must carry a normalization spec")
    spec = model.normalization
    app = FastAPI(title="midcontrol", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def validation_to_400(request: Request, exc: RequestValidationError):
        details = [
            {"field": ".".join(str(p) for p in err["loc"] if p != "body"),
             "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"errors": details})

    def raw_dict(x_norm: np.ndarray) -> dict:
        raw = spec.denormalize_row(x_norm)
        return {name: float(raw[i]) for i, name in enumerate(LIBERAL_VARIABLES)}

    @app.post("/api/predict")
    def predict(features: DyadFeatures):
        x = spec.normalize_row(features.row())
        return {"p_conflict": float(model.predict(x))}

    @app.post("/api/control")
    def control(req: ControlRequest):
        x = spec.normalize_row(req.row())
        prob = ControlProblem(model=model, x=x, threshold=req.threshold, seed=req.seed)
        out = control_dyad(prob, req.strategy)
        body = {
            "p_before": out.p_before,
            "p_after": out.p_after,
            "success": out.success,
            "adjusted": raw_dict(out.adjusted),
            "evaluations": out.evaluations,
            "rounded_allies_variant": None,
        }
        if out.adjusted_rounded is not None:
            body["rounded_allies_variant"] = {
                "adjusted": raw_dict(out.adjusted_rounded),
                "p_after": out.p_after_rounded,
                "success": out.success_rounded,
            }
        if out.diagnostics:
            body["diagnostics"] = out.diagnostics
        return body

    @app.get("/api/ard")
    def ard():
        d = model.arch.d
        names = model.hp.group_names[:d]
        if tuple(names) != tuple(LIBERAL_VARIABLES)[:d]:
            return JSONResponse(
                status_code=400,
                content={"errors": [{"field": "model",
                                     "message": "model was not trained with per-input groups"}]})
        alphas = np.asarray(model.hp.alphas[:d], dtype=float)
        relevances = 1.0 / alphas
        normalized = relevances / relevances.sum()
        return {"relevances": [
            {"variable": name, "relevance": float(r), "normalized": float(n)}
            for name, r, n in zip(names, relevances, normalized)
        ]}

    @app.get("/api/model")
    def model_info():
        return {
            "method": "gaussian" if isinstance(model, EvidenceModel) else "hmc",
            "architecture": {
                "d": model.arch.d, "M": model.arch.M, "K": model.arch.K,
                "f_inner": model.arch.f_inner, "f_outer": model.arch.f_outer,
            },
            "metadata": metadata or {},
        }

    return app
