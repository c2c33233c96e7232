"""HTTP facade for the schematic studio.

Stateless by default: the model travels in each request body using the
model-file schema.  Sessions exist only as sweep jobs whose progress the
studio polls.  Status codes form the contract:

  400  malformed model (parse errors, unknown families/species)
  422  model loads but is not well-posed, or a semantic precondition fails
  409  solver failure (non-convergence, unphysical solution) with the trace
  500  never for user-input errors
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import __version__
from .components import FAMILIES, Component
from .errors import (
    CycleError,
    NonPhysicalSizing,
    NotWellPosed,
    OverrideNotBoundary,
    ParseError,
    PressureRise,
    ReversePressureGradient,
    SolveFailed,
    UnknownComponentFamily,
    UnknownSpecies,
)
from .modelio import bundled_models, model_from_dict, model_to_dict
from .network import validate
from .solver import SolverConfig, sweep
from .workflow import run_design, run_offdesign

_MALFORMED = (ParseError, UnknownComponentFamily, UnknownSpecies)
_SEMANTIC = (NotWellPosed, OverrideNotBoundary)
_SOLVER = (SolveFailed, NonPhysicalSizing, PressureRise, ReversePressureGradient)


def palette() -> list[dict]:
    """Machine-readable component palette, generated from the registry."""
    out = []
    for name, fam in FAMILIES.items():
        template = Component(family=name, name="template", params={})
        entry = {
            "family": name,
            "doc": fam.doc,
            "ports": [
                {"name": p.name, "kind": p.kind, "direction": p.direction}
                for p in fam.ports(template)
            ],
            "dynamic_ports": name == "shaft",
            "params": [
                {
                    "name": p.name,
                    "role": p.role,
                    "unit": p.unit,
                    "default": p.default if not isinstance(p.default, tuple)
                               else list(p.default),
                    "required": p.required,
                    "kind": p.kind,
                }
                for p in fam.params
            ],
            "spec_quantities": sorted(fam.spec_targets),
        }
        out.append(entry)
    return out


@dataclass
class SweepJob:
    job_id: str
    total: int
    completed: int = 0
    done: bool = False
    error: str | None = None
    points: list = field(default_factory=list)


class JobStore:
    def __init__(self):
        self._jobs: dict[str, SweepJob] = {}
        self._lock = threading.Lock()

    def create(self, total: int) -> SweepJob:
        job = SweepJob(job_id=uuid.uuid4().hex, total=total)
        with self._lock:
            self._jobs[job.job_id] = job
        return job

    def get(self, job_id: str) -> SweepJob | None:
        with self._lock:
            return self._jobs.get(job_id)


def _result_body(result) -> dict:
    return {
        "status": result.status,
        "iterations": result.iterations,
        "residual_norm": result.residual_norm,
        "values": {k: float(v) for k, v in result.values.items()},
        "trace": result.trace,
        "message": result.message,
    }


def _point_body(point) -> dict:
    return {
        "value": point.value,
        "status": point.status,
        "solution": point.solution,
        "metrics": point.metrics,
        "residual_norm": point.residual_norm,
        "error": point.error,
    }


def _solver_config(body: dict) -> SolverConfig | None:
    opts = body.get("solver") or {}
    return SolverConfig(**opts) if opts else None


def create_app() -> FastAPI:
    app = FastAPI(title="cyclesim service", version=__version__)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])
    jobs = JobStore()

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": "malformed request body",
                                     "detail": str(exc)})

    @app.exception_handler(CycleError)
    async def cycle_error(request: Request, exc: CycleError):
        if isinstance(exc, _MALFORMED):
            detail = getattr(exc, "diagnostics", [str(exc)])
            return JSONResponse(status_code=400,
                                content={"error": "malformed model",
                                         "diagnostics": detail})
        if isinstance(exc, _SEMANTIC):
            return JSONResponse(status_code=422,
                                content={"error": str(exc)})
        if isinstance(exc, _SOLVER):
            body = {"error": str(exc)}
            result = getattr(exc, "result", None)
            if result is not None:
                body["trace"] = result.trace
                body["status"] = result.status
            return JSONResponse(status_code=409, content=body)
        return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.get("/api/v1/components")
    def get_components():
        return palette()

    @app.get("/api/v1/examples")
    def get_examples():
        out = []
        for name, path in bundled_models().items():
            import json

            raw = json.loads(path.read_text())
            out.append({"name": name, "description": raw.get("description", "")})
        return out

    @app.get("/api/v1/examples/{name}")
    def get_example(name: str):
        paths = bundled_models()
        if name not in paths:
            return JSONResponse(status_code=404,
                                content={"error": f"no bundled model {name!r}"})
        import json

        return json.loads(paths[name].read_text())

    @app.post("/api/v1/models/validate")
    def post_validate(body: dict):
        model = model_from_dict(_model_section(body))
        report = validate(model)
        status = 200 if report.is_well_posed else 422
        return JSONResponse(status_code=status, content=report.as_dict())

    @app.post("/api/v1/design")
    def post_design(body: dict):
        model = model_from_dict(_model_section(body))
        sized = run_design(model, specs=body.get("specs"),
                           config=_solver_config(body))
        return {
            "result": _result_body(sized.design_result),
            "metrics": sized.design_metrics.as_dict(),
            "provenance": sized.provenance,
            "sized_model": model_to_dict(sized.model),
        }

    @app.post("/api/v1/simulate")
    def post_simulate(body: dict):
        model = model_from_dict(_model_section(body))
        outcome = run_offdesign(model, boundary_overrides=body.get("overrides"),
                                config=_solver_config(body))
        return {
            "result": _result_body(outcome.result),
            "metrics": outcome.metrics.as_dict(),
        }

    def _sweep_args(body: dict):
        model = model_from_dict(_model_section(body))
        param = body.get("param")
        if not param:
            raise NotWellPosed("sweep requires a 'param' path")
        if "values" in body:
            values = [float(v) for v in body["values"]]
        else:
            try:
                lo, hi = float(body["from"]), float(body["to"])
                steps = int(body["steps"])
            except (KeyError, TypeError, ValueError):
                raise NotWellPosed(
                    "sweep requires 'values' or 'from'/'to'/'steps'") from None
            if steps < 1:
                raise NotWellPosed("steps must be >= 1")
            if steps == 1:
                values = [lo]
            else:
                values = [lo + i * (hi - lo) / (steps - 1) for i in range(steps)]
        return model, param, values, body.get("free"), _solver_config(body)

    @app.post("/api/v1/sweep")
    def post_sweep(body: dict):
        model, param, values, free, config = _sweep_args(body)
        if body.get("async"):
            job = jobs.create(total=len(values))

            def runner():
                def on_point(point):
                    job.points.append(_point_body(point))
                    job.completed += 1

                try:
                    sweep(model, param, values, config=config, free=free,
                          on_point=on_point)
                except CycleError as exc:
                    job.error = str(exc)
                job.done = True

            threading.Thread(target=runner, daemon=True).start()
            return {"job_id": job.job_id, "total": job.total}
        table = sweep(model, param, values, config=config, free=free)
        return {
            "param": table.param_path,
            "points": [_point_body(p) for p in table.points],
            "all_converged": table.all_converged,
        }

    @app.get("/api/v1/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return JSONResponse(status_code=404,
                                content={"error": f"no job {job_id!r}"})
        return {
            "job_id": job.job_id,
            "done": job.done,
            "progress": {"completed": job.completed, "total": job.total},
            "points": job.points,
            "error": job.error,
        }

    return app


def _model_section(body: dict) -> dict:
    model = body.get("model")
    if not isinstance(model, dict):
        raise ParseError("request body must carry a 'model' object")
    return model


app = create_app()
