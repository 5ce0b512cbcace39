"""FastAPI service exposing the refinement pipeline.

The service is stateless: every request carries the mesh payload and the
response carries the transformed mesh or a report.  The CLI drives the same
handlers in-process.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import pipeline
from ..errors import MeshError
from ..fixtures import FIXTURE_NAMES, fixture_mesh
from .schemas import (
    CheckRequest,
    CheckResponse,
    ColorRequest,
    ExportRequest,
    ExportResponse,
    FixtureListResponse,
    HistoryPayload,
    InitRequest,
    MeshPayload,
    MeshResponse,
    RefineRequest,
    StatsRequest,
    StatsResponse,
    UniformRequest,
)


def handle_color(req: ColorRequest) -> MeshResponse:
    out = pipeline.op_color(req.mesh.to_mesh_dict(), order=req.order)
    return MeshResponse(mesh=MeshPayload.from_mesh_dict(out))


def handle_init(req: InitRequest) -> MeshResponse:
    out = pipeline.op_init(req.mesh.to_mesh_dict())
    return MeshResponse(mesh=MeshPayload.from_mesh_dict(out))


def handle_refine(req: RefineRequest) -> MeshResponse:
    out, log, history = pipeline.op_refine(
        req.mesh.to_mesh_dict(),
        marks=req.marks,
        point=req.point,
        random_marks=req.random,
        seed=req.seed,
        iters=req.iters,
        want_log=req.log,
    )
    return MeshResponse(
        mesh=MeshPayload.from_mesh_dict(out),
        log=log if req.log else None,
        history=HistoryPayload(**history),
    )


def handle_uniform(req: UniformRequest) -> MeshResponse:
    out = pipeline.op_uniform(req.mesh.to_mesh_dict(), rounds=req.rounds)
    return MeshResponse(mesh=MeshPayload.from_mesh_dict(out))


def handle_check(req: CheckRequest) -> CheckResponse:
    return CheckResponse(**pipeline.op_check(req.mesh.to_mesh_dict(), deep=req.deep))


def handle_stats(req: StatsRequest) -> StatsResponse:
    report = pipeline.op_stats(
        req.mesh.to_mesh_dict(),
        initial=req.initial.to_mesh_dict() if req.initial else None,
        history=req.history.model_dump() if req.history else None,
    )
    return StatsResponse(report=report)


def handle_export(req: ExportRequest) -> ExportResponse:
    vtk, warning = pipeline.op_export(req.mesh.to_mesh_dict())
    return ExportResponse(vtk=vtk, warning=warning)


def create_app() -> FastAPI:
    app = FastAPI(
        title="bisectmesh",
        description="Conforming simplicial mesh refinement by colored newest-vertex bisection",
        version="0.1.0",
    )

    @app.exception_handler(MeshError)
    async def mesh_error_handler(_: Request, exc: MeshError):
        return JSONResponse(
            status_code=422,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.get("/fixtures", response_model=FixtureListResponse)
    async def fixtures():
        return FixtureListResponse(names=list(FIXTURE_NAMES))

    @app.get("/fixtures/{name}", response_model=MeshPayload)
    async def fixture(name: str):
        try:
            return MeshPayload.from_mesh_dict(fixture_mesh(name))
        except KeyError as exc:
            return JSONResponse(status_code=404,
                                content={"error": "UnknownFixture", "message": str(exc)})

    @app.post("/color", response_model=MeshResponse)
    async def color(req: ColorRequest):
        return handle_color(req)

    @app.post("/init", response_model=MeshResponse)
    async def init(req: InitRequest):
        return handle_init(req)

    @app.post("/refine", response_model=MeshResponse)
    async def refine(req: RefineRequest):
        return handle_refine(req)

    @app.post("/uniform", response_model=MeshResponse)
    async def uniform(req: UniformRequest):
        return handle_uniform(req)

    @app.post("/check", response_model=CheckResponse)
    async def check(req: CheckRequest):
        return handle_check(req)

    @app.post("/stats", response_model=StatsResponse)
    async def stats(req: StatsRequest):
        return handle_stats(req)

    @app.post("/export", response_model=ExportResponse)
    async def export(req: ExportRequest):
        return handle_export(req)

    return app


app = create_app()
