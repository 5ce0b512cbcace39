"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator


class MeshPayload(BaseModel):
    dim: int = Field(ge=1)
    vertices: list[list[float]]
    cells: list[list[int]]
    colors: list[int] | None = None
    tags: list[int] | None = None
    gens: list[int] | None = None
    ancestors: list[int] | None = None
    max_color: int | None = None

    def to_mesh_dict(self) -> dict:
        return self.model_dump(exclude_none=True)

    @classmethod
    def from_mesh_dict(cls, d: dict) -> "MeshPayload":
        return cls(**d)


class HistoryPayload(BaseModel):
    initial_cells: int
    entries: list[list[int]]


class ColorRequest(BaseModel):
    mesh: MeshPayload
    order: Literal["id", "valency"] = "id"


class InitRequest(BaseModel):
    mesh: MeshPayload


class RefineRequest(BaseModel):
    mesh: MeshPayload
    marks: list[int] | None = None
    point: list[float] | None = None
    random: bool = False
    seed: int = 0
    iters: int = Field(default=1, ge=1)
    log: bool = False

    @model_validator(mode="after")
    def _one_source(self):
        n = (self.marks is not None) + (self.point is not None) + bool(self.random)
        if n != 1:
            raise ValueError("exactly one of marks/point/random must be set")
        return self


class UniformRequest(BaseModel):
    mesh: MeshPayload
    rounds: int = Field(default=1, ge=0)


class CheckRequest(BaseModel):
    mesh: MeshPayload
    deep: bool = False


class StatsRequest(BaseModel):
    mesh: MeshPayload
    initial: MeshPayload | None = None
    history: HistoryPayload | None = None


class ExportRequest(BaseModel):
    mesh: MeshPayload


class MeshResponse(BaseModel):
    mesh: MeshPayload
    log: list[dict] | None = None
    history: HistoryPayload | None = None


class CheckResponse(BaseModel):
    ok: bool
    violations: list[dict]


class StatsResponse(BaseModel):
    report: dict


class ExportResponse(BaseModel):
    vtk: str
    warning: str | None = None


class FixtureListResponse(BaseModel):
    names: list[str]


class ErrorBody(BaseModel):
    error: str
    message: str
