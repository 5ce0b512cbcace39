"""Command-line client for the refinement pipeline.

Each subcommand builds the same request model the HTTP service consumes and
either calls the handler in-process (default) or POSTs it to a running
service (``--server``).  Inputs are mesh JSON files; ``fixture:NAME`` loads
a bundled mesh instead.

Exit codes: 0 success, 1 validation failure (including a nonconforming
mesh under ``check``), 2 I/O or parse errors.  Failures emit one line of
machine-readable JSON on stderr.
"""

from __future__ import annotations

import json
import sys

import click
from pydantic import ValidationError

from . import pipeline
from .errors import MeshError
from .fixtures import FIXTURE_NAMES, fixture_mesh
from .formats import canonical_json
from .service import app as service_app
from .service.app import (
    handle_check,
    handle_color,
    handle_export,
    handle_init,
    handle_refine,
    handle_stats,
    handle_uniform,
)
from .service.schemas import (
    CheckRequest,
    ColorRequest,
    ExportRequest,
    HistoryPayload,
    InitRequest,
    MeshPayload,
    RefineRequest,
    StatsRequest,
    UniformRequest,
)


def _fail(exc: BaseException, code: int):
    sys.stderr.write(json.dumps(
        {"error": type(exc).__name__, "message": str(exc)}) + "\n")
    sys.exit(code)


def _read_mesh(path: str) -> dict:
    try:
        if path.startswith("fixture:"):
            return fixture_mesh(path.split(":", 1)[1])
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        _fail(exc, 2)


def _write_text(path: str, text: str) -> None:
    try:
        if path == "-":
            sys.stdout.write(text)
        else:
            with open(path, "w") as fh:
                fh.write(text)
    except OSError as exc:
        _fail(exc, 2)


def _write_json(path: str, payload) -> None:
    _write_text(path, canonical_json(payload))


def _post(server: str, route: str, body: dict) -> dict:
    import httpx

    resp = httpx.post(server.rstrip("/") + route, json=body, timeout=600.0)
    if resp.status_code != 200:
        _fail(MeshError(f"server returned {resp.status_code}: {resp.text}"), 1)
    return resp.json()


def _run(server: str | None, route: str, request, handler):
    """Dispatch a request model in-process or against a remote service."""
    try:
        if server:
            return _post(server, route, json.loads(request.model_dump_json()))
        return json.loads(handler(request).model_dump_json())
    except (MeshError, ValidationError, ValueError) as exc:
        _fail(exc, 1)


def _mesh_payload(path: str) -> MeshPayload:
    try:
        return MeshPayload.from_mesh_dict(_read_mesh(path))
    except ValidationError as exc:
        _fail(exc, 1)


def _clean_mesh(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


server_option = click.option("--server", default=None, metavar="URL",
                             help="POST to a running service instead of running in-process.")


@click.group()
def main():
    """Conforming simplicial mesh refinement by colored newest-vertex bisection."""


@main.command()
@click.argument("input_path", metavar="MESH")
@click.option("--order", type=click.Choice(["id", "valency"]), default="id",
              help="Vertex order for the greedy colorer.")
@click.option("-o", "--output", required=True, help="Output mesh JSON path.")
@server_option
def color(input_path, order, output, server):
    """Greedily color the initial mesh and store the colors array."""
    req = ColorRequest(mesh=_mesh_payload(input_path), order=order)
    out = _run(server, "/color", req, handle_color)
    _write_json(output, _clean_mesh(out["mesh"]))
    n = max(out["mesh"]["colors"])
    click.echo(f"colored with {n + 1} colors (N = {n})")


@main.command()
@click.argument("input_path", metavar="MESH")
@click.option("-o", "--output", required=True, help="Output mesh JSON path.")
@server_option
def init(input_path, output, server):
    """Validate the coloring and write the tagged initialization."""
    req = InitRequest(mesh=_mesh_payload(input_path))
    out = _run(server, "/init", req, handle_init)
    _write_json(output, _clean_mesh(out["mesh"]))
    click.echo(f"initialized {len(out['mesh']['cells'])} tagged cells")


@main.command()
@click.argument("input_path", metavar="MESH")
@click.option("--marks", "marks_path", default=None, metavar="FILE",
              help="File with one simplex id per line.")
@click.option("--point", default=None, metavar="X,Y[,Z...]",
              help="Mark every simplex containing this point, each iteration.")
@click.option("--random", "random_marks", is_flag=True,
              help="Mark one random live simplex per iteration (seeded).")
@click.option("--seed", default=0, show_default=True, help="Seed for --random.")
@click.option("--iters", default=1, show_default=True, help="Number of iterations.")
@click.option("--log", "log_path", default=None, metavar="FILE",
              help="Write per-call refinement records as JSON lines.")
@click.option("--history", "history_path", default=None, metavar="FILE",
              help="Write the mark history (for the stats command).")
@click.option("-o", "--output", required=True, help="Output mesh JSON path.")
@server_option
def refine(input_path, marks_path, point, random_marks, seed, iters,
           log_path, history_path, output, server):
    """Refine marked simplices with conforming closure."""
    marks = None
    if marks_path is not None:
        try:
            with open(marks_path) as fh:
                marks = [int(line) for line in fh.read().split()]
        except (OSError, ValueError) as exc:
            _fail(exc, 2)
    pt = None
    if point is not None:
        try:
            pt = [float(x) for x in point.split(",")]
        except ValueError as exc:
            _fail(exc, 1)
    try:
        req = RefineRequest(mesh=_mesh_payload(input_path), marks=marks, point=pt,
                            random=random_marks, seed=seed, iters=iters,
                            log=log_path is not None)
    except ValidationError as exc:
        _fail(exc, 1)
    out = _run(server, "/refine", req, handle_refine)
    _write_json(output, _clean_mesh(out["mesh"]))
    if log_path is not None:
        _write_text(log_path, "".join(json.dumps(line, sort_keys=True) + "\n"
                                      for line in out["log"] or []))
    if history_path is not None:
        _write_json(history_path, out["history"])
    click.echo(f"refined to {len(out['mesh']['cells'])} cells")


@main.command()
@click.argument("input_path", metavar="MESH")
@click.option("--rounds", default=1, show_default=True,
              help="Full uniform refinement rounds (n sweeps each).")
@click.option("-o", "--output", required=True, help="Output mesh JSON path.")
@server_option
def uniform(input_path, rounds, output, server):
    """Uniformly refine the whole mesh."""
    req = UniformRequest(mesh=_mesh_payload(input_path), rounds=rounds)
    out = _run(server, "/uniform", req, handle_uniform)
    _write_json(output, _clean_mesh(out["mesh"]))
    click.echo(f"{rounds} round(s): {len(out['mesh']['cells'])} cells")


@main.command()
@click.argument("input_path", metavar="MESH")
@click.option("--deep", is_flag=True, help="Also run the pairwise overlap test.")
@server_option
def check(input_path, deep, server):
    """Exit 0 iff the mesh is conforming; violations print as JSON."""
    req = CheckRequest(mesh=_mesh_payload(input_path), deep=deep)
    out = _run(server, "/check", req, handle_check)
    if out["ok"]:
        click.echo("conforming")
        sys.exit(0)
    sys.stdout.write(json.dumps(out["violations"], sort_keys=True) + "\n")
    sys.exit(1)


@main.command()
@click.argument("input_path", metavar="MESH")
@click.option("--initial", default=None, metavar="MESH0",
              help="Initial mesh, for gamma-ratio and quasi-uniformity.")
@click.option("--history", "history_path", default=None, metavar="FILE",
              help="Mark history written by the refine command.")
@click.option("-o", "--output", required=True, help="Output report JSON path.")
@server_option
def stats(input_path, initial, history_path, output, server):
    """Shape-regularity, similarity-class and closure-ratio statistics."""
    hist = None
    if history_path is not None:
        try:
            with open(history_path) as fh:
                hist = HistoryPayload(**json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            _fail(exc, 2)
        except ValidationError as exc:
            _fail(exc, 1)
    req = StatsRequest(
        mesh=_mesh_payload(input_path),
        initial=_mesh_payload(initial) if initial else None,
        history=hist,
    )
    out = _run(server, "/stats", req, handle_stats)
    _write_json(output, out["report"])
    click.echo(f"report written to {output}")


@main.command()
@click.argument("input_path", metavar="MESH")
@click.option("-o", "--output", required=True, help="Output VTK path.")
@server_option
def export(input_path, output, server):
    """Write the mesh as a VTK legacy ASCII unstructured grid."""
    req = ExportRequest(mesh=_mesh_payload(input_path))
    out = _run(server, "/export", req, handle_export)
    if out.get("warning"):
        sys.stderr.write(out["warning"] + "\n")
    _write_text(output, out["vtk"])
    click.echo(f"VTK written to {output}")


@main.command()
@click.option("--name", default=None, help="Write one fixture instead of listing all.")
@click.option("-o", "--output", default=None, help="Output path for --name.")
def fixtures(name, output):
    """List bundled meshes or write one of them to a file."""
    if name is None:
        for n in FIXTURE_NAMES:
            click.echo(n)
        return
    try:
        mesh = fixture_mesh(name)
    except KeyError as exc:
        _fail(exc, 1)
    _write_json(output or f"{name}.json", mesh)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run(service_app, host=host, port=port)


if __name__ == "__main__":
    main()
