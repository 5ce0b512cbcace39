"""High-level operations over mesh payload dicts.

These functions are the single implementation behind both the HTTP service
and the CLI: dicts in (the JSON schema of :mod:`bisectmesh.formats`), dicts
out.  Everything is deterministic given the payload and the options.
"""

from __future__ import annotations

from .coloring import ColorMap, greedy_color, max_valency, verify_coloring
from .errors import InvalidColoring, MeshError, NotLive
from .formats import dict_to_mesh, mesh_to_dict, to_vtk
from .mesh import Triangulation, check_conformity
from .refine import MarkHistory, point_mark, refine, refine_set, uniform_refine
from .rng import Lcg
from .rules import init_tagged
from .analysis import analyze


def _color_map(colors) -> ColorMap:
    return ColorMap({i: int(c) for i, c in enumerate(colors)})


def ensure_initialized(tria: Triangulation, colors, order: str = "id") -> None:
    """Make a mesh refine-ready: color it (greedy) if it has no colors and
    apply the tagged initialization if vertex attributes are missing."""
    if all(v.attr is not None for v in tria.vertices) and tria.max_color is not None:
        return
    if colors is None:
        cm = greedy_color(tria, order=order)
    else:
        cm = _color_map(colors)
    init_tagged(tria, cm)


def op_color(mesh: dict, order: str = "id") -> dict:
    tria, _ = dict_to_mesh(mesh)
    cm = greedy_color(tria, order=order)
    out = dict(mesh)
    out["colors"] = [cm.colors[v] for v in range(len(tria.vertices))]
    return out


def op_init(mesh: dict) -> dict:
    tria, colors = dict_to_mesh(mesh)
    if colors is None:
        raise InvalidColoring("mesh has no colors; run the coloring step first")
    init_tagged(tria, _color_map(colors))
    return mesh_to_dict(tria)


def op_refine(mesh: dict, *, marks=None, point=None, random_marks: bool = False,
              seed: int = 0, iters: int = 1, want_log: bool = False,
              audit: bool = False) -> tuple[dict, list[dict], dict]:
    """Iterated mark-and-refine; returns (mesh, log lines, history).

    Exactly one marking source must be given: an explicit id list, a point
    (everything containing it is marked each iteration), or seeded random
    single-simplex marking.
    """
    sources = sum(x is not None and x is not False for x in (marks, point, random_marks))
    if sources != 1:
        raise MeshError("exactly one of marks/point/random must be given")
    tria, colors = dict_to_mesh(mesh)
    ensure_initialized(tria, colors)
    rng = Lcg(seed)
    history = MarkHistory(len(tria.live))
    lines: list[dict] = []
    for it in range(iters):
        if marks is not None:
            batch = [int(m) for m in marks]
            bad = [m for m in batch if m not in tria.simplices]
            if bad:
                raise NotLive(f"marked ids {bad} do not exist")
            batch = [m for m in batch if m in tria.live]
            if not batch:
                break
        elif point is not None:
            batch = sorted(point_mark(tria, point))
        else:
            live = tria.live_ids()
            batch = [live[rng.below(len(live))]]
        logs = refine_set(tria, batch, want_log=want_log, audit=audit)
        history.record(len(batch), len(tria.live))
        for lg in logs:
            rec = lg.to_dict()
            rec["iter"] = it
            lines.append(rec)
    return mesh_to_dict(tria), lines, history.to_dict()


def op_uniform(mesh: dict, rounds: int = 1) -> dict:
    tria, colors = dict_to_mesh(mesh)
    ensure_initialized(tria, colors)
    uniform_refine(tria, rounds)
    return mesh_to_dict(tria)


def op_check(mesh: dict, deep: bool = False) -> dict:
    tria, _ = dict_to_mesh(mesh)
    report = check_conformity(tria, deep=deep)
    return {"ok": report.ok, "violations": [v.to_dict() for v in report.violations]}


def op_stats(mesh: dict, initial: dict | None = None, history: dict | None = None) -> dict:
    tria, _ = dict_to_mesh(mesh)
    tria0 = dict_to_mesh(initial)[0] if initial is not None else None
    hist = MarkHistory.from_dict(history) if history is not None else None
    return analyze(tria, tria0, hist).to_dict()


def op_export(mesh: dict) -> tuple[str, str | None]:
    tria, _ = dict_to_mesh(mesh)
    return to_vtk(tria)


def op_verify_colors(mesh: dict) -> dict:
    """Validate a user-supplied coloring without recomputing it."""
    tria, colors = dict_to_mesh(mesh)
    if colors is None:
        raise InvalidColoring("mesh has no colors")
    cm = _color_map(colors)
    ok, violation = verify_coloring(tria, cm)
    return {
        "ok": ok,
        "violation": None if violation is None else list(violation),
        "max_color": cm.ncolors_minus_one,
        "max_valency": max_valency(tria),
    }
