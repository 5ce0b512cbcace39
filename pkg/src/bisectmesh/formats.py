"""Mesh JSON schema and VTK legacy export.

The JSON layout is::

    {"dim": n,
     "vertices": [[x, ...], ...],
     "cells": [[i0, ..., in], ...],      # vertex order is meaningful
     "colors": [c, ...],                 # optional, aligned with vertices
     "tags": [g, ...],                   # optional, aligned with cells
     "gens": [g, ...],                   # optional, aligned with vertices
     "ancestors": [a, ...],              # optional, aligned with cells
     "max_color": N}                     # optional

Serialization is canonical: sorted keys, no whitespace variation, floats
rendered with %.17g, so save(load(x)) is byte-identical.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import IndexOutOfRange, MeshError
from .mesh import Triangulation, build_triangulation
from .rules import attr_for_gen


def _canon(value) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if value != value or value in (float("inf"), float("-inf")):
            raise MeshError("non-finite float in JSON payload")
        return "%.17g" % value
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        items = (f"{json.dumps(str(k))}: {_canon(v)}" for k, v in sorted(value.items()))
        return "{" + ", ".join(items) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_canon(v) for v in value) + "]"
    raise MeshError(f"cannot serialize {type(value).__name__}")


def canonical_json(value) -> str:
    """Deterministic JSON text (sorted keys, %.17g floats, one trailing LF)."""
    return _canon(value) + "\n"


def mesh_to_dict(tria: Triangulation) -> dict:
    d: dict = {
        "dim": tria.dim,
        "vertices": [[float(x) for x in v.coords] for v in tria.vertices],
        "cells": [list(tria.simplices[sid].verts) for sid in tria.live_ids()],
    }
    attrs = [v.attr for v in tria.vertices]
    colors = [None if a is None else a.color for a in attrs]
    if colors and all(c is not None for c in colors):
        d["colors"] = [int(c) for c in colors]
    if attrs and all(a is not None for a in attrs):
        d["gens"] = [int(a.gen) for a in attrs]
    if tria.max_color is not None:
        d["max_color"] = int(tria.max_color)
    live = tria.live_ids()
    if tria.rule == "tagged" and attrs and all(a is not None for a in attrs):
        d["tags"] = [int(tria.simplices[sid].tag) for sid in live]
    if any(tria.simplices[sid].ancestor != sid for sid in live):
        d["ancestors"] = [int(tria.simplices[sid].ancestor) for sid in live]
    return d


def dict_to_mesh(d: dict):
    """Rebuild a triangulation; returns ``(tria, colors_list_or_None)``.

    Vertex attributes are restored when ``gens`` and ``max_color`` are
    present; colors of initial vertices are recovered from their negative
    generations.
    """
    try:
        dim = int(d["dim"])
        vertices = d["vertices"]
        cells = d["cells"]
    except (KeyError, TypeError, ValueError) as exc:
        raise IndexOutOfRange(f"mesh payload missing field: {exc}") from exc
    tria = build_triangulation(dim, vertices, cells)

    colors = d.get("colors")
    if colors is not None and len(colors) != len(tria.vertices):
        raise IndexOutOfRange("colors array length does not match vertices")

    gens = d.get("gens")
    max_color = d.get("max_color")
    if gens is not None:
        if len(gens) != len(tria.vertices):
            raise IndexOutOfRange("gens array length does not match vertices")
        if max_color is None:
            raise IndexOutOfRange("gens present but max_color missing")
        N = int(max_color)
        for vid, g in enumerate(gens):
            g = int(g)
            color = -g if g <= 0 else None
            if colors is not None:
                color = int(colors[vid])
            tria.vertices[vid].attr = attr_for_gen(g, N, color=color)
        tria.max_color = N
    elif max_color is not None:
        tria.max_color = int(max_color)

    tags = d.get("tags")
    if tags is not None:
        live = tria.live_ids()
        if len(tags) != len(live):
            raise IndexOutOfRange("tags array length does not match cells")
        for sid, tag in zip(live, tags):
            tag = int(tag)
            if not 1 <= tag <= dim:
                raise IndexOutOfRange(f"tag {tag} outside 1..{dim}")
            tria.simplices[sid].tag = tag

    ancestors = d.get("ancestors")
    if ancestors is not None:
        live = tria.live_ids()
        if len(ancestors) != len(live):
            raise IndexOutOfRange("ancestors array length does not match cells")
        for sid, anc in zip(live, ancestors):
            tria.simplices[sid].ancestor = int(anc)

    return tria, (None if colors is None else [int(c) for c in colors])


def save_mesh(tria: Triangulation, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(canonical_json(mesh_to_dict(tria)))


def load_mesh_dict(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_mesh(path: str):
    return dict_to_mesh(load_mesh_dict(path))


# -- VTK legacy ASCII --------------------------------------------------------

VTK_CELL_TYPES = {1: 3, 2: 5, 3: 10}  # line, triangle, tetrahedron


def to_vtk(tria: Triangulation, title: str = "bisectmesh export"):
    """Legacy ASCII unstructured grid; returns ``(text, warning_or_None)``.

    Meshes with n > 3 cannot be written as VTK volume cells; their edge
    skeleton is exported instead (cell type 3) with the first three
    coordinates of each vertex.
    """
    warning = None
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    npts = len(tria.vertices)
    lines.append(f"POINTS {npts} double")
    for v in tria.vertices:
        c = list(v.coords[:3]) + [0.0] * max(0, 3 - tria.dim)
        lines.append(" ".join("%.17g" % x for x in c))

    if tria.dim <= 3:
        live = tria.live_ids()
        size = len(live) * (tria.dim + 2)
        lines.append(f"CELLS {len(live)} {size}")
        for sid in live:
            verts = tria.simplices[sid].verts
            lines.append(" ".join(str(x) for x in (len(verts),) + tuple(sorted(verts))))
        lines.append(f"CELL_TYPES {len(live)}")
        ctype = VTK_CELL_TYPES[tria.dim]
        lines.extend(str(ctype) for _ in live)
    else:
        warning = (f"dim {tria.dim} > 3: exporting the edge skeleton only "
                   f"(first three coordinates per vertex)")
        edges = sorted(tria.edge_index)
        lines.append(f"CELLS {len(edges)} {len(edges) * 3}")
        for a, b in edges:
            lines.append(f"2 {a} {b}")
        lines.append(f"CELL_TYPES {len(edges)}")
        lines.extend("3" for _ in edges)
    return "\n".join(lines) + "\n", warning
