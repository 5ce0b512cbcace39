"""Bundled example meshes, constructed deterministically in code.

* ``kuhn2d`` / ``kuhn3d`` / ``kuhn4d`` -- unit-cube triangulations into
  n! prefix-sum simplices, colored by coordinate-parity count (N = n).
* ``square`` -- the 2-triangle unit square without colors (raw input for
  the coloring step).
* ``fichera`` -- seven reflected unit cubes around the origin (42
  tetrahedra) with the parity coloring; the algorithmic coloring is
  obtained by running the greedy colorer on it.
* ``pentagon_fan`` -- five triangles around a hub; its initial mesh cannot
  be 3-colored, the greedy colorer needs four colors.
* ``strip`` -- ten triangles in a row over translated (not reflected)
  cells; colorable only with many colors, good for long closure chains.
"""

from __future__ import annotations

import itertools
import math

from .mesh import Triangulation, build_triangulation


def _cube_corners_reflected(origin, n):
    """Map local Kuhn coordinates to global ones, reflecting odd axes so
    neighboring cubes mirror-match on shared faces."""
    def to_global(local):
        out = []
        for zi, yi in zip(origin, local):
            if zi % 2 == 0:
                out.append(zi + yi)
            else:
                out.append(zi + 1 - yi)
        return tuple(out)
    return to_global


def _kuhn_cells(n):
    """Vertex chains (as local 0/1 corner tuples) of the n! Kuhn simplices."""
    cells = []
    for pi in itertools.permutations(range(n)):
        chain = [tuple(0 for _ in range(n))]
        for axis in pi:
            prev = list(chain[-1])
            prev[axis] += 1
            chain.append(tuple(prev))
        cells.append(chain)
    return cells


def _parity_color(corner) -> int:
    return sum(abs(int(x)) % 2 for x in corner)


def _cube_complex(origins, n) -> dict:
    """Mesh dict of reflected Kuhn triangulations of unit cubes."""
    vid: dict[tuple, int] = {}
    vertices: list[list[float]] = []
    cells: list[list[int]] = []

    def intern(corner) -> int:
        if corner not in vid:
            vid[corner] = len(vertices)
            vertices.append([float(x) for x in corner])
        return vid[corner]

    for origin in origins:
        to_global = _cube_corners_reflected(origin, n)
        for chain in _kuhn_cells(n):
            cells.append([intern(to_global(c)) for c in chain])

    colors = [_parity_color(c) for c in sorted(vid, key=vid.get)]
    return {"dim": n, "vertices": vertices, "cells": cells, "colors": colors}


def kuhn_cube_mesh(n: int) -> dict:
    return _cube_complex([tuple(0 for _ in range(n))], n)


def fichera_mesh() -> dict:
    origins = [z for z in itertools.product((-1, 0), repeat=3) if z != (0, 0, 0)]
    return _cube_complex(origins, 3)


def square_mesh() -> dict:
    return {
        "dim": 2,
        "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        "cells": [[0, 1, 2], [0, 2, 3]],
    }


def pentagon_fan_mesh() -> dict:
    vertices = [[0.0, 0.0]]
    for k in range(5):
        ang = 2.0 * math.pi * k / 5.0
        vertices.append([math.cos(ang), math.sin(ang)])
    cells = [[0, 1 + k, 1 + (k + 1) % 5] for k in range(5)]
    return {"dim": 2, "vertices": vertices, "cells": cells}


def strip_mesh(squares: int = 5) -> dict:
    """Translated-cell strip whose natural coloring needs one color per
    column: vertex (x, y) gets color x + y."""
    vertices = []
    colors = []
    for y in (0, 1):
        for x in range(squares + 1):
            vertices.append([float(x), float(y)])
            colors.append(x + y)
    bot = lambda x: x
    top = lambda x: squares + 1 + x
    cells = []
    for x in range(squares):
        cells.append([bot(x), bot(x + 1), top(x + 1)])
        cells.append([bot(x), top(x + 1), top(x)])
    return {"dim": 2, "vertices": vertices, "cells": cells, "colors": colors}


_BUILDERS = {
    "kuhn2d": lambda: kuhn_cube_mesh(2),
    "kuhn3d": lambda: kuhn_cube_mesh(3),
    "kuhn4d": lambda: kuhn_cube_mesh(4),
    "fichera": fichera_mesh,
    "square": square_mesh,
    "pentagon_fan": pentagon_fan_mesh,
    "strip": strip_mesh,
}

FIXTURE_NAMES = tuple(sorted(_BUILDERS))


def fixture_mesh(name: str) -> dict:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}")


def fixture_triangulation(name: str) -> Triangulation:
    d = fixture_mesh(name)
    return build_triangulation(d["dim"], d["vertices"], d["cells"])
