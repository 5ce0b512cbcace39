"""Single-simplex bisection rules and generation arithmetic.

Two equivalent rules are implemented:

* the tagged rule: an ordered vertex array with a tag ``gamma``; the edge
  ``[verts[0], verts[gamma]]`` is split and the children inherit shifted
  tags,
* the generation rule: vertices sorted by strictly decreasing generation;
  the split edge and the new vertex's generation follow from the vertex
  levels and types alone.

Production refinement runs the tagged rule; the generation rule is kept as
an independent route for the equivalence harness.  New-vertex generations
are always well defined from the two edge endpoints (:func:`edge_gensharp`),
which is what makes midpoint bookkeeping representation-independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .coloring import ColorMap, verify_coloring
from .errors import EqualGenerations, InvalidColoring, NonDistinctGenerations
from .mesh import Triangulation, VertexAttr, edge_key


class TaggedSimplex(NamedTuple):
    verts: tuple[int, ...]
    tag: int

    @property
    def bisection_edge(self) -> tuple[int, int]:
        return edge_key(self.verts[0], self.verts[self.tag])


@dataclass(slots=True)
class BisectionResult:
    edge: tuple[int, int]
    new_vertex_gen: int
    children: tuple[tuple[int, ...], tuple[int, ...]]


def decompose_generation(gen: int, N: int) -> tuple[int, int]:
    """Unique ``(level, vtype)`` with ``gen = N*(level-1) + vtype``, vtype in 1..N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    vtype = (gen - 1) % N + 1
    level = (gen - vtype) // N + 1
    return level, vtype


def attr_for_gen(gen: int, N: int, color: int | None = None) -> VertexAttr:
    level, vtype = decompose_generation(gen, N)
    return VertexAttr(gen=gen, level=level, vtype=vtype, color=color)


def init_vertex_attrs(tria: Triangulation, cm: ColorMap) -> None:
    """Seed vertex generations from a verified coloring.

    Initial vertices get ``gen = -color``; level is 0 for colors below N and
    -1 for color N, which is exactly what the decomposition yields.
    """
    ok, violation = verify_coloring(tria, cm)
    if not ok:
        raise InvalidColoring(f"edge {violation} has equal endpoint colors")
    N = cm.ncolors_minus_one
    for vid, color in cm.colors.items():
        tria.vertices[vid].attr = attr_for_gen(-color, N, color=color)
    tria.max_color = N


def init_tagged(tria: Triangulation, cm: ColorMap) -> None:
    """Order each initial cell for the tagged rule.

    Vertices are sorted ascending by color; if the largest color equals N
    that vertex is rotated to the front.  All initial tags equal n.
    """
    if tria.vertices and tria.vertices[0].attr is None:
        init_vertex_attrs(tria, cm)
    N = cm.ncolors_minus_one
    n = tria.dim
    for sid in tria.live_ids():
        s = tria.simplices[sid]
        by_color = sorted(s.verts, key=lambda v: cm.colors[v])
        if len({cm.colors[v] for v in by_color}) != n + 1:
            raise InvalidColoring(f"cell {sid} has repeated colors")
        if cm.colors[by_color[-1]] == N:
            order = (by_color[-1],) + tuple(by_color[:-1])
        else:
            order = tuple(by_color)
        s.verts = order
        s.tag = n
    tria.rule = "tagged"


def init_generalized(tria: Triangulation, cm: ColorMap) -> None:
    """Order each initial cell by decreasing generation for the generation rule."""
    if tria.vertices and tria.vertices[0].attr is None:
        init_vertex_attrs(tria, cm)
    for sid in tria.live_ids():
        s = tria.simplices[sid]
        s.verts = sort_by_gen(tria, s.verts)
        s.tag = 0
    tria.rule = "generalized"


def sort_by_gen(tria: Triangulation, verts) -> tuple[int, ...]:
    gens = [tria.vertices[v].attr.gen for v in verts]
    if len(set(gens)) != len(gens):
        raise NonDistinctGenerations(f"generations {gens} are not distinct")
    return tuple(v for _, v in sorted(zip(gens, verts), reverse=True))


def bisect_tagged(t: TaggedSimplex, mid: int) -> tuple[TaggedSimplex, TaggedSimplex]:
    """Split a tagged simplex at the given (deduplicated) midpoint vertex."""
    v = t.verts
    g = t.tag
    n = len(v) - 1
    g2 = g - 1 if g >= 2 else n
    c1 = v[:g] + (mid,) + v[g + 1:]
    c2 = v[1:g + 1] + (mid,) + v[g + 1:]
    return TaggedSimplex(c1, g2), TaggedSimplex(c2, g2)


def edge_gensharp(tria: Triangulation, a: int, b: int, N: int | None = None) -> int:
    """Generation of the would-be bisection vertex of edge ``(a, b)``.

    With endpoints ordered so gen(v0) > gen(v1): the result is
    ``gen(v0) + N`` when the levels differ and
    ``gen(v1) + 2N + 1 - type(v0)`` when they coincide.
    """
    if N is None:
        N = tria.max_color
    aa = tria.vertices[a].attr
    ab = tria.vertices[b].attr
    if aa.gen == ab.gen:
        raise EqualGenerations(f"edge ({a}, {b}) endpoints share generation {aa.gen}")
    v0, v1 = (aa, ab) if aa.gen > ab.gen else (ab, aa)
    if v0.level != v1.level:
        return v0.gen + N
    return v1.gen + 2 * N + 1 - v0.vtype


def generalized_bse(tria: Triangulation, verts) -> tuple[int, int]:
    """Bisection edge of a gen-sorted simplex under the generation rule."""
    levels = [tria.vertices[v].attr.level for v in verts]
    n = len(verts) - 1
    if levels[n] != levels[n - 1]:
        return edge_key(verts[n - 1], verts[n])
    j = min(k for k in range(n + 1) if levels[k] == levels[n])
    return edge_key(verts[j], verts[n])


def bisect_generalized(tria: Triangulation, verts, N: int | None = None) -> BisectionResult:
    """Apply the generation rule to a gen-sorted simplex.

    Returns the bisection edge, the generation of the new vertex, and the
    two children vertex arrays with the placeholder id ``-1`` standing for
    the not-yet-created midpoint (callers substitute and re-sort).
    """
    if N is None:
        N = tria.max_color
    verts = tuple(verts)
    attrs = [tria.vertices[v].attr for v in verts]
    gens = [a.gen for a in attrs]
    if any(gens[i] <= gens[i + 1] for i in range(len(gens) - 1)):
        raise NonDistinctGenerations(f"vertices {verts} are not sorted by decreasing gen")
    n = len(verts) - 1
    if attrs[n].level != attrs[n - 1].level:
        edge = (verts[n - 1], verts[n])
        new_gen = attrs[n - 1].gen + N
    else:
        j = min(k for k in range(n + 1) if attrs[k].level == attrs[n].level)
        edge = (verts[j], verts[n])
        new_gen = attrs[n].gen + 2 * N + 1 - attrs[j].vtype
    keep_hi = tuple(v for v in verts if v != edge[0])
    keep_lo = tuple(v for v in verts if v != edge[1])
    # the midpoint has the strictly largest generation, hence leads
    children = ((-1,) + keep_hi, (-1,) + keep_lo)
    return BisectionResult(edge_key(*edge), new_gen, children)


def simplex_bse(tria: Triangulation, sid: int) -> tuple[int, int]:
    """Bisection edge of a live simplex under the triangulation's rule."""
    s = tria.simplices[sid]
    if tria.rule == "tagged":
        return edge_key(s.verts[0], s.verts[s.tag])
    return generalized_bse(tria, s.verts)


def simplex_children(tria: Triangulation, sid: int, mid: int):
    """Vertex arrays and tags of the two children of live simplex ``sid``."""
    s = tria.simplices[sid]
    if tria.rule == "tagged":
        c1, c2 = bisect_tagged(TaggedSimplex(s.verts, s.tag), mid)
        return (c1.verts, c1.tag), (c2.verts, c2.tag)
    res = bisect_generalized(tria, s.verts)
    out = []
    for child in res.children:
        out.append((tuple(mid if v == -1 else v for v in child), 0))
    return tuple(out)
