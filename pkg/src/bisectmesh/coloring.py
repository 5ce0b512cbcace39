"""Generalized (N+1)-colorings of an initial triangulation.

A coloring assigns to every initial vertex a color in {0, ..., N} such that
the endpoints of every edge differ.  N = n recovers the classical colored
case; general N makes any conforming mesh colorable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UncoloredVertex
from .mesh import Triangulation


@dataclass
class ColorMap:
    colors: dict[int, int] = field(default_factory=dict)

    @property
    def ncolors_minus_one(self) -> int:
        """N, the largest assigned color."""
        return max(self.colors.values())


def _adjacency(tria: Triangulation) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {v: set() for v in range(len(tria.vertices))}
    for a, b in tria.edge_index:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def greedy_color(tria: Triangulation, order: str = "id") -> ColorMap:
    """Color vertices greedily: each vertex gets the smallest color not used
    by an already-colored edge neighbor.

    ``order`` is "id" (ascending vertex id, the default) or "valency"
    (most-connected vertices first, ties by id).  The loop itself is
    order-agnostic; fixing the order makes runs reproducible.
    """
    adj = _adjacency(tria)
    if order == "id":
        seq = sorted(adj)
    elif order == "valency":
        seq = sorted(adj, key=lambda v: (-len(adj[v]), v))
    else:
        raise ValueError(f"unknown order {order!r}")
    cm = ColorMap()
    for v in seq:
        used = {cm.colors[w] for w in adj[v] if w in cm.colors}
        c = 0
        while c in used:
            c += 1
        cm.colors[v] = c
    return cm


def verify_coloring(tria: Triangulation, cm: ColorMap):
    """True iff every edge has distinctly colored endpoints.

    Returns ``(ok, first_violating_edge)``.  Raises
    :class:`UncoloredVertex` when a vertex has no color at all.
    """
    for v in range(len(tria.vertices)):
        if v not in cm.colors:
            raise UncoloredVertex(f"vertex {v} has no color")
    for a, b in sorted(tria.edge_index):
        if cm.colors[a] == cm.colors[b]:
            return False, (a, b)
    return True, None


def max_valency(tria: Triangulation) -> int:
    """Largest number of edges meeting at a single vertex."""
    adj = _adjacency(tria)
    return max((len(nb) for nb in adj.values()), default=0)
