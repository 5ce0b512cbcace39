"""Conforming closure refinement: marked-simplex bisection, marked-set
joins, uniform sweeps and point marking.

The recursion of the closure algorithm is realized as an explicit worklist:
the top of the stack is checked against its edge patch; an incompatible
patch member (one whose bisection edge differs) is pushed, otherwise the
whole patch is bisected at the shared edge.  The stack from bottom to top
is exactly a refinement chain, which the log records.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonTermination, NotLive, PointOutside
from .mesh import INSIDE_TOL, Triangulation, edge_key
from .rules import attr_for_gen, edge_gensharp, simplex_bse, simplex_children

BISECTION_BUDGET = 2**40


@dataclass
class RefineLog:
    """Instrumentation record of one ``refine`` call."""

    marked: int
    marked_level: int = 0
    chains: list[list[int]] = field(default_factory=list)
    created_simplices: list[int] = field(default_factory=list)
    created_vertices: list[int] = field(default_factory=list)
    depth: int = 0
    bisections: int = 0

    def to_dict(self) -> dict:
        return {
            "marked": self.marked,
            "marked_level": self.marked_level,
            "chains": self.chains,
            "created_simplices": self.created_simplices,
            "created_vertices": self.created_vertices,
            "depth": self.depth,
            "bisections": self.bisections,
        }


@dataclass
class MarkHistory:
    """Per-iteration record (#marked, #cells after) of a refinement run."""

    initial_cells: int
    entries: list[tuple[int, int]] = field(default_factory=list)

    def record(self, marked: int, cells: int) -> None:
        self.entries.append((marked, cells))

    def total_marked(self) -> int:
        return sum(m for m, _ in self.entries)

    def to_dict(self) -> dict:
        return {"initial_cells": self.initial_cells,
                "entries": [list(e) for e in self.entries]}

    @classmethod
    def from_dict(cls, d: dict) -> "MarkHistory":
        h = cls(int(d["initial_cells"]))
        h.entries = [(int(m), int(c)) for m, c in d["entries"]]
        return h


def simplex_level(tria: Triangulation, sid: int) -> int:
    """Level of a simplex: the maximum of its vertex levels."""
    return max(tria.vertices[v].attr.level for v in tria.simplices[sid].verts)


def _audit_midpoint(tria, e, patch, gen) -> None:
    """Well-posedness: every patch member must assign the same generation to
    the bisection vertex, strictly above all its own vertex generations."""
    from .rules import bisect_generalized, sort_by_gen

    for sid in patch:
        verts = sort_by_gen(tria, tria.simplices[sid].verts)
        res = bisect_generalized(tria, verts)
        if res.edge != edge_key(*e):
            raise AssertionError(
                f"simplex {sid} disagrees on the bisection edge: {res.edge} != {e}")
        if res.new_vertex_gen != gen:
            raise AssertionError(
                f"simplex {sid} assigns gen {res.new_vertex_gen} to mid{e}, edge rule says {gen}")
        top = max(tria.vertices[v].attr.gen for v in verts)
        if gen <= top:
            raise AssertionError(f"new gen {gen} not above parent gens (max {top})")


def _bisect_patch(tria, e, patch, log, audit) -> int:
    """Bisect every member of a compatible patch at edge ``e``; returns the
    number of bisections performed."""
    N = tria.max_color
    gen = edge_gensharp(tria, e[0], e[1], N)
    if audit:
        _audit_midpoint(tria, e, patch, gen)
    before = len(tria.vertices)
    mid = tria.midpoint_vertex(e[0], e[1], attr_for_gen(gen, N))
    if log is not None and mid >= before:
        log.created_vertices.append(mid)
    count = 0
    for sid in sorted(patch):
        s = tria.simplices[sid]
        # child ids are assigned in vertex-set order so that both bisection
        # rules produce identical id sequences
        children = sorted(simplex_children(tria, sid, mid),
                          key=lambda vt: tuple(sorted(vt[0])))
        tria.remove_simplex(sid)
        for verts, tag in children:
            cid = tria.add_simplex(verts, tag, parent=sid,
                                   gen_count=s.gen_count + 1, ancestor=s.ancestor)
            if log is not None:
                log.created_simplices.append(cid)
        count += 1
    if log is not None:
        log.bisections += count
    return count


def refine(tria: Triangulation, marked: int, *, want_log: bool = False,
           audit: bool = False, budget: int = BISECTION_BUDGET) -> RefineLog | None:
    """Coarsest conforming refinement in which ``marked`` is bisected.

    Mutates ``tria`` in place.  Returns a :class:`RefineLog` when requested
    (or when auditing), otherwise ``None``.
    """
    if marked not in tria.live:
        raise NotLive(f"simplex {marked} is not live")
    log = RefineLog(marked, simplex_level(tria, marked)) if (want_log or audit) else None
    stack = [marked]
    spent = 0
    while stack:
        top = stack[-1]
        if top not in tria.live:
            stack.pop()
            continue
        e = simplex_bse(tria, top)
        patch = tria.edge_index[e]
        pending = sorted(p for p in patch if simplex_bse(tria, p) != e)
        if pending:
            # any valid choice yields the same mesh; ascending id is fixed
            # so that logs are deterministic
            if audit:
                _audit_chain_step(tria, top, pending[0], e)
            stack.append(pending[0])
            if log is not None:
                log.depth = max(log.depth, len(stack))
            continue
        if log is not None:
            log.depth = max(log.depth, len(stack))
            log.chains.append([sid for sid in stack if sid in tria.live])
        spent += _bisect_patch(tria, e, patch, log, audit)
        if spent > budget:
            raise NonTermination(f"bisection budget {budget} exceeded")
        stack.pop()
    return log


def _audit_chain_step(tria, frm, to, e) -> None:
    """Chain property: the pushed simplex contains the pusher's bisection
    edge and has a strictly smaller edge generation on its own one."""
    verts = tria.simplices[to].verts
    if not (e[0] in verts and e[1] in verts):
        raise AssertionError(f"chain step {frm}->{to}: edge {e} not in {verts}")
    own = simplex_bse(tria, to)
    g_from = edge_gensharp(tria, e[0], e[1])
    g_to = edge_gensharp(tria, own[0], own[1])
    if not g_to < g_from:
        raise AssertionError(
            f"chain step {frm}->{to}: gensharp {g_to} not below {g_from}")


def refine_set(tria: Triangulation, marked, *, want_log: bool = False,
               audit: bool = False) -> list[RefineLog]:
    """Refine every simplex of ``marked``; the result is the join of the
    individual refinements and therefore independent of the order.

    Marks that died as a side effect of earlier closures are skipped (their
    refinement is already contained in the current mesh).
    """
    logs = []
    for sid in sorted(set(marked)):
        if sid not in tria.live:
            continue
        lg = refine(tria, sid, want_log=want_log, audit=audit)
        if lg is not None:
            logs.append(lg)
    return logs


def uniform_refine(tria: Triangulation, rounds: int) -> None:
    """``rounds`` full refinements: n sweeps, each bisecting every live
    simplex exactly once.  Intermediate sweeps may be nonconforming; after
    each full round the mesh is conforming again and the cell count has
    grown by 2**n.
    """
    N = tria.max_color
    for _ in range(rounds * tria.dim):
        for sid in sorted(tria.live):
            if sid not in tria.live:
                continue
            s = tria.simplices[sid]
            e = simplex_bse(tria, sid)
            gen = edge_gensharp(tria, e[0], e[1], N)
            mid = tria.midpoint_vertex(e[0], e[1], attr_for_gen(gen, N))
            children = sorted(simplex_children(tria, sid, mid),
                              key=lambda vt: tuple(sorted(vt[0])))
            tria.remove_simplex(sid)
            for verts, tag in children:
                tria.add_simplex(verts, tag, parent=sid,
                                 gen_count=s.gen_count + 1, ancestor=s.ancestor)
        tria.mark_conformity_dirty()


def point_mark(tria: Triangulation, point) -> set[int]:
    """All live simplices whose closed hull contains ``point``."""
    point = np.asarray(point, dtype=float)
    if point.shape != (tria.dim,):
        raise PointOutside(f"point has shape {point.shape}, expected ({tria.dim},)")
    hits = set()
    for sid in tria.live:
        s = tria.simplices[sid]
        coords = tria.simplex_coords(s.verts)
        lo = coords.min(axis=0) - INSIDE_TOL
        hi = coords.max(axis=0) + INSIDE_TOL
        if np.any(point < lo) or np.any(point > hi):
            continue
        if tria.contains_point(sid, point, tol=1e-12):
            hits.add(sid)
    if not hits:
        raise PointOutside(f"point {point.tolist()} lies outside the mesh")
    return hits
