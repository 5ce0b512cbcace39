"""Triangulation data model, adjacency indices and the conformity checker.

A :class:`Triangulation` owns a dense vertex table and an append-only
simplex table.  Simplices are never mutated in place: bisection tombstones
the parent (drops it from the live set) and appends the children, so ids
recorded in logs stay valid forever.  Midpoint vertices are deduplicated
topologically by their parent edge, never by coordinate comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DegenerateCell,
    DuplicateCell,
    DuplicateVertexInCell,
    IndexOutOfRange,
    UnknownEdge,
)

VOLUME_TOL = 1e-12        # cells thinner than this (relative) are rejected
INSIDE_TOL = 1e-10        # barycentric tolerance for point-in-simplex tests
VOLUME_DRIFT_TOL = 1e-10  # allowed relative drift of the total mesh volume


def edge_key(a: int, b: int) -> tuple[int, int]:
    """Order-normalized vertex pair; ``edge_key(a, b) == edge_key(b, a)``."""
    return (a, b) if a < b else (b, a)


@dataclass(slots=True)
class VertexAttr:
    """Per-vertex refinement bookkeeping.

    ``gen`` is the vertex generation, ``level`` and ``vtype`` its unique
    decomposition ``gen = N*(level-1) + vtype`` with ``vtype`` in 1..N.
    ``color`` is kept for initial vertices only.
    """

    gen: int
    level: int
    vtype: int
    color: int | None = None


@dataclass(slots=True)
class Vertex:
    coords: np.ndarray
    attr: VertexAttr | None = None


@dataclass(slots=True)
class Simplex:
    """One n-simplex of the bisection forest.

    ``verts`` is an *ordered* vertex-id array: Maubach order in tagged mode,
    decreasing-generation order in generalized mode.  ``tag`` is the Maubach
    tag (0 when the generalized rule is in use).
    """

    sid: int
    verts: tuple[int, ...]
    tag: int
    parent: int | None
    gen_count: int
    ancestor: int
    volume: float


@dataclass(slots=True)
class Violation:
    kind: str
    simplices: tuple[int, ...]
    vertex: int | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "simplices": list(self.simplices),
            "vertex": self.vertex,
            "detail": self.detail,
        }


@dataclass(slots=True)
class ConformityReport:
    ok: bool
    violations: list[Violation] = field(default_factory=list)


def simplex_volume(coords: np.ndarray) -> float:
    """Unsigned n-volume of the simplex spanned by ``coords`` ((n+1) x n)."""
    edges = coords[1:] - coords[0]
    n = edges.shape[0]
    return abs(float(np.linalg.det(edges))) / math.factorial(n)


class Triangulation:
    """Live conforming mesh plus the full (tombstoned) bisection history."""

    def __init__(self, dim: int):
        self.dim = dim
        self.vertices: list[Vertex] = []
        self.simplices: dict[int, Simplex] = {}
        self.live: set[int] = set()
        self.edge_index: dict[tuple[int, int], set[int]] = {}
        self.midpoint_index: dict[tuple[int, int], int] = {}
        self.max_color: int | None = None  # N of the (N+1)-coloring
        self.rule: str = "tagged"          # "tagged" | "generalized"
        self._next_sid = 0
        # hyperface -> live users, plus the set of faces used > 2 times
        self._face_index: dict[tuple[int, ...], set[int]] = {}
        self._overfull_faces: set[tuple[int, ...]] = set()
        self._vertex_star: dict[int, set[int]] = {}
        self._volume_initial: float | None = None
        # incremental conformity state
        self._conf_full_done = False
        self._conf_pending: list[tuple[int, tuple[int, int]]] = []
        self._conf_dirty = False
        self._conf_violations: list[Violation] = []
        self._inv_cache: dict[int, np.ndarray] = {}

    # -- construction -------------------------------------------------

    def add_vertex(self, coords, attr: VertexAttr | None = None) -> int:
        vid = len(self.vertices)
        self.vertices.append(Vertex(np.asarray(coords, dtype=float), attr))
        self._vertex_star[vid] = set()
        return vid

    def coords_of(self, vid: int) -> np.ndarray:
        return self.vertices[vid].coords

    def simplex_coords(self, verts) -> np.ndarray:
        return np.array([self.vertices[v].coords for v in verts])

    def add_simplex(
        self,
        verts,
        tag: int,
        parent: int | None = None,
        gen_count: int = 0,
        ancestor: int | None = None,
        volume: float | None = None,
    ) -> int:
        sid = self._next_sid
        self._next_sid += 1
        if volume is None:
            volume = simplex_volume(self.simplex_coords(verts))
        s = Simplex(sid, tuple(verts), tag, parent, gen_count,
                    sid if ancestor is None else ancestor, volume)
        self.simplices[sid] = s
        self.live.add(sid)
        self._index_add(s)
        return sid

    def remove_simplex(self, sid: int) -> None:
        s = self.simplices[sid]
        self.live.discard(sid)
        self._index_remove(s)

    def _faces_of(self, verts):
        sv = sorted(verts)
        for skip in range(len(sv)):
            yield tuple(sv[:skip] + sv[skip + 1:])

    def _index_add(self, s: Simplex) -> None:
        for i in range(len(s.verts)):
            self._vertex_star[s.verts[i]].add(s.sid)
            for j in range(i + 1, len(s.verts)):
                self.edge_index.setdefault(edge_key(s.verts[i], s.verts[j]), set()).add(s.sid)
        for f in self._faces_of(s.verts):
            users = self._face_index.setdefault(f, set())
            users.add(s.sid)
            if len(users) > 2:
                self._overfull_faces.add(f)

    def _index_remove(self, s: Simplex) -> None:
        for i in range(len(s.verts)):
            self._vertex_star[s.verts[i]].discard(s.sid)
            for j in range(i + 1, len(s.verts)):
                k = edge_key(s.verts[i], s.verts[j])
                users = self.edge_index.get(k)
                if users is not None:
                    users.discard(s.sid)
                    if not users:
                        del self.edge_index[k]
        for f in self._faces_of(s.verts):
            users = self._face_index.get(f)
            if users is not None:
                users.discard(s.sid)
                if len(users) <= 2:
                    self._overfull_faces.discard(f)
                if not users:
                    del self._face_index[f]

    # -- midpoints ----------------------------------------------------

    def midpoint_vertex(self, a: int, b: int, attr: VertexAttr | None = None) -> int:
        """Deduplicated bisection vertex of edge ``(a, b)``.

        The coordinates are the exact binary midpoint ``(a + b) / 2``.
        """
        k = edge_key(a, b)
        vid = self.midpoint_index.get(k)
        if vid is not None:
            return vid
        coords = (self.vertices[a].coords + self.vertices[b].coords) / 2.0
        vid = self.add_vertex(coords, attr)
        self.midpoint_index[k] = vid
        self._conf_pending.append((vid, k))
        return vid

    # -- queries ------------------------------------------------------

    def edge_patch(self, e) -> set[int]:
        """Live simplices containing both endpoints of edge ``e``."""
        k = edge_key(*e)
        patch = self.edge_index.get(k)
        if patch is None:
            raise UnknownEdge(f"edge {k} not in mesh")
        return set(patch)

    def vertex_star(self, vid: int) -> set[int]:
        return set(self._vertex_star.get(vid, ()))

    def total_volume(self) -> float:
        return math.fsum(self.simplices[sid].volume for sid in self.live)

    def live_ids(self) -> list[int]:
        return sorted(self.live)

    def _inverse_of(self, sid: int) -> np.ndarray:
        inv = self._inv_cache.get(sid)
        if inv is None:
            s = self.simplices[sid]
            coords = self.simplex_coords(s.verts)
            inv = np.linalg.inv((coords[1:] - coords[0]).T)
            self._inv_cache[sid] = inv
        return inv

    def barycentric(self, sid: int, point) -> np.ndarray:
        """All n+1 barycentric coordinates of ``point`` w.r.t. simplex ``sid``."""
        s = self.simplices[sid]
        point = np.asarray(point, dtype=float)
        lam = self._inverse_of(sid) @ (point - self.vertices[s.verts[0]].coords)
        return np.concatenate(([1.0 - lam.sum()], lam))

    def contains_point(self, sid: int, point, tol: float = INSIDE_TOL) -> bool:
        return bool(np.all(self.barycentric(sid, point) >= -tol))

    def mark_conformity_dirty(self) -> None:
        """Invalidate the incremental conformity cache (full rescan next time)."""
        self._conf_dirty = True

    def rebuild_edge_index(self) -> dict[tuple[int, int], set[int]]:
        """Reference reconstruction of the edge index by scanning live simplices."""
        idx: dict[tuple[int, int], set[int]] = {}
        for sid in self.live:
            vs = self.simplices[sid].verts
            for i in range(len(vs)):
                for j in range(i + 1, len(vs)):
                    idx.setdefault(edge_key(vs[i], vs[j]), set()).add(sid)
        return idx


def build_triangulation(dim: int, coords, cells) -> Triangulation:
    """Assemble a triangulation from raw point and cell arrays.

    Cell vertex order is preserved (it carries the Maubach ordering for
    tagged meshes).  Raises on out-of-range indices, repeated vertices in a
    cell, duplicate cells and degenerate cells.
    """
    tria = Triangulation(dim)
    for p in coords:
        p = np.asarray(p, dtype=float)
        if p.shape != (dim,):
            raise IndexOutOfRange(f"vertex has {p.shape} coordinates, expected ({dim},)")
        if not np.all(np.isfinite(p)):
            raise DegenerateCell("non-finite vertex coordinates")
        tria.add_vertex(p)

    nverts = len(tria.vertices)
    seen: dict[tuple[int, ...], int] = {}
    for ci, cell in enumerate(cells):
        cell = tuple(int(i) for i in cell)
        if len(cell) != dim + 1:
            raise IndexOutOfRange(f"cell {ci} has {len(cell)} vertices, expected {dim + 1}")
        if any(i < 0 or i >= nverts for i in cell):
            raise IndexOutOfRange(f"cell {ci} references a vertex outside 0..{nverts - 1}")
        if len(set(cell)) != len(cell):
            raise DuplicateVertexInCell(f"cell {ci} repeats a vertex index")
        key = tuple(sorted(cell))
        if key in seen:
            raise DuplicateCell(f"cells {seen[key]} and {ci} span the same vertices")
        seen[key] = ci
        pts = tria.simplex_coords(cell)
        vol = simplex_volume(pts)
        diam = float(np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)))
        if diam <= 0.0 or vol < VOLUME_TOL * diam**dim:
            raise DegenerateCell(f"cell {ci} is degenerate (volume {vol:g})")
        tria.add_simplex(cell, tag=dim)
    tria._volume_initial = tria.total_volume()
    return tria


# -- conformity -----------------------------------------------------------


def _hanging_violations(tria: Triangulation, sids, vids) -> list[Violation]:
    """Vertices of ``vids`` lying on a simplex of ``sids`` without being its
    vertex (hanging nodes, overlapping duplicates)."""
    out: list[Violation] = []
    vids = list(vids)
    if not vids or not sids:
        return out
    pts = np.array([tria.vertices[v].coords for v in vids])
    tree = cKDTree(pts)
    for sid in sids:
        s = tria.simplices[sid]
        coords = tria.simplex_coords(s.verts)
        center = coords.mean(axis=0)
        radius = float(np.max(np.linalg.norm(coords - center, axis=1))) * (1 + 1e-9) + 1e-30
        for k in tree.query_ball_point(center, radius):
            vid = vids[k]
            if vid in s.verts:
                continue
            if tria.contains_point(sid, pts[k]):
                out.append(Violation(
                    "hanging-vertex", (sid,), vid,
                    f"vertex {vid} lies on simplex {sid} but is not one of its vertices"))
    return out


def _interiors_overlap(c1: np.ndarray, c2: np.ndarray, tol: float = 1e-9) -> bool:
    """LP feasibility: do the open simplices spanned by ``c1``, ``c2`` meet?

    Maximizes the common barycentric margin t; overlap iff t > tol.
    """
    from scipy.optimize import linprog

    n = c1.shape[1]
    rows, rhs = [], []
    for coords in (c1, c2):
        inv = np.linalg.inv((coords[1:] - coords[0]).T)
        v0 = coords[0]
        for r in inv:                       # lam_i(x) >= t, i = 1..n
            rows.append(np.concatenate((-r, [1.0])))
            rhs.append(-float(r @ v0))
        srow = inv.sum(axis=0)              # lam_0 = 1 - sum >= t
        rows.append(np.concatenate((srow, [1.0])))
        rhs.append(1.0 + float(srow @ v0))
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs),
                  bounds=[(None, None)] * (n + 1), method="highs")
    return bool(res.success) and -res.fun > tol


def _deep_pairwise(tria: Triangulation) -> list[Violation]:
    """Pairwise geometric test for bbox-overlapping live simplices."""
    out: list[Violation] = []
    sids = tria.live_ids()
    boxes = {}
    for sid in sids:
        coords = tria.simplex_coords(tria.simplices[sid].verts)
        boxes[sid] = (coords.min(axis=0), coords.max(axis=0))
    pad = 1e-12
    for i, s1 in enumerate(sids):
        lo1, hi1 = boxes[s1]
        for s2 in sids[i + 1:]:
            lo2, hi2 = boxes[s2]
            if np.any(lo1 > hi2 + pad) or np.any(lo2 > hi1 + pad):
                continue
            c1 = tria.simplex_coords(tria.simplices[s1].verts)
            c2 = tria.simplex_coords(tria.simplices[s2].verts)
            if _interiors_overlap(c1, c2):
                out.append(Violation("overlap", (s1, s2),
                                     detail=f"interiors of {s1} and {s2} intersect"))
    return out


def check_conformity(tria: Triangulation, deep: bool = False) -> ConformityReport:
    """Verify that the live mesh is a conforming triangulation.

    Checks performed on every call:

    * no hyperface is shared by more than two live simplices,
    * no vertex lies on a live simplex it does not belong to (hanging node),
    * the total volume matches the initial one to ``VOLUME_DRIFT_TOL``.

    The geometric phase runs incrementally: once a state has been verified,
    only vertices created since are re-examined (against the edge patches
    they bisect).  Sweep-style mutations invalidate the cache and force a
    full rescan.  ``deep=True`` additionally runs the pairwise interior
    overlap test on bounding-box-overlapping pairs (quadratic, for small
    meshes and audits).
    """
    violations: list[Violation] = []
    for f in tria._overfull_faces:
        users = tuple(sorted(tria._face_index.get(f, ())))
        violations.append(Violation("overfull-face", users,
                                    detail=f"face {f} is shared by {len(users)} simplices"))

    if tria._volume_initial is not None and tria.live:
        total = tria.total_volume()
        if abs(total - tria._volume_initial) > VOLUME_DRIFT_TOL * max(tria._volume_initial, 1e-300):
            violations.append(Violation(
                "volume-drift", (),
                detail=f"live volume {total!r} != initial {tria._volume_initial!r}"))

    if tria._conf_dirty or not tria._conf_full_done:
        tria._conf_violations = _hanging_violations(
            tria, tria.live_ids(), range(len(tria.vertices)))
        tria._conf_full_done = True
        tria._conf_dirty = False
        tria._conf_pending.clear()
    elif tria._conf_pending:
        fresh: list[Violation] = []
        for vid, (a, b) in tria._conf_pending:
            cand = tria.vertex_star(a) | tria.vertex_star(b)
            point = tria.vertices[vid].coords
            for sid in sorted(cand):
                s = tria.simplices[sid]
                if vid in s.verts:
                    continue
                if tria.contains_point(sid, point):
                    fresh.append(Violation(
                        "hanging-vertex", (sid,), vid,
                        f"vertex {vid} lies on simplex {sid} but is not one of its vertices"))
        tria._conf_pending.clear()
        tria._conf_violations.extend(fresh)

    # previously recorded geometric violations may have been resolved since
    still: list[Violation] = []
    for v in tria._conf_violations:
        sid = v.simplices[0] if v.simplices else None
        if sid is not None and sid not in tria.live:
            continue
        if v.vertex is not None and sid is not None:
            if v.vertex in tria.simplices[sid].verts:
                continue
        still.append(v)
    tria._conf_violations = still
    violations.extend(still)

    if deep:
        violations.extend(_deep_pairwise(tria))
        if tria.dim == 2:
            violations.extend(_crossing_edges_2d(tria))

    return ConformityReport(not violations, violations)


def _crossing_edges_2d(tria: Triangulation) -> list[Violation]:
    """Proper crossings between edges of different live triangles (2D)."""
    out: list[Violation] = []
    edges = list(tria.edge_index.items())
    for i, (e1, u1) in enumerate(edges):
        p1, p2 = tria.coords_of(e1[0]), tria.coords_of(e1[1])
        for e2, u2 in edges[i + 1:]:
            if set(e1) & set(e2):
                continue
            q1, q2 = tria.coords_of(e2[0]), tria.coords_of(e2[1])
            d1 = p2 - p1
            d2 = q2 - q1
            den = d1[0] * d2[1] - d1[1] * d2[0]
            if abs(den) < 1e-14:
                continue
            r = q1 - p1
            t = (r[0] * d2[1] - r[1] * d2[0]) / den
            u = (r[0] * d1[1] - r[1] * d1[0]) / den
            if 1e-12 < t < 1 - 1e-12 and 1e-12 < u < 1 - 1e-12:
                out.append(Violation("crossing-edges", tuple(sorted(u1 | u2)),
                                     detail=f"edges {e1} and {e2} cross"))
    return out
