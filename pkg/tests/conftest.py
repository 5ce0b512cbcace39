"""Shared fixtures: initialized meshes, random conforming meshes, oracles."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from bisectmesh import ColorMap, greedy_color, init_generalized, init_tagged
from bisectmesh.fixtures import fixture_mesh
from bisectmesh.formats import dict_to_mesh
from bisectmesh.mesh import Triangulation, build_triangulation, simplex_volume
from bisectmesh.rng import Lcg


def initialized_fixture(name: str, rule: str = "tagged") -> Triangulation:
    """Bundled mesh with colors applied and attributes initialized."""
    d = fixture_mesh(name)
    tria, colors = dict_to_mesh(d)
    if colors is None:
        cm = greedy_color(tria)
    else:
        cm = ColorMap({i: c for i, c in enumerate(colors)})
    if rule == "tagged":
        init_tagged(tria, cm)
    else:
        init_generalized(tria, cm)
    return tria


def random_points(n: int, count: int, rng: Lcg) -> np.ndarray:
    return np.array([[rng.uniform() for _ in range(n)] for _ in range(count)])


def random_conforming_mesh(n: int, seed: int, npoints: int | None = None) -> Triangulation:
    """Delaunay triangulation of random points, slivers dropped."""
    from scipy.spatial import Delaunay

    rng = Lcg(seed)
    if npoints is None:
        npoints = 5 + rng.below(10)
    while True:
        pts = random_points(n, npoints, rng)
        try:
            dela = Delaunay(pts)
        except Exception:
            continue
        cells = []
        for cell in dela.simplices:
            coords = pts[cell]
            vol = simplex_volume(coords)
            diam = float(np.max(np.linalg.norm(
                coords[:, None, :] - coords[None, :, :], axis=-1)))
            if vol >= 1e-6 * diam**n:
                cells.append([int(i) for i in cell])
        if len(cells) >= 2:
            used = sorted({i for c in cells for i in c})
            remap = {old: new for new, old in enumerate(used)}
            cells = [[remap[i] for i in c] for c in cells]
            return build_triangulation(n, pts[used], cells)


def random_simplex(n: int, rng: Lcg, min_rel_volume: float = 1e-3) -> np.ndarray:
    """Random nondegenerate simplex coordinates in the unit cube."""
    while True:
        coords = random_points(n, n + 1, rng)
        diam = float(np.max(np.linalg.norm(
            coords[:, None, :] - coords[None, :, :], axis=-1)))
        if diam > 0 and simplex_volume(coords) >= min_rel_volume * diam**n:
            return coords


# -- independent geometry oracles -------------------------------------------


def brute_force_min_ball(points: np.ndarray):
    """Smallest enclosing ball by enumerating all boundary-support subsets."""
    points = np.asarray(points, dtype=float)
    m, dim = points.shape
    best = None
    for size in range(1, min(m, dim + 1) + 1):
        for subset in itertools.combinations(range(m), size):
            sub = points[list(subset)]
            if size == 1:
                center, r2 = sub[0], 0.0
            else:
                u = sub[1:] - sub[0]
                gram = u @ u.T
                if abs(np.linalg.det(gram)) < 1e-14:
                    continue
                lam = np.linalg.solve(gram, 0.5 * np.einsum("ij,ij->i", u, u))
                center = sub[0] + lam @ u
                r2 = float(np.sum((center - sub[0]) ** 2))
            r2_eff = max(float(np.max(np.sum((points - center) ** 2, axis=1))), r2)
            if r2_eff <= r2 * (1 + 1e-9) + 1e-12:
                if best is None or r2 < best[1]:
                    best = (center, r2)
    assert best is not None
    return best[0], math.sqrt(best[1])


def lp_inscribed_ball_diameter(coords: np.ndarray) -> float:
    """Chebyshev center LP: the largest ball inside the simplex."""
    from scipy.optimize import linprog

    coords = np.asarray(coords, dtype=float)
    n = coords.shape[1]
    rows, rhs = [], []
    for skip in range(n + 1):
        face = np.delete(coords, skip, axis=0)
        apex = coords[skip]
        # hyperplane through the face with inward unit normal
        base = face[0]
        span = face[1:] - base
        # normal = component of (apex - base) orthogonal to the span
        v = apex - base
        if len(span):
            q, _ = np.linalg.qr(span.T, mode="reduced")
            v = v - q @ (q.T @ v)
        normal = v / np.linalg.norm(v)
        # inside: normal . x >= normal . base; ball: normal . c - r >= normal . base
        rows.append(np.concatenate((-normal, [1.0])))
        rhs.append(-float(normal @ base))
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs),
                  bounds=[(None, None)] * n + [(0, None)], method="highs")
    assert res.success
    return 2.0 * float(-res.fun)


@pytest.fixture
def lcg():
    return Lcg(2024)
