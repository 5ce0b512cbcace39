"""Geometric and combinatorial verification suite.

Shape regularity is the ratio of the smallest enclosing ball diameter to
the inscribed ball diameter.  The inscribed ball comes from the height-sum
identity 1/r = (1/2) * sum_f 1/h_f over the hyperfaces; the enclosing ball
from a move-to-front Welzl computation over the n+1 vertices.  On top of
these the module provides Kuhn simplices, similarity-class enumeration of
bisection descendants, level/diameter constants, quasi-uniformity and the
closure-ratio statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Degenerate, EmptyHistory, InvalidPermutation, SingularMatrix
from .mesh import Triangulation, simplex_volume
from .refine import MarkHistory, simplex_level

BALL_TOL = 1e-12
KEY_DECIMALS = 9


# -- smallest enclosing ball ----------------------------------------------


def _circumball(points: np.ndarray):
    """Smallest ball with all given (affinely independent) points on its
    boundary; center and squared radius."""
    if len(points) == 1:
        return points[0].copy(), 0.0
    u = points[1:] - points[0]
    b = 0.5 * np.einsum("ij,ij->i", u, u)
    try:
        lam = np.linalg.solve(u @ u.T, b)
    except np.linalg.LinAlgError:
        return None
    center = points[0] + lam @ u
    r2 = float(np.sum((center - points[0]) ** 2))
    return center, r2


def _welzl(points: np.ndarray):
    """Recursive Welzl with support sets; deterministic over the input order."""
    dim = points.shape[1]

    def ball_of(support):
        if not support:
            return None
        return _circumball(points[support])

    def contains(ball, idx):
        if ball is None:
            return False
        c, r2 = ball
        return float(np.sum((points[idx] - c) ** 2)) <= r2 * (1 + BALL_TOL) + BALL_TOL

    def solve(idxs, support):
        if not idxs or len(support) == dim + 1:
            return ball_of(support)
        head, rest = idxs[0], idxs[1:]
        ball = solve(rest, support)
        if ball is not None and contains(ball, head):
            return ball
        return solve(rest, support + [head])

    return solve(list(range(len(points))), [])


def enclosing_ball(coords: np.ndarray):
    """Center and radius of the smallest enclosing ball of the points."""
    coords = np.asarray(coords, dtype=float)
    ball = _welzl(coords)
    if ball is None:
        raise Degenerate("cannot compute enclosing ball")
    c, r2 = ball
    return c, math.sqrt(max(r2, 0.0))


def enclosing_ball_diameter(coords) -> float:
    """Diameter of the smallest ball containing the simplex (equivalently,
    its vertices)."""
    _, r = enclosing_ball(coords)
    return 2.0 * r


# -- heights, inradius, shape ----------------------------------------------


def diameter(coords) -> float:
    coords = np.asarray(coords, dtype=float)
    return float(np.max(np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=-1)))


def _gram_volume(edges: np.ndarray) -> float:
    """k-volume of the parallelepiped spanned by rows, via the Gram matrix."""
    g = edges @ edges.T
    det = float(np.linalg.det(g))
    return math.sqrt(max(det, 0.0))


def face_volume(coords: np.ndarray) -> float:
    """(k-1)-volume of the simplex spanned by k points in any dimension."""
    coords = np.asarray(coords, dtype=float)
    k = len(coords) - 1
    if k == 0:
        return 1.0
    return _gram_volume(coords[1:] - coords[0]) / math.factorial(k)


def heights(coords) -> np.ndarray:
    """Altitude above every hyperface: h_f = n |T| / |f|."""
    coords = np.asarray(coords, dtype=float)
    n = len(coords) - 1
    vol = face_volume(coords)
    if vol <= 0.0:
        raise Degenerate("zero-volume simplex")
    hs = []
    for skip in range(n + 1):
        f = np.delete(coords, skip, axis=0)
        fvol = face_volume(f)
        if fvol <= 0.0:
            raise Degenerate("degenerate hyperface")
        hs.append(n * vol / fvol)
    return np.array(hs)


def inradius_diameter(coords) -> float:
    """Inscribed-ball diameter from the height identity 1/r = 1/2 sum 1/h_f."""
    return 2.0 / float(np.sum(1.0 / heights(coords)))


def min_height(coords) -> float:
    return float(np.min(heights(coords)))


def shape_regularity(coords) -> float:
    """gamma = enclosing ball diameter / inscribed ball diameter (>= 1)."""
    return enclosing_ball_diameter(coords) / inradius_diameter(coords)


def shape_bound(n: int) -> float:
    """Upper bound on gamma(T)/gamma(T0) for bisection descendants."""
    return 2.0 * n * (n + math.sqrt(2.0) - 1.0)


def similarity_class_bound(n: int) -> int:
    """Largest possible number of similarity classes per initial simplex."""
    return math.factorial(n) * n * 2 ** (n - 2) if n >= 2 else 1


# -- Kuhn simplices ---------------------------------------------------------


def kuhn_simplex(n: int, pi=None) -> np.ndarray:
    """Prefix-sum simplex of the unit cube for a permutation of 1..n."""
    if pi is None:
        pi = list(range(1, n + 1))
    if sorted(pi) != list(range(1, n + 1)):
        raise InvalidPermutation(f"{pi} is not a permutation of 1..{n}")
    coords = np.zeros((n + 1, n))
    for k, axis in enumerate(pi):
        coords[k + 1] = coords[k]
        coords[k + 1, axis - 1] += 1.0
    return coords


# -- similarity classes ------------------------------------------------------


def similarity_key(coords) -> tuple:
    """Scale- and congruence-invariant key: sorted squared pairwise
    distances divided by the smallest, rounded to 9 decimals."""
    coords = np.asarray(coords, dtype=float)
    d2 = []
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            d2.append(float(np.sum((coords[i] - coords[j]) ** 2)))
    lo = min(d2)
    if lo <= 0.0:
        raise Degenerate("coincident vertices")
    return tuple(sorted(round(x / lo, KEY_DECIMALS) for x in d2))


def _ordered_key(coords) -> tuple:
    """Like :func:`similarity_key` but order-sensitive; together with the
    tag it determines the whole descendant tree up to similarity."""
    coords = np.asarray(coords, dtype=float)
    d2 = []
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            d2.append(float(np.sum((coords[i] - coords[j]) ** 2)))
    lo = min(d2)
    return tuple(round(x / lo, KEY_DECIMALS) for x in d2)


def tagged_children_coords(coords: np.ndarray, tag: int):
    """Coordinate arrays and tags of the two children of a tagged simplex."""
    n = len(coords) - 1
    mid = (coords[0] + coords[tag]) / 2.0
    new_tag = tag - 1 if tag >= 2 else n
    c1 = np.vstack((coords[:tag], [mid], coords[tag + 1:]))
    c2 = np.vstack((coords[1:tag + 1], [mid], coords[tag + 1:]))
    return (c1, new_tag), (c2, new_tag)


def iter_descendants(coords, tag: int, depth: int):
    """Yield ``(coords, tag, generation)`` for the full bisection tree down
    to ``depth`` bisections, the root included."""
    stack = [(np.asarray(coords, dtype=float), tag, 0)]
    while stack:
        c, t, g = stack.pop()
        yield c, t, g
        if g < depth:
            for child, ct in tagged_children_coords(c, t):
                stack.append((child, ct, g + 1))


def descendant_shape_stats(coords, tag: int, depth: int):
    """Similarity classes and worst shape regularity over all descendants.

    Subtrees rooted at a previously seen (ordered key, tag) pair are similar
    copies of explored ones and are pruned, which makes deep enumerations
    cheap once every class has appeared.
    """
    seen: dict[tuple, int] = {}
    classes: set = set()
    gamma_max = 0.0
    stack = [(np.asarray(coords, dtype=float), tag, depth)]
    while stack:
        c, t, rem = stack.pop()
        key = (_ordered_key(c), t)
        if seen.get(key, -1) >= rem:
            continue
        seen[key] = rem
        classes.add(similarity_key(c))
        gamma_max = max(gamma_max, shape_regularity(c))
        if rem > 0:
            for child, ct in tagged_children_coords(c, t):
                stack.append((child, ct, rem - 1))
    return classes, gamma_max


def similarity_classes(simplex_coords_list):
    """Partition simplices into similarity classes; returns (count, dict)."""
    parts: dict[tuple, list[int]] = {}
    for i, coords in enumerate(simplex_coords_list):
        parts.setdefault(similarity_key(coords), []).append(i)
    return len(parts), parts


# -- mesh-level statistics ---------------------------------------------------


def level_diameter_constants(tria: Triangulation, include_dead: bool = False):
    """Constants (d, D) with d 2^-level <= diam <= D 2^-level over simplices."""
    sids = tria.simplices.keys() if include_dead else tria.live
    vals = []
    for sid in sids:
        s = tria.simplices[sid]
        lvl = simplex_level(tria, sid)
        vals.append(diameter(tria.simplex_coords(s.verts)) * 2.0**lvl)
    if not vals:
        raise EmptyHistory("no simplices")
    return min(vals), max(vals)


def quasi_uniformity(tria: Triangulation) -> float:
    """Largest volume ratio between two cells of the (initial) mesh."""
    vols = [tria.simplices[sid].volume for sid in tria.live]
    return max(vols) / min(vols)


def bdv_ratio(hist: MarkHistory, initial_cells: int | None = None) -> float:
    """Observed closure ratio (#T_L - #T_0) / sum_l #M_l."""
    total = hist.total_marked()
    if total == 0:
        raise EmptyHistory("no simplices were marked")
    t0 = hist.initial_cells if initial_cells is None else initial_cells
    return (hist.entries[-1][1] - t0) / total


# -- affine transformation inequalities --------------------------------------


@dataclass
class TransformationReport:
    """Evaluation of the three inequality chains for F(x) = Ax + b."""

    chains: list[tuple[float, float, float]]
    slacks: list[float]
    ok: bool


def spectral_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2))


def transformation_check(a, b, coords, slack: float = 1e-9) -> TransformationReport:
    """Check r/R/gamma compatibility of a simplex with its affine image.

    The three chains are, with F(T) the image simplex and |.| the spectral
    norm:

    1. r(T) <= |A^-1| r(F(T)) <= diam(T)
    2. w(T) <= R(F(T)) / |A| <= R(T)
    3. w(T)/diam(T) <= gamma(F(T)) / (|A| |A^-1|) <= gamma(T)
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    coords = np.asarray(coords, dtype=float)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond >= 1e8:
        raise SingularMatrix(f"condition number {cond:g} too large")
    na = spectral_norm(a)
    nai = spectral_norm(np.linalg.inv(a))
    image = coords @ a.T + b

    r_t = inradius_diameter(coords)
    r_f = inradius_diameter(image)
    big_r_t = enclosing_ball_diameter(coords)
    big_r_f = enclosing_ball_diameter(image)
    w_t = min_height(coords)
    diam_t = diameter(coords)
    gamma_t = big_r_t / r_t
    gamma_f = big_r_f / r_f

    chains = [
        (r_t, nai * r_f, diam_t),
        (w_t, big_r_f / na, big_r_t),
        (w_t / diam_t, gamma_f / (na * nai), gamma_t),
    ]
    slacks = []
    ok = True
    for lo, mid_v, hi in chains:
        scale = max(abs(lo), abs(mid_v), abs(hi), 1e-300)
        s = min(mid_v - lo, hi - mid_v) / scale
        slacks.append(s)
        if mid_v < lo - slack * scale or mid_v > hi + slack * scale:
            ok = False
    return TransformationReport(chains, slacks, ok)


# -- reports -----------------------------------------------------------------


@dataclass
class ShapeReport:
    """Per-simplex geometry: radii, heights, shape ratio, similarity key."""

    sid: int
    r: float
    R: float
    w: float
    heights: list[float]
    gamma: float
    diam: float
    volume: float
    similarity_key: tuple

    def to_dict(self) -> dict:
        return {
            "sid": self.sid,
            "r": self.r,
            "R": self.R,
            "w": self.w,
            "heights": self.heights,
            "gamma": self.gamma,
            "diam": self.diam,
            "volume": self.volume,
            "similarity_key": list(self.similarity_key),
        }


def shape_report(tria: Triangulation, sid: int) -> ShapeReport:
    s = tria.simplices[sid]
    coords = tria.simplex_coords(s.verts)
    hs = heights(coords)
    r = 2.0 / float(np.sum(1.0 / hs))
    return ShapeReport(
        sid=sid,
        r=r,
        R=enclosing_ball_diameter(coords),
        w=float(np.min(hs)),
        heights=[float(h) for h in hs],
        gamma=enclosing_ball_diameter(coords) / r,
        diam=diameter(coords),
        volume=s.volume,
        similarity_key=similarity_key(coords),
    )


@dataclass
class AnalysisReport:
    gamma_max_initial: float | None
    gamma_max_current: float
    gamma_ratio: float | None
    similarity_class_counts: dict[int, int]
    d: float | None
    D: float | None
    D_over_d: float | None
    C_qu: float | None
    C_BDV_lb: float | None
    N: int | None
    cells: int

    def to_dict(self) -> dict:
        return {
            "gamma_max_initial": self.gamma_max_initial,
            "gamma_max_current": self.gamma_max_current,
            "gamma_ratio": self.gamma_ratio,
            "similarity_class_counts": {str(k): v for k, v in
                                        sorted(self.similarity_class_counts.items())},
            "d": self.d,
            "D": self.D,
            "D_over_d": self.D_over_d,
            "C_qu": self.C_qu,
            "C_BDV_lb": self.C_BDV_lb,
            "N": self.N,
            "cells": self.cells,
        }


def analyze(tria: Triangulation, initial: Triangulation | None = None,
            history: MarkHistory | None = None) -> AnalysisReport:
    """Mesh-level statistics; level-based fields require initialized attrs."""
    gammas = []
    by_ancestor: dict[int, set] = {}
    for sid in tria.live_ids():
        s = tria.simplices[sid]
        coords = tria.simplex_coords(s.verts)
        gammas.append(shape_regularity(coords))
        by_ancestor.setdefault(s.ancestor, set()).add(similarity_key(coords))
    gamma_cur = max(gammas)

    gamma_init = None
    c_qu = None
    if initial is not None:
        gamma_init = max(shape_regularity(initial.simplex_coords(initial.simplices[sid].verts))
                         for sid in initial.live_ids())
        c_qu = quasi_uniformity(initial)
    else:
        has_attrs = all(tria.vertices[v].attr is not None
                        for sid in tria.live
                        for v in tria.simplices[sid].verts)
        if has_attrs and all(tria.simplices[sid].gen_count == 0 for sid in tria.live):
            gamma_init = gamma_cur
        if all(tria.simplices[sid].gen_count == 0 for sid in tria.live):
            c_qu = quasi_uniformity(tria)

    d = big_d = None
    has_attrs = all(tria.vertices[v].attr is not None
                    for sid in tria.live for v in tria.simplices[sid].verts)
    if has_attrs:
        d, big_d = level_diameter_constants(tria)

    c_bdv = None
    if history is not None and history.total_marked() > 0:
        c_bdv = bdv_ratio(history)

    return AnalysisReport(
        gamma_max_initial=gamma_init,
        gamma_max_current=gamma_cur,
        gamma_ratio=None if gamma_init is None else gamma_cur / gamma_init,
        similarity_class_counts={k: len(v) for k, v in by_ancestor.items()},
        d=d,
        D=big_d,
        D_over_d=None if d is None else big_d / d,
        C_qu=c_qu,
        C_BDV_lb=c_bdv,
        N=tria.max_color,
        cells=len(tria.live),
    )
