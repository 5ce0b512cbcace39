"""Closure engine: worked examples, brute-force oracle, joins, sweeps."""

import itertools

import numpy as np
import pytest

from bisectmesh import ColorMap, build_triangulation, check_conformity, init_tagged
from bisectmesh.errors import NonTermination, NotLive, PointOutside
from bisectmesh.mesh import edge_key
from bisectmesh.refine import (
    point_mark,
    refine,
    refine_set,
    simplex_level,
    uniform_refine,
)
from bisectmesh.rules import TaggedSimplex, bisect_tagged, simplex_bse
from conftest import initialized_fixture, random_conforming_mesh


def chain_mesh():
    """Three triangles where marking the rightmost forces a chain through
    the middle one (colors 0,1,2,3,0; N = 3)."""
    coords = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 0.0)]
    cells = [(0, 1, 2), (1, 3, 2), (1, 4, 3)]
    tria = build_triangulation(2, coords, cells)
    init_tagged(tria, ColorMap({0: 0, 1: 1, 2: 2, 3: 3, 4: 0}))
    return tria


def test_refine_kuhn2d_worked_example():
    """Marking one square triangle splits only it (its bisection edge lies
    on the boundary): 3 cells, new vertex generation 1, level 1."""
    tria = initialized_fixture("kuhn2d")
    log = refine(tria, 0, want_log=True, audit=True)
    assert len(tria.live) == 3
    assert log.bisections == 1
    assert log.chains == [[0]]
    mid = log.created_vertices[0]
    assert tria.vertices[mid].attr.gen == 1
    assert tria.vertices[mid].attr.level == 1
    assert check_conformity(tria).ok


def test_refine_shared_diagonal_after_one_split():
    """Once both square triangles are split, the diagonal is the bisection
    edge of both inner children; marking one bisects exactly the pair."""
    tria = initialized_fixture("kuhn2d")
    refine_set(tria, [0, 1])
    inner = [s for s in tria.live_ids() if simplex_bse(tria, s) == (0, 2)]
    assert len(inner) == 2
    log = refine(tria, inner[0], want_log=True, audit=True)
    assert log.bisections == 2
    assert log.chains == [[inner[0]]]
    assert check_conformity(tria).ok
    center = tria.midpoint_index[(0, 2)]
    assert np.allclose(tria.coords_of(center), [0.5, 0.5])
    assert tria.vertices[center].attr.gen == 2


def test_refine_closure_crosses_unsplit_neighbor():
    """Marking an inner child while the other square triangle is still
    unsplit forces the closure through it: one chained bisection more."""
    tria = initialized_fixture("kuhn2d")
    refine(tria, 0)
    target = next(s for s in tria.live_ids() if simplex_bse(tria, s) == (0, 2))
    log = refine(tria, target, want_log=True, audit=True)
    assert log.bisections == 3
    assert any(len(c) == 2 for c in log.chains)
    assert check_conformity(tria).ok
    assert tria.vertices[tria.midpoint_index[(0, 2)]].attr.gen == 2


def test_refine_single_triangle_no_recursion():
    tria = build_triangulation(2, [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)], [(0, 1, 2)])
    init_tagged(tria, ColorMap({0: 0, 1: 1, 2: 2}))
    log = refine(tria, 0, want_log=True)
    assert len(tria.live) == 2
    assert log.depth == 1 and log.chains == [[0]]


def test_refine_not_live():
    tria = initialized_fixture("kuhn2d")
    refine(tria, 0)
    with pytest.raises(NotLive):
        refine(tria, 0)


def test_refine_chain_recorded():
    tria = chain_mesh()
    log = refine(tria, 2, want_log=True, audit=True)
    assert any(len(c) >= 2 for c in log.chains)
    assert log.depth >= 2
    assert check_conformity(tria).ok
    assert len(tria.live) == 6


def _oracle_states(tria, maxb):
    """All meshes reachable from ``tria`` by up to ``maxb`` single
    bisections, as frozensets of (verts, tag) descriptors."""
    coords = {i: tuple(v.coords) for i, v in enumerate(tria.vertices)}
    midpoint: dict = {}

    def midpoint_of(a, b):
        k = edge_key(a, b)
        if k not in midpoint:
            vid = len(coords)
            coords[vid] = tuple((np.array(coords[a]) + np.array(coords[b])) / 2.0)
            midpoint[k] = vid
        return midpoint[k]

    start = frozenset(TaggedSimplex(tria.simplices[s].verts, tria.simplices[s].tag)
                      for s in tria.live)
    frontier = {start}
    seen = {start: 0}
    for depth in range(1, maxb + 1):
        nxt = set()
        for state in frontier:
            for cell in state:
                e = cell.bisection_edge
                mid = midpoint_of(*e)
                c1, c2 = bisect_tagged(cell, mid)
                new = frozenset(state - {cell} | {c1, c2})
                if new not in seen:
                    seen[new] = depth
                    nxt.add(new)
        frontier = nxt
    return seen, coords


def _is_conforming_state(state, coords):
    # bisection descendants of a conforming mesh cannot interpenetrate, so
    # the hanging-vertex check is decisive here
    used = sorted({v for cell in state for v in cell.verts})
    remap = {v: i for i, v in enumerate(used)}
    tria = build_triangulation(2, [coords[v] for v in used],
                               [[remap[v] for v in cell.verts] for cell in state])
    return check_conformity(tria).ok


def _geom_cells(tria):
    return frozenset(
        frozenset(tuple(tria.coords_of(v)) for v in tria.simplices[s].verts)
        for s in tria.live)


def test_refine_matches_brute_force_coarsest_refinement():
    """The engine output is the unique smallest conforming mesh (within
    bisection depth 6) in which the marked simplex is bisected."""
    base = chain_mesh()
    states, coords = _oracle_states(base, 6)
    marked_cell = TaggedSimplex(base.simplices[2].verts, base.simplices[2].tag)
    candidates = [s for s in states
                  if marked_cell not in s and _is_conforming_state(s, coords)]
    assert candidates
    best_size = min(len(s) for s in candidates)
    best = [s for s in candidates if len(s) == best_size]
    assert len(best) == 1

    engine = chain_mesh()
    refine(engine, 2, audit=True)
    oracle_cells = frozenset(
        frozenset(tuple(np.asarray(coords[v])) for v in cell.verts) for cell in best[0])
    assert _geom_cells(engine) == oracle_cells
    assert len(engine.live) == best_size


def test_refine_set_join_and_empty():
    tria = initialized_fixture("strip")
    refine_set(tria, [])
    assert len(tria.live) == 10
    a = initialized_fixture("strip")
    refine_set(a, [0, 7])
    b = initialized_fixture("strip")
    refine_set(b, [7, 0])
    assert _geom_cells(a) == _geom_cells(b)
    assert check_conformity(a).ok and check_conformity(b).ok


def test_refine_set_mark_all_doubles_kuhn():
    tria = initialized_fixture("kuhn3d")
    refine_set(tria, tria.live_ids())
    assert len(tria.live) == 12
    assert check_conformity(tria).ok


def test_order_independence_random_subsets():
    for seed in range(6):
        base = random_conforming_mesh(2, 400 + seed)
        from bisectmesh import greedy_color
        from bisectmesh.rng import Lcg

        rng = Lcg(seed)
        marks = sorted({rng.below(len(base.live)) for _ in range(3)})
        runs = []
        for order in (list(marks), list(reversed(marks))):
            tria = random_conforming_mesh(2, 400 + seed)
            init_tagged(tria, greedy_color(tria))
            refine_set(tria, order)
            assert check_conformity(tria).ok
            runs.append(_geom_cells(tria))
        assert runs[0] == runs[1]


def test_uniform_round_examples():
    tria = initialized_fixture("kuhn2d")
    uniform_refine(tria, 1)
    assert len(tria.live) == 8
    assert check_conformity(tria).ok

    tria = initialized_fixture("kuhn3d")
    uniform_refine(tria, 1)
    assert len(tria.live) == 48
    assert check_conformity(tria).ok

    tria = initialized_fixture("kuhn2d")
    uniform_refine(tria, 0)
    assert len(tria.live) == 2


def test_uniform_rounds_conforming_for_generalized_coloring():
    """Full rounds stay conforming also for N > n (pentagon fan, strip)."""
    for name in ("pentagon_fan", "strip"):
        tria = initialized_fixture(name)
        n0 = len(tria.live)
        for r in (1, 2):
            uniform_refine(tria, 1)
            assert check_conformity(tria).ok, (name, r)
            assert len(tria.live) == n0 * 4**r


def test_point_mark_examples():
    tria = initialized_fixture("kuhn2d")
    s0 = tria.simplices[0]
    bary = np.mean(tria.simplex_coords(s0.verts), axis=0)
    assert point_mark(tria, bary) == {0}
    # the shared diagonal midpoint belongs to both triangles
    assert point_mark(tria, [0.5, 0.5]) == {0, 1}
    # a vertex of k simplices marks those k
    assert point_mark(tria, [0.0, 0.0]) == {0, 1}
    assert point_mark(tria, [1.0, 0.0]) == {0}
    with pytest.raises(PointOutside):
        point_mark(tria, [2.0, 2.0])


def test_nontermination_guard():
    tria = chain_mesh()
    with pytest.raises(NonTermination):
        refine(tria, 2, budget=1)


def test_level_increase_bounded():
    """Created simplices never exceed the marked level by more than one."""
    tria = initialized_fixture("strip")
    from bisectmesh.rng import Lcg

    rng = Lcg(5)
    for _ in range(60):
        live = tria.live_ids()
        marked = live[rng.below(len(live))]
        lvl = simplex_level(tria, marked)
        log = refine(tria, marked, want_log=True, audit=True)
        for cid in log.created_simplices:
            if cid in tria.live:
                assert simplex_level(tria, cid) <= lvl + 1
    assert check_conformity(tria).ok


def test_level_equals_full_round_count():
    """The level computed from vertex generations counts completed rounds:
    it increases at the 1st, (n+1)-th, (2n+1)-th... bisection."""
    import math

    for name in ("kuhn2d", "strip", "kuhn3d"):
        tria = initialized_fixture(name)
        from bisectmesh.rng import Lcg

        rng = Lcg(17)
        for _ in range(40):
            live = tria.live_ids()
            refine(tria, live[rng.below(len(live))])
        for sid in tria.live:
            s = tria.simplices[sid]
            assert simplex_level(tria, sid) == math.ceil(s.gen_count / tria.dim), name


def test_strict_oldest_edge_on_refined_meshes():
    """The bisection edge is the unique gensharp minimizer among all edges
    of every live simplex."""
    from bisectmesh.rng import Lcg
    from bisectmesh.rules import edge_gensharp

    for name in ("kuhn2d", "strip"):
        tria = initialized_fixture(name)
        rng = Lcg(23)
        for _ in range(50):
            live = tria.live_ids()
            refine(tria, live[rng.below(len(live))])
        for sid in tria.live:
            verts = tria.simplices[sid].verts
            bse = simplex_bse(tria, sid)
            own = edge_gensharp(tria, *bse)
            for a, b in itertools.combinations(verts, 2):
                if edge_key(a, b) != bse:
                    assert edge_gensharp(tria, a, b) > own
