"""Greedy coloring, validation and the valency bound."""

import itertools

import pytest

from bisectmesh import ColorMap, build_triangulation, greedy_color, max_valency, verify_coloring
from bisectmesh.errors import UncoloredVertex
from bisectmesh.fixtures import fixture_mesh, fixture_triangulation
from conftest import random_conforming_mesh


def _edges(tria):
    return sorted(tria.edge_index)


def test_single_simplex_clique():
    tria = build_triangulation(2, [(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])
    cm = greedy_color(tria)
    assert [cm.colors[v] for v in range(3)] == [0, 1, 2]
    assert cm.ncolors_minus_one == 2


def test_square_hand_run():
    """Index order a,b,c,d with diagonal a-c gives colors 0,1,2,1."""
    tria = fixture_triangulation("square")
    cm = greedy_color(tria)
    assert [cm.colors[v] for v in range(4)] == [0, 1, 2, 1]
    assert cm.ncolors_minus_one == 2


def exhaustive_coloring(tria, ncolors):
    """All valid assignments with the given number of colors (oracle)."""
    edges = _edges(tria)
    found = []
    for assign in itertools.product(range(ncolors), repeat=len(tria.vertices)):
        if all(assign[a] != assign[b] for a, b in edges):
            found.append(assign)
    return found


def test_pentagon_fan_needs_four_colors():
    tria = fixture_triangulation("pentagon_fan")
    assert exhaustive_coloring(tria, 3) == []
    four = exhaustive_coloring(tria, 4)
    assert four
    cm = greedy_color(tria)
    assert cm.ncolors_minus_one == 3
    ok, violation = verify_coloring(tria, cm)
    assert ok and violation is None
    # any valid 4-coloring from the oracle verifies as well
    cm4 = ColorMap(dict(enumerate(four[0])))
    assert verify_coloring(tria, cm4) == (True, None)


def test_verify_detects_conflict():
    tria = fixture_triangulation("square")
    cm = greedy_color(tria)
    cm.colors[3] = 0  # edge (0, 3) now monochrome
    ok, violation = verify_coloring(tria, cm)
    assert not ok
    assert violation == (0, 3)


def test_verify_requires_all_colors():
    tria = fixture_triangulation("square")
    with pytest.raises(UncoloredVertex):
        verify_coloring(tria, ColorMap({0: 0}))


def test_max_valency_examples():
    single = build_triangulation(2, [(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])
    assert max_valency(single) == 2
    assert max_valency(fixture_triangulation("square")) == 3
    assert max_valency(fixture_triangulation("pentagon_fan")) == 5


def test_greedy_is_deterministic():
    tria = fixture_triangulation("pentagon_fan")
    a = greedy_color(tria, order="id")
    b = greedy_color(tria, order="id")
    assert a.colors == b.colors
    c = greedy_color(tria, order="valency")
    assert verify_coloring(tria, c)[0]


def test_greedy_valency_bound_and_validity_on_random_meshes():
    """Largest color <= max valency; greedy output always verifies; N >= n."""
    checked = 0
    for n in (2, 3):
        for seed in range(50):
            tria = random_conforming_mesh(n, 1000 * n + seed)
            for order in ("id", "valency"):
                cm = greedy_color(tria, order=order)
                assert verify_coloring(tria, cm)[0]
                assert cm.ncolors_minus_one <= max_valency(tria)
                assert cm.ncolors_minus_one >= n
                checked += 1
    assert checked == 200


def test_fixture_colorings_are_valid():
    for name in ("kuhn2d", "kuhn3d", "kuhn4d", "fichera", "strip"):
        d = fixture_mesh(name)
        tria = fixture_triangulation(name)
        cm = ColorMap(dict(enumerate(d["colors"])))
        assert verify_coloring(tria, cm)[0], name
