import itertools

import networkx as nx
import numpy as np
import pytest
from builders import dyadic_levels, load, random_hierarchy, uniform_spaces
from hypothesis import given
from hypothesis import strategies as st

from hbsderham.greville_topology import (
    BettiProfile,
    betti,
    check_boundary_squares_to_zero,
    duality_check,
    greville_subcomplex,
    restricted_spline_dims,
    topology_change,
)
from hbsderham.hierarchy import SubdomainRef, build_hierarchy, itpb
from hbsderham.tensor_forms import component_list

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _is_face(small, big):
    return all(s == b or (s[0] == s[1] and s[0] in b) for s, b in zip(small, big))


def _components(cx):
    """Components of a union of open cells: a cell joins the cells whose closure contains it."""
    cells = [tuple(cx.geometry(c)) for d in range(cx.n + 1) for c in cx.cells[d]]
    g = nx.Graph()
    g.add_nodes_from(range(len(cells)))
    for (u, a), (v, b) in itertools.combinations(enumerate(cells), 2):
        if _is_face(a, b) or _is_face(b, a):
            g.add_edge(u, v)
    return nx.number_connected_components(g)


def _euler(cx):
    """Euler characteristic of an open subset of an n-cube from its open cell counts."""
    compact = sum((-1) ** d * c for d, c in enumerate(cx.counts()))
    return (-1) ** cx.n * compact


def _full(h, level):
    return SubdomainRef(level, np.ones(h.levels[level].cell_counts, bool))


@given(seeds, st.integers(1, 3), st.integers(0, 1), st.booleans())
def test_boundary_squares_to_zero(seed, n, s, cover):
    h = random_hierarchy(np.random.default_rng(seed), n, max_p=2, max_spans=3, L=1)
    assert check_boundary_squares_to_zero(greville_subcomplex(h, 0, s, h.omega(1), cover))


@given(seeds, st.integers(1, 3), st.integers(0, 1), st.booleans())
def test_betti_numbers_match_graph_and_euler_oracles(seed, n, s, cover):
    h = random_hierarchy(np.random.default_rng(seed), n, max_p=2, max_spans=3, L=1)
    cx = greville_subcomplex(h, 0, s, h.omega(1), cover)
    b = betti(cx).ranks
    assert b[0] == _components(cx)
    assert sum((-1) ** d * x for d, x in enumerate(b)) == _euler(cx)
    assert b[n] == 0 or cx.counts()[n] == int(np.prod(h.levels[s].cell_counts))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_whole_box_is_a_ball(n):
    h = build_hierarchy(dyadic_levels(uniform_spaces(n, 2, 3), 1), [[]])
    for s in (0, 1):
        cx = greville_subcomplex(h, 0, s, _full(h, 0), coarse_cover=False)
        assert betti(cx) == [1] + [0] * n
        assert restricted_spline_dims(h, 0, s, _full(h, 0), coarse_cover=False) == [0] * n + [1]


def test_empty_complex():
    h = build_hierarchy(dyadic_levels(uniform_spaces(2, 2, 3), 1), [[]])
    cx = greville_subcomplex(h, 0, 0, h.omega(1))
    assert cx.is_empty and cx.counts() == [0, 0, 0]
    assert betti(cx) == [0, 0, 0]


def test_single_support_is_a_ball():
    h = build_hierarchy(dyadic_levels(uniform_spaces(2, 3, 5), 1), [[(3, 4)]])
    for s in (0, 1):
        for cover in (True, False):
            assert betti(greville_subcomplex(h, 0, s, h.omega(1), cover)) == [1, 0, 0]


def test_betti_profile_behaves_like_a_list():
    b = BettiProfile([1, 0, 2])
    assert b == [1, 0, 2] and list(b) == [1, 0, 2] and b != [1, 0, 0]


def test_two_region_line_complex():
    _, h = load("line_bisect", "two_regions")
    cx = greville_subcomplex(h, 0, 0, h.omega(1), coarse_cover=False)
    assert betti(cx) == [2, 0] == [_components(cx), 0]


def test_complex_json_lists_cells_by_dimension():
    _, h = load("line_bisect", "two_regions")
    cx = greville_subcomplex(h, 0, 0, h.omega(1), coarse_cover=False)
    js = cx.to_json()
    assert [len(c) for c in js["cells"]] == cx.counts()
    assert all(sum(cell["bits"]) == d for d, cs in enumerate(js["cells"]) for cell in cs)


# topology changes between the coarse and fine complexes over the refined domain


@pytest.mark.parametrize(
    "name, coarse, fine",
    [
        ("a", [0, 0, 0], [1, 0, 0]),
        ("b", [2, 0, 0], [1, 0, 0]),
        ("c", [1, 0, 0], [1, 1, 0]),
        ("d", [2, 0, 0], [1, 1, 0]),
    ],
)
def test_planar_inexact_topology_change(name, coarse, fine):
    _, h = load("planar_inexact", name)
    assert topology_change(h) == {"coarse": coarse, "fine": fine}
    for s, want in ((0, coarse), (1, fine)):
        cx = greville_subcomplex(h, 0, s, h.omega(1), coarse_cover=False)
        assert want[0] == _components(cx)
        assert sum((-1) ** d * x for d, x in enumerate(want)) == _euler(cx)


def test_duality_on_admissible_scenario():
    _, h = load("planar_p6", "a")
    checked = 0
    for j in range(3):
        for bits in component_list(2, j):
            for i in itpb(h, 0, bits):
                assert duality_check(h, 0, bits, i)
                checked += 1
    assert checked > 0
    assert duality_check(h, 0, (0, 0), None)
