from fractions import Fraction as F

import numpy as np
import pytest
from builders import dyadic_levels, load, random_hierarchy, random_spaces, uniform_spaces
from hypothesis import given
from hypothesis import strategies as st
from oracles import dense_from_sparse, space_value, sympy_rank

from hbsderham.cohomology import (
    _closure_float,
    closure_check,
    cohomology_dims,
    complex_matrices,
    hierarchical_basis_matrix,
)
from hbsderham.errors import ClosureViolated
from hbsderham.hierarchy import HierarchicalBasis, build_hierarchy, hierarchical_basis
from hbsderham.linalg import exact_rank
from hbsderham.tensor_forms import component_list

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _tensor_value(kvs, bits, index, x):
    out = F(1)
    for kv, b, i, xk in zip(kvs, bits, index, x):
        out *= space_value(kv.knots, kv.degree, b, i, xk)
    return out


def _drop(basis, bits, level, flat_index):
    sel = dict(basis.selected)
    per_level = list(sel[bits])
    per_level[level] = per_level[level][per_level[level] != flat_index]
    sel[bits] = tuple(per_level)
    return HierarchicalBasis(basis.hierarchy, sel)


# the basis matrix


def test_single_level_basis_matrix_is_identity():
    h = build_hierarchy([uniform_spaces(2, 2, 3)], [])
    basis = hierarchical_basis(h)
    for j in range(3):
        P = hierarchical_basis_matrix(h, basis, j, exact=True).matrix
        n = h.levels[0].form_dim(j)
        assert P.to_dense() == [[F(int(r == c)) for c in range(n)] for r in range(n)]


@given(seeds)
def test_basis_matrix_columns_reproduce_coarse_functions(seed):
    rng = np.random.default_rng(seed)
    h = random_hierarchy(rng, 2, max_p=2, max_spans=3, L=1)
    basis = hierarchical_basis(h)
    fine = h.levels[1]
    for j in range(3):
        bm = hierarchical_basis_matrix(h, basis, j, exact=True)
        dense = dense_from_sparse(bm.matrix)
        off = fine.component_offsets(j)
        for c in rng.choice(len(bm.keys), size=min(3, len(bm.keys)), replace=False):
            key = bm.keys[int(c)]
            x = tuple(F(int(rng.integers(0, 97)), 97) for _ in range(2))
            lhs = _tensor_value(h.levels[key.level].knot_vectors, key.bits, key.index, x)
            rhs = F(0)
            for r, row in enumerate(dense):
                if row[c]:
                    bits = next(b for b in reversed(component_list(2, j)) if r >= off[b])
                    rhs += row[c] * _tensor_value(fine.knot_vectors, bits, fine.unflat(bits, r - off[bits]), x)
            assert lhs == rhs


@given(seeds, st.integers(1, 3))
def test_hierarchical_functions_are_independent(seed, n):
    h = random_hierarchy(np.random.default_rng(seed), n, max_p=2, max_spans=3, L=2 if n < 3 else 1)
    basis = hierarchical_basis(h)
    for j in range(n + 1):
        P = hierarchical_basis_matrix(h, basis, j, exact=True).matrix
        assert exact_rank(P) == P.shape[1] == basis.dim(j)


def test_float_and_exact_basis_matrices_agree():
    h = random_hierarchy(np.random.default_rng(11), 2, L=2)
    basis = hierarchical_basis(h)
    for j in range(3):
        a = hierarchical_basis_matrix(h, basis, j, exact=True)
        b = hierarchical_basis_matrix(h, basis, j, exact=False)
        assert a.keys == b.keys
        assert np.allclose(a.matrix.toarray(), b.matrix.toarray(), atol=1e-14)


# closure


@given(seeds, st.integers(1, 3))
def test_closure_holds_for_zero_form_unions(seed, n):
    h = random_hierarchy(np.random.default_rng(seed), n, max_p=3, max_spans=3, L=2 if n < 3 else 1)
    mats = complex_matrices(h, exact=True)
    assert all(closure_check(h, j=j, mats=mats) for j in range(n))


def test_closure_fails_for_a_truncated_basis():
    h = build_hierarchy(dyadic_levels(uniform_spaces(2, 2, 3), 1), [[(2, 2)]])
    basis = hierarchical_basis(h)
    # drop a level-1 (1,0)-form lying under the refined 0-form's gradient
    fine_flat = int(basis.selected[(1, 0)][1][0])
    broken = _drop(basis, (1, 0), 1, fine_flat)
    assert closure_check(h, basis, 0, "exact")
    assert not closure_check(h, broken, 0, "exact")
    assert not closure_check(h, broken, 0, "float")
    with pytest.raises(ClosureViolated):
        cohomology_dims(h, broken, backend="exact")


@pytest.mark.parametrize("block", [1, 2, 5])
def test_blocked_float_closure_agrees_with_exact(block):
    h = build_hierarchy(dyadic_levels(uniform_spaces(2, 2, 3), 1), [[(2, 2)]])
    basis = hierarchical_basis(h)
    broken = _drop(basis, (1, 0), 1, int(basis.selected[(1, 0)][1][0]))
    for b, want in ((basis, True), (broken, False)):
        mats = complex_matrices(h, b, exact=False)
        assert _closure_float(mats.P[1].matrix, mats.DP(0), block=block) is want


# dimensions


@given(seeds, st.integers(1, 3))
def test_unrefined_complex_has_box_cohomology(seed, n):
    sp_ = random_spaces(np.random.default_rng(seed), n, max_p=3, max_spans=3, min_dim=2)
    rep = cohomology_dims(build_hierarchy([sp_], []), backend="exact")
    assert rep.dims == [0] * n + [1] and rep.exact


@given(seeds, st.integers(1, 2))
def test_ranks_match_sympy(seed, n):
    h = random_hierarchy(np.random.default_rng(seed), n, max_p=2, max_spans=3, L=1)
    mats = complex_matrices(h, exact=True)
    rep = cohomology_dims(h, backend="exact", mats=mats)
    assert rep.ranks == [sympy_rank(dense_from_sparse(mats.DP(j))) for j in range(n)]


@given(seeds, st.integers(1, 3))
def test_euler_characteristic(seed, n):
    h = random_hierarchy(np.random.default_rng(seed), n, max_p=3, max_spans=3, L=1)
    rep = cohomology_dims(h, backend="float")
    assert rep.euler_consistent
    space = hierarchical_basis(h).dims()
    assert sum((-1) ** j * d for j, d in enumerate(space)) == sum((-1) ** j * d for j, d in enumerate(rep.dims))


@given(seeds, st.integers(1, 3))
def test_exact_and_float_backends_agree(seed, n):
    h = random_hierarchy(np.random.default_rng(seed), n, max_p=3, max_spans=3, L=2 if n < 3 else 1)
    a = cohomology_dims(h, backend="exact")
    b = cohomology_dims(h, backend="float", float_method="qr")
    c = cohomology_dims(h, backend="float", float_method="laplacian")
    assert a.dims == b.dims == c.dims
    assert a.ranks == b.ranks == c.ranks
    assert b.float_method == "qr" and c.float_method == "laplacian"


def test_report_on_known_inexact_scenario():
    _, h = load("planar_inexact", "b")
    rep = cohomology_dims(h)
    assert rep.spurious == [0, 1, 0] and not rep.exact
    js = rep.to_json()
    assert js["spurious"] == [0, 1, 0] and js["exact"] is False and js["float_method"] == "qr"


def test_unknown_float_method():
    h = build_hierarchy([uniform_spaces(1, 2, 3)], [])
    with pytest.raises(ValueError):
        cohomology_dims(h, float_method="svd")
