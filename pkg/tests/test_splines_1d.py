from fractions import Fraction as F

import numpy as np
import pytest
from builders import random_knot_vector
from hypothesis import given
from hypothesis import strategies as st
from oracles import space_value

from hbsderham.errors import (
    BadDegree,
    BadRange,
    DegreeMismatch,
    ExcessMultiplicity,
    IndexOutOfRange,
    NotNested,
    NotOpen,
    NotSorted,
    OutOfDomain,
)
from hbsderham.splines_1d import (
    UnivariateSpace,
    as_rational,
    basis_matrix,
    derivative_matrix_1d,
    dimension,
    dyadic_refinement,
    eval_basis,
    greville_mesh,
    insertion_matrix_1d,
    integral_weights_1d,
    is_nested,
    local_knot_vector,
    support_1d,
    uniform_knot_vector,
    validate_knot_vector,
)

SAMPLE_KV = ["0", "0", "1/4", "1/2", "3/4", "3/4", "1", "1"]
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def kv():
    return validate_knot_vector(SAMPLE_KV, 2)


@pytest.fixture
def hat():
    return validate_knot_vector([0, F(1, 2), 1], 1)


# validate_knot_vector


def test_sample_knot_vector_is_valid(kv):
    assert kv.m == 5
    assert kv.knots[2] == F(1, 4)


def test_minimal_linear_knot_vector(hat):
    assert hat.m == 1


def test_wrong_end_multiplicity_is_not_open():
    with pytest.raises(NotOpen):
        validate_knot_vector([0, 0, 0, F(1, 2), 1, 1], 2)


@pytest.mark.parametrize(
    "knots, p, err",
    [
        ([0, 0, F(1, 2), F(1, 2), F(1, 2), 1, 1], 2, ExcessMultiplicity),
        ([0, 0, F(3, 4), F(1, 4), 1, 1], 2, NotSorted),
        ([F(1, 8), F(1, 8), F(1, 2), 1, 1], 2, BadRange),
        ([0, 0, 1, 1], 0, BadDegree),
        ([], 1, BadRange),
    ],
)
def test_invalid_knot_vectors(knots, p, err):
    with pytest.raises(err):
        validate_knot_vector(knots, p)


def test_rationals_parse_from_strings_and_ints():
    assert as_rational("3/6") == F(1, 2)
    assert as_rational(2) == F(2)
    with pytest.raises(TypeError):
        as_rational(True)


# dimension


def test_dimensions(kv, hat):
    assert dimension(UnivariateSpace(kv, 0)) == 5
    assert dimension(UnivariateSpace(kv, 1)) == 6
    assert dimension(UnivariateSpace(hat, 0)) == 1
    with pytest.raises(BadDegree):
        UnivariateSpace(kv, 2)


# greville_mesh


def test_greville_points_sample(kv):
    # (xi_{i+1} + xi_{i+2}) / 2 for i = 1..5, framed by 0 and 1
    assert greville_mesh(kv).points == (0, F(1, 8), F(3, 8), F(5, 8), F(3, 4), F(7, 8), 1)


def test_greville_points_linear(hat):
    g = greville_mesh(hat)
    assert g.points == (0, F(1, 2), 1)
    assert g.edges == ((0, F(1, 2)), (F(1, 2), 1))


def test_greville_points_uniform_quadratic():
    kv = validate_knot_vector([0, 0, F(1, 3), F(2, 3), 1, 1], 2)
    assert greville_mesh(kv).points == (0, F(1, 6), F(1, 2), F(5, 6), 1)


@given(seeds, st.integers(1, 5))
def test_greville_strictly_increasing_and_edge_count(seed, p):
    kv = random_knot_vector(np.random.default_rng(seed), p)
    g = greville_mesh(kv)
    assert all(a < b for a, b in zip(g.points, g.points[1:]))
    assert len(g.edges) == kv.m + 1 == dimension(UnivariateSpace(kv, 1))


# local knot vectors and supports


def test_local_knot_vectors(kv):
    assert local_knot_vector(kv, 0, 1) == (0, 0, F(1, 4), F(1, 2))
    assert local_knot_vector(kv, 1, 1) == (0, 0, F(1, 4))
    with pytest.raises(IndexOutOfRange):
        local_knot_vector(kv, 0, 6)


def test_supports(kv, hat):
    assert support_1d(kv, 0, 1) == (0, F(1, 2))
    assert support_1d(kv, 1, 3) == (F(1, 4), F(3, 4))
    assert support_1d(hat, 0, 1) == (0, 1)
    with pytest.raises(IndexOutOfRange):
        support_1d(kv, 1, 0)


# evaluation


def test_hat_peak(hat):
    assert eval_basis(hat, 0, 1, F(1, 2)) == 1.0


def test_zero_forms_vanish_at_left_end(kv):
    assert eval_basis(kv, 0, 1, 0) == 0.0


def test_evaluation_errors(kv):
    with pytest.raises(OutOfDomain):
        eval_basis(kv, 0, 1, F(3, 2))
    with pytest.raises(IndexOutOfRange):
        eval_basis(kv, 0, 6, F(1, 2))


def test_sample_basis_matches_truncated_power_oracle(kv):
    rng = np.random.default_rng(0)
    for _ in range(300):
        i = int(rng.integers(1, kv.m + 1))
        x = F(int(rng.integers(0, 10**6)), 10**6)
        assert abs(eval_basis(kv, 0, i, x) - float(space_value(kv.knots, 2, 0, i, x))) <= 1e-12


@given(seeds, st.integers(1, 5), st.integers(0, 1))
def test_exact_evaluation_equals_oracle(seed, p, j):
    rng = np.random.default_rng(seed)
    kv = random_knot_vector(rng, p)
    for _ in range(5):
        i = int(rng.integers(1, kv.m + j + 1))
        x = F(int(rng.integers(0, 997)), 997)
        assert eval_basis(kv, j, i, x, exact=True) == space_value(kv.knots, p, j, i, x)


@given(seeds, st.integers(1, 5), st.integers(0, 1))
def test_nonnegative_and_vanishing_outside_support(seed, p, j):
    rng = np.random.default_rng(seed)
    kv = random_knot_vector(rng, p)
    xs = np.linspace(0, 1, 57)
    B = basis_matrix(kv, j, xs)
    assert (B >= -1e-14).all()
    for i in range(1, kv.m + j + 1):
        a, b = support_1d(kv, j, i)
        outside = (xs < float(a)) | (xs > float(b))
        assert np.abs(B[outside, i - 1]).max(initial=0) <= 1e-14


@given(seeds, st.integers(1, 5))
def test_boundary_conditions(seed, p):
    kv = random_knot_vector(np.random.default_rng(seed), p)
    for x in (0, 1):
        assert all(eval_basis(kv, 0, i, x) == 0 for i in range(1, kv.m + 1))
        nonzero = [i for i in range(1, kv.m + 2) if eval_basis(kv, 1, i, x) != 0]
        assert nonzero == ([1] if x == 0 else [kv.m + 1])


def test_vectorised_evaluation_matches_scalar(kv):
    xs = np.linspace(0, 1, 41)
    B = basis_matrix(kv, 1, xs)
    for r, x in enumerate(xs):
        for i in range(1, kv.m + 2):
            assert B[r, i - 1] == pytest.approx(eval_basis(kv, 1, i, float(x)), abs=1e-15)


# derivative matrix


def test_hat_derivative_column(hat):
    assert derivative_matrix_1d(hat).to_dense() == [[2], [-2]]


def test_derivative_matches_finite_differences(kv):
    D = derivative_matrix_1d(kv).toarray()
    xs = [x for x in np.linspace(0.003, 0.997, 200) if min(abs(x - float(k)) for k in kv.knots) > 1e-4]
    h = 1e-6
    for x in xs:
        dB = (basis_matrix(kv, 0, [x + h]) - basis_matrix(kv, 0, [x - h]))[0] / (2 * h)
        B1 = basis_matrix(kv, 1, [x])[0]
        assert np.allclose(B1 @ D, dB, atol=1e-5)


@given(seeds, st.integers(1, 5))
def test_weighted_derivative_rows_vanish(seed, p):
    kv = random_knot_vector(np.random.default_rng(seed), p)
    w = integral_weights_1d(kv)
    D = derivative_matrix_1d(kv).to_dense()
    for c in range(kv.m):
        assert sum(w[r] * D[r][c] for r in range(kv.m + 1)) == 0


def test_derivative_is_bidiagonal(kv):
    D = derivative_matrix_1d(kv)
    assert all(r - c in (0, 1) for r, c, _ in D.entries())


# nesting and insertion


def test_is_nested_examples():
    p2 = lambda *k: validate_knot_vector(k, 2)
    assert is_nested(p2(0, 0, F(1, 2), 1, 1), p2(0, 0, F(1, 4), F(1, 2), F(3, 4), 1, 1))
    assert not is_nested(p2(0, 0, F(1, 3), 1, 1), p2(0, 0, F(1, 4), F(1, 2), 1, 1))
    hat = validate_knot_vector([0, F(1, 2), 1], 1)
    assert is_nested(hat, hat)
    with pytest.raises(DegreeMismatch):
        is_nested(hat, p2(0, 0, F(1, 2), 1, 1))


def test_hat_insertion_column(hat):
    fine = validate_knot_vector([0, F(1, 4), F(1, 2), F(3, 4), 1], 1)
    T = insertion_matrix_1d(hat, fine, 0)
    assert [row[0] for row in T.to_dense()] == [F(1, 2), 1, F(1, 2)]
    # pointwise check at the fine Greville points
    for i, x in enumerate(greville_mesh(fine).points[1:-1], start=1):
        assert eval_basis(hat, 0, 1, x, exact=True) == T.to_dense()[i - 1][0]


def test_identity_insertion(kv):
    for j in (0, 1):
        T = insertion_matrix_1d(kv, kv, j)
        assert T.to_dense() == [[F(int(r == c)) for c in range(kv.m + j)] for r in range(kv.m + j)]


def test_insertion_rejects_non_nested():
    a = validate_knot_vector([0, 0, F(1, 3), 1, 1], 2)
    b = validate_knot_vector([0, 0, F(1, 2), 1, 1], 2)
    with pytest.raises(NotNested):
        insertion_matrix_1d(a, b, 0)


def _refine_randomly(rng, kv):
    extra = [F(int(v), 24) for v in rng.integers(1, 24, size=int(rng.integers(0, 4)))]
    knots = sorted(kv.knots + tuple(extra))
    # respect the multiplicity bound
    out = []
    for k in knots:
        if out.count(k) < kv.degree or k in (0, 1):
            out.append(k)
    return validate_knot_vector(out, kv.degree)


@given(seeds, st.integers(1, 4), st.integers(0, 1))
def test_insertion_is_exact_at_rational_points(seed, p, j):
    rng = np.random.default_rng(seed)
    coarse = random_knot_vector(rng, p)
    fine = _refine_randomly(rng, coarse)
    T = insertion_matrix_1d(coarse, fine, j).to_dense()
    assert all(v >= 0 for row in T for v in row)
    for _ in range(4):
        x = F(int(rng.integers(0, 1000)), 1000)
        i = int(rng.integers(1, coarse.m + j + 1))
        lhs = eval_basis(coarse, j, i, x, exact=True)
        rhs = sum(T[r][i - 1] * eval_basis(fine, j, r + 1, x, exact=True) for r in range(fine.m + j))
        assert lhs == rhs


def test_dyadic_refinement_bisects_spans(kv):
    fine = dyadic_refinement(kv)
    assert fine.breakpoints == tuple(F(k, 8) for k in range(9))
    assert fine.knots.count(F(3, 4)) == 2
    assert is_nested(kv, fine)


def test_uniform_knot_vector():
    kv = uniform_knot_vector(3, 4)
    # nine knots, so m = 9 - p - 1 = spans + p - 2
    assert kv.m == 5 and kv.n_spans == 4
