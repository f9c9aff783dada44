from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sohiggs.exact_algebra import ExactMatrix, commutator, mat_exp_nilpotent
from sohiggs.lie_so import (
    Family,
    GroupKind,
    UnsupportedTheta,
    bracket_check,
    build_form,
    in_group,
    in_lie_algebra,
    levi_torus_matrix,
    levi_torus_weight,
    lie_algebra_dimension,
    light_cone_basis,
    parabolic_datum,
    root_datum,
    torus_element,
)

from strategies import nonzero_rationals, rationals

ALL = [GroupKind(f, n) for f in Family for n in (2, 3, 4, 5)]


def test_labels_and_sizes():
    assert GroupKind(Family.SO_n_nminus1, 3).label() == "SO(3,2)"
    assert GroupKind(Family.SO_n_n, 3).dim == 6
    assert GroupKind(Family.SO_n_nplus1, 3).dim == 7
    with pytest.raises(ValueError):
        GroupKind(Family.SO_n_n, 1)


@pytest.mark.parametrize("kind", ALL, ids=str)
def test_lie_algebra_dimension_is_m_choose_2(kind):
    m = kind.dim
    assert lie_algebra_dimension(kind) == m * (m - 1) // 2


def test_so_n_nplus1_dimension_formula():
    for n in range(2, 6):
        assert lie_algebra_dimension(GroupKind(Family.SO_n_nplus1, n)) == n * (2 * n + 1)


@pytest.mark.parametrize("kind", ALL, ids=str)
def test_form_signature(kind):
    # antidiagonal pairs contribute (1,1); the centre decides the extra sign
    j = build_form(kind)
    assert j == j.T
    pos_extra = {Family.SO_n_nminus1: 1, Family.SO_n_n: 0, Family.SO_n_nplus1: 0}[kind.family]
    neg_extra = {Family.SO_n_nminus1: 0, Family.SO_n_n: 0, Family.SO_n_nplus1: 1}[kind.family]
    pairs = kind.dim // 2
    p, q = pairs + pos_extra, pairs + neg_extra
    assert (p, q) == (kind.n, {Family.SO_n_nminus1: kind.n - 1, Family.SO_n_n: kind.n,
                               Family.SO_n_nplus1: kind.n + 1}[kind.family])


@pytest.mark.parametrize("kind", ALL, ids=str)
def test_root_vectors_are_nilpotent_upper_and_in_algebra(kind):
    rd = root_datum(kind)
    assert len(rd.simple_roots) == kind.rank
    for j, basis in rd.root_spaces.items():
        for x in basis:
            assert in_lie_algebra(x, kind)
            assert all(x[r, c] == 0 for r in range(kind.dim) for c in range(r + 1))
            assert in_group(mat_exp_nilpotent(x), kind)


@pytest.mark.parametrize("kind", ALL, ids=str)
def test_simple_roots_are_independent(kind):
    rd = root_datum(kind)
    mat = ExactMatrix([rd.simple_roots[j] for j in sorted(rd.simple_roots)])
    assert mat.rank() == kind.rank


@given(st.sampled_from(ALL), st.data())
def test_torus_eigenvalues_match_functionals(kind, data):
    xs = data.draw(st.lists(rationals, min_size=kind.rank, max_size=kind.rank))
    t = torus_element(kind, xs)
    assert in_lie_algebra(t, kind)
    assert bracket_check(kind, xs)


@given(st.sampled_from(ALL), st.data())
def test_levi_torus_conjugation_scales_root_spaces(kind, data):
    ts = data.draw(st.lists(nonzero_rationals, min_size=kind.rank, max_size=kind.rank))
    t = levi_torus_matrix(kind, ts)
    assert in_group(t, kind)
    rd = root_datum(kind)
    tinv = t.inverse()
    for j, basis in rd.root_spaces.items():
        for x in basis:
            assert t @ x @ tinv == x.scale(levi_torus_weight(kind, j, ts))


def test_light_cone_basis_is_generated_by_brackets():
    for n in range(2, 6):
        kind = GroupKind(Family.SO_n_nplus1, n)
        x1, x2, x3 = light_cone_basis(n)
        xb = root_datum(kind).root_vector(n)
        assert commutator(x1, xb) == x2
        assert commutator(x2, xb) == x3
        assert x1 == root_datum(kind).root_vector(n - 1)
        for x in (x1, x2, x3):
            assert in_lie_algebra(x, kind)


def test_parabolic_data():
    kind = GroupKind(Family.SO_n_nplus1, 4)
    pd = parabolic_datum(kind)
    assert pd.theta == (1, 2, 3)
    assert pd.piece_dim(3) == 3 and pd.piece_dim(1) == 1
    assert sum(pd.levi_blocks) == kind.dim
    with pytest.raises(UnsupportedTheta):
        parabolic_datum(kind, theta=(1, 2, 3, 4))
    b = parabolic_datum(GroupKind(Family.SO_n_n, 4))
    assert b.theta == (1, 2, 3, 4)


def test_membership_rejects_wrong_size():
    from sohiggs.exact_algebra import DimensionMismatch

    with pytest.raises(DimensionMismatch):
        in_group(ExactMatrix.identity(3), GroupKind(Family.SO_n_n, 2))
