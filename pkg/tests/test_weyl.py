import pytest

from sohiggs.lie_so import Family, GroupKind
from sohiggs.weyl import (
    SignedPermutation,
    audit_so_nn,
    bfs_lengths,
    generate_group,
    length,
    so_nn_block_formula,
    longest_element,
    longest_word,
    positive_roots,
    root_system_type,
    simple_reflections,
    theta_length,
    theta_longest_element,
    verify_longest,
    w_theta,
    weyl_order,
    word_product,
)


def _word_group(n):
    kind = GroupKind(Family.SO_n_nplus1, n)
    return [word_product(kind, w) for w in w_theta(n)]


@pytest.mark.parametrize("fam", list(Family))
@pytest.mark.parametrize("n", [2, 3, 4])
def test_brute_force_group_order_and_longest(fam, n):
    kind = GroupKind(fam, n)
    gens = simple_reflections(kind)
    lengths = bfs_lengths(gens)
    rtype = root_system_type(kind)
    assert len(lengths) == weyl_order(rtype, kind.rank)
    top = max(lengths.values())
    longest = [w for w, l in lengths.items() if l == top]
    assert longest == [longest_element(kind)]
    assert top == len(positive_roots(rtype, kind.rank))
    # inversion count agrees with BFS word length everywhere
    assert all(length(w, rtype) == l for w, l in lengths.items())


@pytest.mark.parametrize("n", range(2, 9))
def test_b_words_reduced_and_longest(n):
    kind = GroupKind(Family.SO_n_nminus1, n)
    r = verify_longest(kind, longest_word(kind))
    assert r.ok() and r.length == (n - 1) ** 2


@pytest.mark.parametrize("n", range(2, 9))
def test_theta_words_reduced_and_longest(n):
    kind = GroupKind(Family.SO_n_nplus1, n)
    word = longest_word(kind)
    r = verify_longest(kind, word)
    assert r.ok() and r.note == ""
    assert r.length == (n - 1) ** 2


@pytest.mark.parametrize("n", range(2, 9))
def test_repaired_d_words_reduced_and_longest(n):
    kind = GroupKind(Family.SO_n_n, n)
    r = verify_longest(kind, longest_word(kind))
    assert r.ok() and r.length == n * (n - 1)


def test_literal_d_word_audit():
    assert audit_so_nn(2).literal_verdict == "ok"
    for n in range(3, 9):
        a = audit_so_nn(n)
        assert a.literal_verdict == "malformed"
        assert a.literal_blocks[-1] is None
        assert a.ok()
        assert not a.truncated_report.ok()
    assert audit_so_nn(4).truncated_report.is_reduced is False
    assert so_nn_block_formula(3)[:2] == [[3], [2]]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_theta_subgroup_is_type_b_of_rank_n_minus_1(n):
    group = generate_group(_word_group(n))
    assert len(group) == weyl_order("B", n - 1)
    assert theta_longest_element(n) in group
    assert max(theta_length(w) for w in group) == (n - 1) ** 2


def test_signed_permutation_basics():
    w = SignedPermutation((-2, 1))
    assert (w * w.inverse()).is_identity()
    assert w.order() == 4
    assert SignedPermutation.minus_identity(3).act((1, 2, 3)) == (-1, -2, -3)


def test_non_reduced_word_detected():
    kind = GroupKind(Family.SO_n_nminus1, 3)
    r = verify_longest(kind, [1, 1, 2])
    assert not r.is_reduced and not r.is_longest
