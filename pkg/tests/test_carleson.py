from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from haarperm import Budgets, PermutationMap
from haarperm.carleson import (
    antichain_count,
    carleson_constant,
    carleson_witness,
    distortion,
    distortion_search,
    enumerate_antichains,
    is_level_preserving,
    semyonov_K,
    semyonov_search,
)
from haarperm.dyadic import IntervalCollection, TruncatedTree
from haarperm.errors import DepthTooLarge, EmptyCollection, ValidationError
from haarperm.harness import GeneratorSpec, gen_permutation
from haarperm.oracles import (
    carleson_over_members,
    carleson_over_tree,
    distortion_bruteforce,
    semyonov_bruteforce,
    tree_addresses,
)

from conftest import swap


def C(*addrs, depth=3):
    return IntervalCollection(addrs, depth)


# -- permutation maps --------------------------------------------------------


def test_permutation_validation():
    with pytest.raises(ValidationError, match="unmapped"):
        PermutationMap(1, {"": "", "0": "1"})
    with pytest.raises(ValidationError, match="hit twice"):
        PermutationMap(1, {"": "", "0": "1", "1": "1"})
    with pytest.raises(ValidationError, match="below depth"):
        PermutationMap(1, {"": "", "0": "00", "1": "1"})


def test_compose_and_inverse():
    a = gen_permutation(GeneratorSpec("random_bijection", 3, 1))
    b = gen_permutation(GeneratorSpec("random_bijection", 3, 2))
    ab = a.compose(b)
    for iv in TruncatedTree(3):
        assert ab(iv) == a(b(iv))
        assert a.inv(a(iv)) == iv
    assert a.compose(a.inverse_map()) == PermutationMap.identity(3)


def test_level_preserving_examples():
    assert is_level_preserving(PermutationMap.identity(3))
    assert is_level_preserving(swap(2, "00", "10"))
    assert not is_level_preserving(swap(2, "0", "00"))


# -- Carleson constant -------------------------------------------------------


def test_carleson_constant_examples():
    assert carleson_constant(C("", "0", "00"), 1) == Fraction(7, 4)
    assert carleson_constant(C("", "0"), 2) == Fraction(5, 4)
    for n in range(5):
        assert carleson_constant(TruncatedTree(n).collection(), 1) == n + 1


def test_carleson_constant_of_antichains_is_one():
    for A in enumerate_antichains(3):
        if A:
            for alpha in (1, 2):
                assert carleson_constant(A, alpha) == 1
            assert carleson_constant(A, Fraction(3, 2)) == pytest.approx(1, rel=1e-12)


def test_carleson_constant_empty_rejected():
    with pytest.raises(EmptyCollection):
        carleson_constant(C(), 1)


def test_carleson_witness_is_smallest_maximizer():
    assert carleson_witness(C("", "0", "00"), 1).address == ""
    assert carleson_witness(C("0", "00", "1", "10"), 1).address == "0"


def test_float_exponent_matches_oracle():
    B = C("", "0", "01", "011", "1")
    got = carleson_constant(B, Fraction(3, 2))
    assert isinstance(got, float)
    assert got == pytest.approx(carleson_over_members(B.addresses(), Fraction(3, 2)), rel=1e-12)


@given(st.sets(st.sampled_from(tree_addresses(3)), min_size=1), st.sampled_from([1, 2, 3]))
def test_carleson_over_members_equals_over_tree(members, alpha):
    B = IntervalCollection(members, 3)
    value = carleson_constant(B, alpha)
    assert value == carleson_over_members(members, alpha) == carleson_over_tree(members, alpha, 3)


@given(st.sets(st.sampled_from(tree_addresses(3)), min_size=1), st.sets(st.sampled_from(tree_addresses(3))))
def test_carleson_constant_monotone(a, b):
    A = IntervalCollection(a, 3)
    assert carleson_constant(A, 1) <= carleson_constant(A | IntervalCollection(b, 3), 1)


# -- Semyonov K --------------------------------------------------------------


def test_semyonov_identity_is_one():
    for n in range(4):
        assert semyonov_K(PermutationMap.identity(n)) == 1


def test_semyonov_swap_depth2(swap2):
    found = semyonov_search(swap2, "exact")
    assert found.value == Fraction(3, 2)
    assert found.witness.addresses() == ["0", "00"]
    assert semyonov_search(swap2, "antichain").value == Fraction(3, 2)


def test_semyonov_frozen_values(swap3):
    # frozen from the string-based brute force (depth 3, every subset)
    assert semyonov_K(swap3) == 3
    assert semyonov_K(swap3, "antichain") == 3


def test_semyonov_matches_bruteforce_depth2():
    for seed in range(5):
        perm = gen_permutation(GeneratorSpec("random_bijection", 2, seed))
        assert semyonov_K(perm) == semyonov_bruteforce(perm.as_dict(), 2)


def test_sampled_is_lower_bound_and_deterministic():
    for seed in range(4):
        perm = gen_permutation(GeneratorSpec("random_bijection", 3, seed))
        exact = semyonov_K(perm)
        s1 = semyonov_search(perm, "sampled", seed=7, trials=200)
        s2 = semyonov_search(perm, "sampled", seed=7, trials=200)
        assert s1 == s2
        assert s1.lower_bound and s1.value <= exact


def test_exact_budget_guard():
    perm = PermutationMap.identity(4)
    with pytest.raises(DepthTooLarge, match="max_subsets"):
        semyonov_K(perm, "exact")
    with pytest.raises(DepthTooLarge, match="max_antichains"):
        semyonov_K(perm, "antichain", limits=Budgets(max_antichains=1000))


def test_antichain_counts():
    assert [antichain_count(d) for d in range(5)] == [2, 5, 26, 677, 458330]
    assert sorted(a.addresses() for a in enumerate_antichains(0)) == [[], [""]]
    for d in range(4):
        found = list(enumerate_antichains(d))
        assert len(found) == len(set(found)) == antichain_count(d)
        assert all(a.is_antichain() for a in found)


def test_antichain_enumeration_is_complete_depth2():
    addrs = tree_addresses(2)
    brute = {
        frozenset(s)
        for r in range(len(addrs) + 1)
        for s in combinations(addrs, r)
        if IntervalCollection(s, 2).is_antichain()
    }
    assert {frozenset(a.addresses()) for a in enumerate_antichains(2)} == brute


# -- distortion --------------------------------------------------------------


def test_distortion_identity_and_swaps(swap2, swap3):
    assert distortion(PermutationMap.identity(3)) == 1
    found = distortion_search(swap2, 1)
    assert found.value == Fraction(3, 2)
    # frozen from the string-based brute force
    assert distortion(swap2, 2) == Fraction(5, 4)
    assert distortion(swap3, 1) == 2
    assert distortion(swap3, 2) == Fraction(3, 2)


def test_distortion_swap_witness_ratio(swap2):
    B = C("0", "00", depth=2)
    ratio = carleson_constant(B, 1) / carleson_constant(swap2.image(B), 1)
    assert ratio == Fraction(3, 2)
    assert distortion(swap2, 1) >= ratio


def test_distortion_matches_bruteforce_depth2():
    for seed in range(4):
        perm = gen_permutation(GeneratorSpec("random_bijection", 2, seed))
        for alpha in (1, 2):
            assert distortion(perm, alpha) == distortion_bruteforce(perm.as_dict(), alpha, 2)


def test_distortion_inverse_symmetry():
    for seed in range(3):
        perm = gen_permutation(GeneratorSpec("random_bijection", 3, seed))
        for alpha in (1, 2):
            assert distortion(perm, alpha) == distortion(perm.inverse_map(), alpha)


def test_automorphisms_have_distortion_one():
    for seed in range(3):
        perm = gen_permutation(GeneratorSpec("tree_automorphism", 3, seed))
        for alpha in (1, 2, 3):
            assert distortion(perm, alpha) == 1


@pytest.mark.parametrize("mode", ["exact", "sampled"])
def test_worker_count_does_not_change_results(mode):
    perm = gen_permutation(GeneratorSpec("random_bijection", 3, 5))
    serial, parallel = Budgets(samples=3000), Budgets(samples=3000, workers=3)
    assert semyonov_search(perm, mode, 7, None, serial) == semyonov_search(perm, mode, 7, None, parallel)
    assert distortion_search(perm, 2, mode, 7, None, serial) == distortion_search(perm, 2, mode, 7, None, parallel)
