"""The brute-force oracles against hand-computed values."""
from fractions import Fraction

from haarperm.oracles import (
    bmo_sup_over_collections,
    carleson_over_members,
    carleson_over_tree,
    grid_covered_measure,
    rooted_sum,
    semyonov_bruteforce,
    tree_addresses,
    weighted_norm_direct,
)


def test_tree_addresses():
    assert tree_addresses(1) == ["", "0", "1"]
    assert len(tree_addresses(3)) == 15


def test_grid_and_sums():
    assert grid_covered_measure(["00", "10"], 3) == Fraction(1, 2)
    assert grid_covered_measure(["0", "01"], 2) == Fraction(1, 2)
    assert rooted_sum(["", "0", "00"], "0", 1) == Fraction(3, 2)
    assert carleson_over_members(["", "0", "00"], 1) == Fraction(7, 4)
    assert carleson_over_members(["", "0"], 2) == Fraction(5, 4)
    assert carleson_over_tree(["00", "01"], 1, 2) == 1


def test_norm_oracles():
    x = {"0": Fraction(1), "00": Fraction(1)}
    assert weighted_norm_direct(x, 1, 3) == Fraction(3, 2)
    assert bmo_sup_over_collections(x, 3) == Fraction(3, 2)
    assert bmo_sup_over_collections({"": Fraction(1)}, 2) == 1
    assert bmo_sup_over_collections({}, 2) == 0


def test_semyonov_oracle_identity_and_swap():
    ident = {a: a for a in tree_addresses(2)}
    assert semyonov_bruteforce(ident, 2) == 1
    swapped = dict(ident, **{"00": "10", "10": "00"})
    assert semyonov_bruteforce(swapped, 2) == Fraction(3, 2)
