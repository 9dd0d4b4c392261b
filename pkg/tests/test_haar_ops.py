import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from haarperm import PermutationMap
from haarperm.dyadic import IntervalCollection, TruncatedTree
from haarperm.errors import DepthMismatch, EmptyCollection, NormalizationMismatch, ValidationError
from haarperm.haar_ops import (
    CoefficientSeries,
    Normalization,
    adjoint_permute,
    bmo_over_collection,
    hp_norm,
    indicator_series,
    pairing,
    permute_coefficients,
    weighted_norm_sq,
)
from haarperm.carleson import carleson_constant
from haarperm.harness import GeneratorSpec, gen_permutation, random_series
from haarperm.oracles import bmo_sup_over_collections, tree_addresses, weighted_norm_direct

from conftest import swap

LINF, LAM, HP = Normalization.LINF, Normalization.LAMBDA, Normalization.HP


def S(coeffs, depth=3, norm=LINF, p=None):
    return CoefficientSeries(depth, coeffs, norm, p)


def test_weighted_norm_examples():
    assert weighted_norm_sq(S({"": 1}), 1) == 1
    assert weighted_norm_sq(S({"0": 1, "00": 1}), 1) == Fraction(3, 2)
    assert weighted_norm_sq(S({}), 1) == 0


def test_weighted_norm_lambda_matches_direct():
    x = S({"": Fraction(1, 2), "01": 1, "011": Fraction(-3, 4)}, norm=LAM, p=Fraction(2, 3))
    assert weighted_norm_sq(x) == weighted_norm_direct({"": Fraction(1, 2), "01": 1, "011": Fraction(-3, 4)}, 2, 3)


def test_float_alpha_within_tolerance():
    coeffs = {"": Fraction(1, 2), "0": 1, "011": Fraction(-3, 4)}
    x = S(coeffs, norm=LAM, p=Fraction(4, 5))
    assert weighted_norm_sq(x) == pytest.approx(float(weighted_norm_direct(coeffs, Fraction(3, 2), 3)), rel=1e-12)


def test_normalization_mismatch():
    with pytest.raises(NormalizationMismatch):
        weighted_norm_sq(S({"": 1}, norm=HP, p=1))
    with pytest.raises(NormalizationMismatch):
        weighted_norm_sq(S({"": 1}), 2)
    with pytest.raises(NormalizationMismatch):
        adjoint_permute(S({"": 1}), PermutationMap.identity(3))
    with pytest.raises(ValidationError):
        S({"": 1}, norm=LAM)


def test_bmo_over_collection_examples():
    assert bmo_over_collection(S({"": 1}), IntervalCollection([""], 3)) == 1
    x = S({"0": 1, "00": 1})
    assert bmo_over_collection(x, IntervalCollection(["0", "00"], 3)) == Fraction(3, 2)
    with pytest.raises(EmptyCollection):
        bmo_over_collection(x, IntervalCollection((), 3))


def test_permute_examples():
    x = S({"0": 1, "01": Fraction(1, 3)})
    assert permute_coefficients(x, PermutationMap.identity(3)) == x
    assert permute_coefficients(S({"0": 1}), swap(3, "0", "1")) == S({"1": 1})
    with pytest.raises(DepthMismatch):
        permute_coefficients(x, PermutationMap.identity(2))


def test_operator_laws():
    x = S({"": 1, "0": Fraction(-1, 2), "101": 3})
    a = gen_permutation(GeneratorSpec("random_bijection", 3, 11))
    b = gen_permutation(GeneratorSpec("random_bijection", 3, 12))
    assert permute_coefficients(permute_coefficients(x, b), a) == permute_coefficients(x, a.compose(b))
    assert permute_coefficients(permute_coefficients(x, a), a.inverse_map()) == x


def test_adjoint_examples():
    c = S({"0": 1}, norm=HP, p=1)
    assert adjoint_permute(c, PermutationMap.identity(3)) == c
    assert adjoint_permute(c, swap(3, "0", "1")) == S({"1": 1}, norm=HP, p=1)


def test_pairing_examples():
    a = S({"": 1}, norm=LAM, p=1)
    assert pairing(a, S({"": 1}, norm=HP, p=1)) == 1
    assert pairing(a, S({"0": 1}, norm=HP, p=1)) == 0
    with pytest.raises(NormalizationMismatch):
        pairing(S({"": 1}, norm=LAM, p=Fraction(1, 2)), S({"": 1}, norm=HP, p=1))


def hp_norm_grid(coeffs, depth, p):
    """Square function on the finest grid, straight from the addresses."""
    cells = 2 ** (depth + 1)
    total = 0.0
    for t in range(cells):
        cell = format(t, f"0{depth + 1}b")
        s = sum(float(v) ** 2 * 2.0 ** (2 * len(a) / float(p)) for a, v in coeffs.items() if cell.startswith(a))
        total += s ** (float(p) / 2)
    return (total / cells) ** (1 / float(p))


def test_hp_norm_examples():
    assert hp_norm(S({"": 1}, norm=HP, p=1)) == 1
    assert hp_norm(S({}, norm=HP, p=1)) == 0
    assert hp_norm(S({"0": 1}, norm=HP, p=1)) == 1


def test_hp_norm_matches_grid():
    coeffs = {"": Fraction(1, 2), "0": 1, "011": Fraction(-3, 4)}
    for p in (Fraction(1), Fraction(2, 3), Fraction(1, 2)):
        got = hp_norm(S(coeffs, norm=HP, p=p))
        assert float(got) == pytest.approx(hp_norm_grid(coeffs, 3, p), rel=1e-12)


def test_hp_norm_exact_when_square():
    # 3^2 + 4^2 = 5^2 on the cells under "0"
    c = S({"": 3, "0": Fraction(2)}, norm=HP, p=1)
    assert hp_norm(c) == Fraction(5 + 3, 2)


def test_indicator_series_examples():
    assert indicator_series(IntervalCollection([""], 3), 1) == S({"": 1})
    assert indicator_series(IntervalCollection((), 3), 1).is_zero()
    lam = indicator_series(IntervalCollection(["0"], 3), 2)
    assert lam.normalization is LAM and lam.p == Fraction(2, 3)


@given(st.sets(st.sampled_from(tree_addresses(3)), min_size=1), st.sampled_from([1, 2, 3]))
def test_indicator_norm_equals_carleson_constant(members, alpha):
    B = IntervalCollection(members, 3)
    assert weighted_norm_sq(indicator_series(B, alpha), alpha) == carleson_constant(B, alpha)


@settings(max_examples=25)
@given(st.integers(0, 2**32), st.integers(1, 3))
def test_sup_over_collections_equals_rooted_max(seed, depth):
    import random

    x = random_series(depth, random.Random(seed))
    coeffs = {iv.address: v for iv, v in x.items()}
    assert bmo_sup_over_collections(coeffs, depth) == weighted_norm_sq(x, 1)


@given(st.integers(0, 2**32), st.sampled_from([Fraction(1), Fraction(2, 3), Fraction(1, 2)]))
def test_transpose_identity(seed, p):
    import random

    rng = random.Random(seed)
    perm = gen_permutation(GeneratorSpec("random_bijection", 3, seed))
    a = random_series(3, rng, LAM, p)
    c = random_series(3, rng, HP, p)
    assert pairing(permute_coefficients(a, perm), c) == pairing(a, adjoint_permute(c, perm))
