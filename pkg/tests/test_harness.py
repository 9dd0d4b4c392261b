import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from haarperm import Budgets, PermutationMap
from haarperm.carleson import is_level_preserving
from haarperm.dyadic import TruncatedTree
from haarperm.errors import DepthTooLarge, NotLevelPreserving, ValidationError
from haarperm.harness import (
    KINDS,
    GeneratorSpec,
    SuiteConfig,
    gen_permutation,
    necessity_check,
    run_suite,
    theorem2_check,
    theorem34_suite,
)

LIMITS = Budgets()


@given(st.sampled_from(KINDS), st.integers(0, 6), st.integers(0, 2**63 - 1))
def test_generators_valid_and_deterministic(kind, depth, seed):
    perm = gen_permutation(GeneratorSpec(kind, depth, seed))
    assert perm.depth == depth
    assert sorted(perm.forward[1:]) == list(range(1, 2 ** (depth + 1)))
    assert gen_permutation(GeneratorSpec(kind, depth, seed)) == perm


@given(st.integers(0, 6), st.integers(0, 2**32))
def test_generator_families(depth, seed):
    assert gen_permutation(GeneratorSpec("identity", depth, seed)) == PermutationMap.identity(depth)
    assert is_level_preserving(gen_permutation(GeneratorSpec("level_preserving_random", depth, seed)))
    auto = gen_permutation(GeneratorSpec("tree_automorphism", depth, seed))
    for I in TruncatedTree(depth):
        for J in TruncatedTree(depth):
            assert I.contains(J) == auto(I).contains(auto(J))


@given(st.integers(1, 5), st.integers(0, 2**32))
def test_subtree_swap_shape(depth, seed):
    perm = gen_permutation(GeneratorSpec("subtree_swap", depth, seed))
    moved = [iv for iv in TruncatedTree(depth) if perm(iv) != iv]
    assert all(perm(perm(iv)) == iv for iv in moved)
    assert moved


def test_mass_mover_sends_deep_to_shallow():
    perm = gen_permutation(GeneratorSpec("adversarial_mass_mover", 3, 0))
    assert all(perm(iv).level == 0 for iv in TruncatedTree(3) if iv.level == 3 and perm(iv).level == 0)
    assert {perm(iv).level for iv in TruncatedTree(3) if iv.level == 3} == {0, 1, 2, 3}


def test_generator_errors():
    with pytest.raises(ValidationError):
        GeneratorSpec("nonsense", 2)
    with pytest.raises(DepthTooLarge):
        gen_permutation(GeneratorSpec("identity", 40))


def test_theorem2_identity():
    rec = theorem2_check(PermutationMap.identity(3), 30, 0, LIMITS)
    assert rec.passed and rec.stats["max_ratio"] == 1


def test_theorem2_swap(swap2):
    rec = theorem2_check(swap2, 50, 0, LIMITS)
    assert rec.passed
    assert rec.stats["K"] == Fraction(3, 2)
    assert rec.stats["max_ratio"] == Fraction(3, 2)
    assert rec.observations["remark1_indicator_max_equals_K"]
    best = rec.observations["remark1_best_indicator"]
    # ratio CC(pi B) / CC(B): the best B is the preimage of {"0", "00"}
    assert best.addresses() == ["0", "10"]
    assert swap2.image(best).addresses() == ["0", "00"]


def test_theorem2_rejects_level_changing(swap3):
    with pytest.raises(NotLevelPreserving):
        theorem2_check(swap3, 1, 0, LIMITS)


def test_necessity_examples(swap2):
    rec = necessity_check(PermutationMap.identity(2), 1, limits=LIMITS)
    assert rec.passed and rec.trials == 127 and rec.stats["distortion_lower_bound"] == 1
    rec = necessity_check(swap2, 1, limits=LIMITS)
    assert rec.passed and rec.stats["distortion_lower_bound"] >= Fraction(3, 2)


def test_necessity_sampled_deeper():
    perm = gen_permutation(GeneratorSpec("random_bijection", 5, 3))
    rec = necessity_check(perm, 2, "sampled", seed=1, trials=200, limits=LIMITS)
    assert rec.passed and rec.trials == 200


def test_theorem34_examples(swap3):
    pipe, claims = theorem34_suite(PermutationMap.identity(3), 1, 5, 0, LIMITS)
    assert pipe.passed and claims.passed
    assert pipe.stats["empirical_constant_forward"] == 1
    auto = gen_permutation(GeneratorSpec("tree_automorphism", 3, 4))
    pipe, _ = theorem34_suite(auto, 2, 5, 0, LIMITS)
    assert pipe.stats["M_forward"] == 1 and pipe.stats["K_forward"] == 5
    assert pipe.stats["certified_bound_forward"] == 15
    assert pipe.stats["empirical_constant_forward"] == 1
    pipe, claims = theorem34_suite(swap3, 1, 10, 0, LIMITS)
    assert pipe.passed and claims.passed and pipe.trials == 20


SMALL = {
    "checks": ["theorem2", "semyonov", "lemma", "pipeline", "transpose", "oracles", "invariance"],
    "depth": 2,
    "trials": 3,
    "params": {"theorem2": {"permutations": 2}, "semyonov": {"permutations": 2}, "lemma": {"permutations": 2}},
}


def test_small_suite_passes_and_is_deterministic():
    a = run_suite(dict(SMALL))
    b = run_suite(dict(SMALL))
    assert a.passed
    assert a.dumps() == b.dumps()
    assert {r.name for r in a.records} >= {"theorem2", "semyonov", "lemma", "pipeline", "claims", "transpose"}


def test_suite_seed_changes_report():
    a = run_suite({**SMALL, "seed": 1})
    b = run_suite({**SMALL, "seed": 2})
    assert a.dumps() != b.dumps()


def test_suite_with_permutation_file(tmp_path, swap2):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"depth": 2, "map": swap2.as_dict()}))
    cfg = {"checks": ["semyonov", "necessity"], "depth": 2, "params": {"semyonov": {"permutations": 0},
           "necessity": {"permutations": 0, "alphas": [1]}}, "permutation_files": ["good.json"]}
    report = run_suite(cfg, base=tmp_path)
    assert report.passed
    assert any(r.stats.get("permutation") == "file:good.json" for r in report.records)


def test_suite_corrupted_permutation_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"depth": 1, "map": {"": "", "0": "0", "1": "0"}}')
    with pytest.raises(ValidationError, match="bijection"):
        run_suite({"checks": ["semyonov"], "permutation_files": [str(bad)]})


@pytest.mark.parametrize(
    "config",
    [
        {"checks": ["nope"]},
        {"depth": -1},
        {"seed": "x"},
        {"unknown": 1},
        {"budgets": {"bogus": 3}},
        {"params": {"nope": {}}},
        [],
    ],
)
def test_config_validation(config):
    with pytest.raises(ValidationError):
        SuiteConfig.from_json(config)
