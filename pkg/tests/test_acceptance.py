"""The ten acceptance criteria, run against the default suite configuration.

The default suite is run twice (the second run only feeds the determinism
criterion).  Each test prints one PASS/FAIL line; the lines are repeated in
the pytest terminal summary.
"""
from fractions import Fraction

import pytest

from haarperm.harness import SuiteConfig, run_suite

pytestmark = pytest.mark.acceptance

RESULTS: dict[int, str] = {}


@pytest.fixture(scope="module")
def suite():
    return run_suite(SuiteConfig())


def verdict(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def totals(records):
    return sum(r.trials for r in records), sum(r.failures for r in records)


def first_witness(records):
    return next((r.witness for r in records if r.witness), None)


def test_criterion_01_necessity_identity(suite):
    base = suite.get("necessity_unpermuted")
    permuted = [r for r in suite.get("necessity") if r.stats["permutation"] != "identity"]
    consistency = suite.get("distortion_consistency")
    labels = {r.stats["permutation"] for r in permuted}
    alphas = sorted({r.stats["alpha"] for r in base})
    trials, failures = totals(base + suite.get("necessity") + consistency)
    ok = (
        failures == 0
        and alphas == [1, 2, 3]
        and all(r.trials == 2**15 - 1 for r in base + permuted)
        and len(labels) == 20
        and len(permuted) == 60
    )
    verdict(1, ok, f"||indicator(B)||^2 = CC(B) and ||T indicator(B)||^2 = CC(pi B) over all 32767 B, "
                   f"alpha in {[str(a) for a in alphas]}, {len(labels)} permutations; {trials} checks, {failures} failures")


def test_criterion_02_theorem2_chain(suite):
    recs = [r for r in suite.get("theorem2") if r.stats["permutation"].startswith("level_preserving_random")]
    trials, failures = totals(recs)
    ratios = [r.stats["max_ratio_random"] for r in recs]
    ok = failures == 0 and len(recs) == 10 and all(x >= 1 for x in ratios)
    verdict(2, ok, f"||T x||^2 <= K ||x||^2 on 10 level-preserving permutations x 200 series plus indicator "
                   f"family; {failures} failures; max random ratio {max(ratios)} (min over permutations "
                   f"{min(ratios)})")


def test_criterion_03_semyonov_crosscheck(suite):
    cross = suite.get("semyonov")
    (fixed,) = suite.get("semyonov_examples")
    agree = all(r.stats["K_exact"] == r.stats["K_antichain"] for r in cross)
    ok = (
        len(cross) >= 10 and agree and fixed.passed
        and fixed.stats["swap_K"] == Fraction(3, 2)
        and fixed.stats["swap_witness"].addresses() == ["0", "00"]
    )
    verdict(3, ok, f"exact == antichain K on {len(cross)} permutations; identity K = 1; depth-2 swap "
                   f"K = {fixed.stats['swap_K']} with witness {fixed.stats['swap_witness'].addresses()}")


def test_criterion_04_split_bounds(suite):
    recs = suite.get("lemma")
    trials, failures = totals(recs)
    alphas = sorted({r.stats["alpha"] for r in recs})
    perms = {r.stats["permutation"] for r in recs}
    star = all(r.stats.get("max_weight_star_ratio") == 1 for r in recs if r.stats["alpha"] == 1)
    ok = failures == 0 and alphas == [1, 2] and len(perms) == 10 and all(r.trials == 50 for r in recs) and star
    stress_trials, stress_failures = totals(suite.get("lemma_stress"))
    verdict(4, ok, f"bounds (i)-(iii) with K = 4M^2+1 on {len(perms)} permutations x alpha {[str(a) for a in alphas]} x 50; "
                   f"{trials} splits, {failures} failures; weight identity at alpha = 1: {star}; "
                   f"stress K = M: {stress_trials} splits, {stress_failures} failures")


def test_criterion_05_claims(suite):
    recs = suite.get("claims")
    trials, failures = totals(recs)
    cc_o = max(r.stats["max_CC_O"] for r in recs)
    cc_n = max(r.stats["max_CC_N_over_M"] for r in recs)
    ok = failures == 0 and cc_o <= 2 and cc_n <= 3
    verdict(5, ok, f"CC(O) <= 2, CC(N) <= 3M and geometric decay on {trials} certificates; "
                   f"max CC(O) = {cc_o}, max CC(N)/M = {cc_n}; {failures} failures")


def test_criterion_06_pipeline(suite):
    recs = suite.get("pipeline")
    trials, failures = totals(recs)
    perms = {r.stats["permutation"] for r in recs}
    without_k = sum(r.observations["bound_3M2_without_K_violations"] for r in recs)
    ok = failures == 0 and len(perms) == 10 and trials == 10 * 2 * 2 * 20
    verdict(6, ok, f"run_decomposition + verify_certificate on {len(perms)} permutations x alpha {{1,2}} x "
                   f"{{pi, pi^-1}} x 20 series = {trials} runs, {failures} failures (3M^2K bound gated; "
                   f"3M^2 without K violated in {without_k} runs, informational)")


def test_criterion_07_transpose(suite):
    (rec,) = suite.get("transpose")
    ok = rec.passed and rec.trials == 500
    verdict(7, ok, f"<T a, c> = <a, S c> on {rec.trials} tuples, p in {{1, 2/3, 1/2}}; {rec.failures} failures")


def test_criterion_08_oracles(suite):
    names = ("oracle_bmo_sup", "oracle_carleson", "oracle_covered_measure", "oracle_weighted_norm")
    recs = [r for n in names for r in suite.get(n)]
    trials, failures = totals(recs)
    ok = failures == 0 and all(r.trials >= 100 for r in recs) and len(recs) == 4
    verdict(8, ok, f"sup over collections = rooted max, CC over B = CC over tree, covered measure = grid, "
                   f"direct weighted norm: {trials} comparisons, {failures} failures")


def test_criterion_09_invariance(suite):
    recs = suite.get("invariance")
    trials, failures = totals(recs)
    autos = [r for r in recs if r.stats["permutation"].startswith("tree_automorphism")]
    (ident,) = [r for r in recs if r.stats["permutation"] == "identity"]
    ok = failures == 0 and len(autos) >= 3 and ident.stats["K"] == 1 and ident.stats["distortion_alpha_1"] == 1
    verdict(9, ok, f"{len(autos)} automorphisms: distortion 1 and norm ratio exactly 1 for alpha in {{1,2,3}}; "
                   f"identity K = distortion = 1; {trials} checks, {failures} failures")


def test_criterion_10_determinism(suite):
    again = run_suite(SuiteConfig())
    first, second = suite.dumps(), again.dumps()
    verdict(10, first == second and suite.passed,
            f"two full suite runs, {len(first)} bytes each, byte-identical: {first == second}; "
            f"all records passed: {suite.passed}")
