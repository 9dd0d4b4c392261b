"""Permutation generators, randomized property checks and the suite runner.

Every check returns :class:`PropertyRecord` objects.  Failures are exact
counterexamples; the first one is kept as the witness.  Randomness comes from
``random.Random`` instances seeded by strings built from the suite seed, the
check name and a per-trial counter, so results never depend on the order in
which trials are run.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from .carleson import (
    PermutationMap,
    carleson_constant,
    distortion_search,
    is_level_preserving,
    semyonov_search,
    _Best,
    _carleson_table,
)
from .config import Budgets
from .decompose import lemma_split, run_decomposition, verify_certificate, _exact_distortion
from .dyadic import DyadicInterval, IntervalCollection, full_mask, subtree_mask
from .errors import DepthTooLarge, NotLevelPreserving, ValidationError
from .exponent import CarlesonExponent, as_exponent
from .formats import encode_value, dumps, load_permutation, permutation_to_json, series_to_json
from .haar_ops import (
    CoefficientSeries,
    Normalization,
    adjoint_permute,
    indicator_series,
    pairing,
    permute_coefficients,
    weighted_norm_sq,
)
from . import oracles

KINDS = (
    "identity",
    "level_preserving_random",
    "tree_automorphism",
    "subtree_swap",
    "random_bijection",
    "adversarial_mass_mover",
)
MAX_GEN_DEPTH = 16
DENOMINATOR = 2**10
SPARSITY = 0.5


def derive_seed(seed: int, *parts) -> int:
    """A 63-bit seed determined by ``seed`` and the labels in ``parts``."""
    return random.Random(":".join(str(p) for p in (seed, *parts))).getrandbits(63)


# -- generators --------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    depth: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.depth, int) or self.depth < 0:
            raise ValidationError(f"depth must be a nonnegative integer, got {self.depth!r}")


def _levels(depth: int) -> list[list[int]]:
    return [list(range(1 << k, 1 << (k + 1))) for k in range(depth + 1)]


def _automorphism(depth: int, rng: random.Random) -> list[int]:
    size = 1 << (depth + 1)
    forward = [0] * size
    forward[1] = 1
    for i in range(1, size >> 1):
        flip = rng.getrandbits(1)
        forward[2 * i] = 2 * forward[i] + flip
        forward[2 * i + 1] = 2 * forward[i] + (1 - flip)
    return forward


def _subtree_swap(depth: int, rng: random.Random) -> list[int]:
    size = 1 << (depth + 1)
    forward = list(range(size))
    if depth == 0:
        return forward
    if rng.random() < 0.5:
        a, b = rng.sample(range(1, size), 2)
        forward[a], forward[b] = b, a
        return forward
    level = rng.randint(1, depth)
    a, b = rng.sample(range(1 << level, 1 << (level + 1)), 2)
    # intervals of the same level are disjoint, so the two subtrees can trade places
    for extra in range(depth - level + 1):
        for t in range(1 << extra):
            ia, ib = (a << extra) + t, (b << extra) + t
            forward[ia], forward[ib] = ib, ia
    return forward


def _mass_mover(depth: int, rng: random.Random) -> list[int]:
    # the smallest intervals take the largest places: sources deepest first,
    # targets shallowest first, ties in random order
    sources, targets = [], []
    for layer in reversed(_levels(depth)):
        layer = layer[:]
        rng.shuffle(layer)
        sources += layer
    for layer in _levels(depth):
        layer = layer[:]
        rng.shuffle(layer)
        targets += layer
    forward = [0] * (1 << (depth + 1))
    for s, t in zip(sources, targets):
        forward[s] = t
    return forward


def gen_permutation(spec: GeneratorSpec, limits: Budgets | None = None) -> PermutationMap:
    """Deterministic in (kind, depth, seed)."""
    depth = spec.depth
    if depth > MAX_GEN_DEPTH:
        raise DepthTooLarge(f"generator depth {depth} exceeds the cap {MAX_GEN_DEPTH}", MAX_GEN_DEPTH)
    rng = random.Random(f"{spec.kind}:{depth}:{spec.seed}")
    size = 1 << (depth + 1)
    if spec.kind == "identity":
        return PermutationMap.identity(depth)
    if spec.kind == "level_preserving_random":
        forward = [0] * size
        for layer in _levels(depth):
            image = layer[:]
            rng.shuffle(image)
            for s, t in zip(layer, image):
                forward[s] = t
    elif spec.kind == "tree_automorphism":
        forward = _automorphism(depth, rng)
    elif spec.kind == "subtree_swap":
        forward = _subtree_swap(depth, rng)
    elif spec.kind == "random_bijection":
        image = list(range(1, size))
        rng.shuffle(image)
        forward = [0] + image
    else:
        forward = _mass_mover(depth, rng)
    return PermutationMap.from_forward(depth, forward)


# -- random series -----------------------------------------------------------


def exponent_basis(alpha) -> tuple[Normalization, Fraction | None]:
    exponent = as_exponent(alpha)
    if exponent.is_bmo:
        return Normalization.LINF, None
    return Normalization.LAMBDA, exponent.p


def random_series(depth: int, rng: random.Random, normalization=Normalization.LINF, p=None) -> CoefficientSeries:
    """Dyadic coefficients in [-1, 1] with denominator 2^10, about half of them zero, never all zero."""
    coeffs = {}
    for i in range(1, 1 << (depth + 1)):
        if rng.random() < SPARSITY:
            coeffs[i] = Fraction(rng.choice((-1, 1)) * rng.randint(1, DENOMINATOR), DENOMINATOR)
    if not coeffs:
        coeffs[rng.randrange(1, 1 << (depth + 1))] = Fraction(rng.randint(1, DENOMINATOR), DENOMINATOR)
    return CoefficientSeries.from_indices(depth, coeffs, normalization, p)


def random_series_for(depth: int, rng: random.Random, alpha) -> CoefficientSeries:
    norm, p = exponent_basis(alpha)
    return random_series(depth, rng, norm, p)


def random_collection(depth: int, rng: random.Random, within: int = 1) -> IntervalCollection:
    """Nonempty random subcollection of the subtree below heap index ``within``."""
    sub = subtree_mask(within, depth)
    while True:
        mask = sub & (rng.getrandbits(1 << (depth + 1)))
        if mask:
            return IntervalCollection.from_mask(mask, depth)


# -- reports -----------------------------------------------------------------


@dataclass
class PropertyRecord:
    name: str
    trials: int = 0
    failures: int = 0
    witness: dict | None = None
    stats: dict = field(default_factory=dict)
    observations: dict = field(default_factory=dict)

    def fail(self, witness: dict) -> None:
        self.failures += 1
        if self.witness is None:
            self.witness = witness

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "failures": self.failures,
            "passed": self.passed,
            "witness": encode_value(self.witness),
            "stats": encode_value(self.stats),
            "observations": encode_value(self.observations),
        }


@dataclass
class SuiteReport:
    records: list[PropertyRecord] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def extend(self, records) -> "SuiteReport":
        self.records.extend(records)
        return self

    def get(self, name: str) -> list[PropertyRecord]:
        return [r for r in self.records if r.name == name]

    def to_json(self) -> dict:
        return {
            "config": encode_value(self.config),
            "passed": self.passed,
            "records": [r.to_json() for r in self.records],
        }

    def dumps(self) -> str:
        return dumps(self.to_json())


def _bump(stats: dict, key: str, value) -> None:
    if key not in stats or value > stats[key]:
        stats[key] = value


def _label(perm: PermutationMap) -> dict:
    return {"depth": perm.depth, "moved": {a: b for a, b in perm.as_dict().items() if a != b}}


# -- Theorem 2: level-preserving permutations -------------------------------


def _semyonov(perm: PermutationMap, limits: Budgets):
    try:
        return semyonov_search(perm, "exact", limits=limits)
    except DepthTooLarge:
        return semyonov_search(perm, "antichain", limits=limits)


def theorem2_check(perm: PermutationMap, trials: int, seed: int, limits: Budgets | None = None,
                   label: str = "") -> PropertyRecord:
    """||T x||^2 <= K ||x||^2 at alpha = 1 for random x and for every indicator series."""
    if not is_level_preserving(perm):
        raise NotLevelPreserving("the Semyonov bound applies to level-preserving permutations")
    limits = limits or Budgets.from_env()
    depth = perm.depth
    search = _semyonov(perm, limits)
    K = search.value
    rec = PropertyRecord("theorem2", stats={"permutation": label, "K": K, "K_mode": search.mode,
                                            "K_witness": search.witness})
    best = None
    for t in range(trials):
        rng = random.Random(f"{seed}:theorem2:{t}")
        x = random_series(depth, rng)
        lhs = weighted_norm_sq(permute_coefficients(x, perm), 1)
        rhs = weighted_norm_sq(x, 1)
        rec.trials += 1
        ratio = lhs / rhs
        if best is None or ratio > best:
            best = ratio
        if lhs > K * rhs:
            rec.fail({"permutation": permutation_to_json(perm), "series": series_to_json(x), "ratio": ratio, "K": K})
    rec.stats["max_ratio_random"] = best
    if depth <= 3 and limits.max_subsets >= (1 << ((1 << (depth + 1)) - 1)):
        # indicator family: ||indicator(B)||^2 = CC(B), checked exhaustively by the necessity check
        table = _carleson_table(depth, CarlesonExponent(1))
        fmap = perm.map_mask
        best_b = _Best(1, 1, full_mask(depth))
        for m in range(1, len(table)):
            before, after = table[m], table[fmap(m << 1) >> 1]
            rec.trials += 1
            best_b.offer(after, before, m << 1)
            if after > K * before:
                rec.fail({"permutation": permutation_to_json(perm), "B": IntervalCollection.from_mask(m << 1, depth),
                          "ratio": Fraction(after, before), "K": K})
        top = Fraction(best_b.num, best_b.den)
        witness = IntervalCollection.from_mask(best_b.mask, depth)
        rec.stats["max_ratio_indicator"] = top
        rec.observations["remark1_indicator_max_equals_K"] = top == K
        rec.observations["remark1_best_indicator"] = witness
        best = max(best, top)
    rec.stats["max_ratio"] = best
    return rec


# -- necessity identity ------------------------------------------------------


@lru_cache(maxsize=16)
def _indicator_norms(depth: int, exponent: CarlesonExponent) -> tuple:
    """||indicator(B)||^2 for every mask B (index m stands for mask m << 1)."""
    out = [0]
    for m in range(1, 1 << ((1 << (depth + 1)) - 1)):
        out.append(weighted_norm_sq(indicator_series(IntervalCollection.from_mask(m << 1, depth), exponent), exponent))
    return tuple(out)


def necessity_unpermuted(depth: int, alpha) -> PropertyRecord:
    """||indicator(B)||^2 == CC(B) for every nonempty B."""
    exponent = as_exponent(alpha)
    rec = PropertyRecord("necessity_unpermuted", stats={"depth": depth, "alpha": exponent.alpha})
    norms = _indicator_norms(depth, exponent)
    for m in range(1, len(norms)):
        B = IntervalCollection.from_mask(m << 1, depth)
        cc = carleson_constant(B, exponent)
        rec.trials += 1
        if norms[m] != cc:
            rec.fail({"B": B, "alpha": exponent.alpha, "norm": norms[m], "CC": cc})
    return rec


def _family_masks(depth: int, family: str, seed: int, trials: int, limits: Budgets):
    if family == "all":
        count = 1 << ((1 << (depth + 1)) - 1)
        if count > limits.max_subsets:
            raise DepthTooLarge(f"all collections at depth {depth}: {count} > max_subsets={limits.max_subsets}",
                                limits.max_subsets)
        return [m << 1 for m in range(1, count)]
    if family != "sampled":
        raise ValidationError(f"unknown family {family!r}; expected 'all' or 'sampled'")
    masks = []
    for t in range(trials):
        rng = random.Random(f"{seed}:family:{t}")
        masks.append(random_collection(depth, rng).mask)
    return masks


def necessity_check(perm: PermutationMap, alpha, family: str = "all", seed: int = 0, trials: int = 1000,
                    limits: Budgets | None = None, label: str = "") -> PropertyRecord:
    """||T indicator(B)||^2 == CC(pi(B)) exactly; the ratios give a lower bound on the distortion."""
    limits = limits or Budgets.from_env()
    exponent = as_exponent(alpha)
    depth = perm.depth
    rec = PropertyRecord("necessity", stats={"permutation": label, "alpha": exponent.alpha, "family": family})
    masks = _family_masks(depth, family, seed, trials, limits)
    exhaustive = family == "all"
    base = _indicator_norms(depth, exponent) if exhaustive else None
    lower, lower_mask = None, None
    for mask in masks:
        B = IntervalCollection.from_mask(mask, depth)
        lhs = weighted_norm_sq(permute_coefficients(indicator_series(B, exponent), perm), exponent)
        rhs = carleson_constant(perm.image(B), exponent)
        rec.trials += 1
        if lhs != rhs:
            rec.fail({"permutation": permutation_to_json(perm), "B": B, "alpha": exponent.alpha,
                      "norm": lhs, "CC": rhs})
        before = base[mask >> 1] if exhaustive else carleson_constant(B, exponent)
        ratio = max(lhs / before, before / lhs)
        if lower is None or ratio > lower:
            lower, lower_mask = ratio, mask
    rec.stats["distortion_lower_bound"] = lower
    rec.stats["lower_bound_witness"] = IntervalCollection.from_mask(lower_mask, depth)
    return rec


def distortion_consistency(perm: PermutationMap, alpha, lower, limits: Budgets, label: str = "") -> PropertyRecord:
    """Lower bound from the necessity ratios never exceeds the exact distortion."""
    exponent = as_exponent(alpha)
    rec = PropertyRecord("distortion_consistency", trials=1,
                         stats={"permutation": label, "alpha": exponent.alpha})
    exact = _exact_distortion(perm, exponent, limits)
    rec.stats.update({"lower_bound": lower, "exact": exact})
    rec.observations["lower_bound_attains_exact"] = lower == exact
    if lower > exact:
        rec.fail({"permutation": permutation_to_json(perm), "alpha": exponent.alpha, "lower": lower, "exact": exact})
    return rec


# -- Semyonov cross-check ----------------------------------------------------


def semyonov_crosscheck(perm: PermutationMap, limits: Budgets, label: str = "") -> PropertyRecord:
    exact = semyonov_search(perm, "exact", limits=limits)
    anti = semyonov_search(perm, "antichain", limits=limits)
    rec = PropertyRecord("semyonov", trials=1, stats={"permutation": label, "K_exact": exact.value,
                                                      "K_antichain": anti.value, "witness": exact.witness})
    if exact.value != anti.value:
        rec.fail({"permutation": permutation_to_json(perm), "exact": exact.value, "antichain": anti.value})
    return rec


def semyonov_fixed_examples(limits: Budgets) -> PropertyRecord:
    rec = PropertyRecord("semyonov_examples")
    for depth in range(4):
        rec.trials += 1
        K = semyonov_search(PermutationMap.identity(depth), "exact", limits=limits).value
        if K != 1:
            rec.fail({"identity_depth": depth, "K": K})
    swap = PermutationMap(2, {"00": "10", "10": "00", **{a: a for a in oracles.tree_addresses(2) if a not in ("00", "10")}})
    found = semyonov_search(swap, "exact", limits=limits)
    rec.trials += 1
    rec.stats.update({"swap_K": found.value, "swap_witness": found.witness})
    if found.value != Fraction(3, 2) or found.witness.addresses() != ["0", "00"]:
        rec.fail({"swap_K": found.value, "swap_witness": found.witness})
    return rec


# -- splitting lemma ---------------------------------------------------------

LEMMA_CHECKS = ("lemma_good", "lemma_stopped", "lemma_next_roots", "weight_star", "strict_descent")


def lemma_check(perm: PermutationMap, alpha, trials: int, seed: int, limits: Budgets,
                label: str = "", stress: bool = False) -> PropertyRecord:
    """Bounds (i)-(iii) of the split on random (D(I), x), M exact and K = 4M^2 + 1.

    With ``stress`` the threshold drops to K = M: the bounds still apply and
    far more intervals get stopped.
    """
    exponent = as_exponent(alpha)
    depth = perm.depth
    M = _exact_distortion(perm, exponent, limits)
    K = M if stress else 4 * M * M + 1
    name = "lemma_stress" if stress else "lemma"
    rec = PropertyRecord(name, stats={"permutation": label, "alpha": exponent.alpha, "M": M, "K": K})
    nontrivial = 0
    for t in range(trials):
        rng = random.Random(f"{seed}:{name}:{t}")
        root = rng.randrange(1, 1 << (depth + 1))
        D = random_collection(depth, rng, root)
        x = random_series_for(depth, rng, exponent)
        split = lemma_split(D, DyadicInterval.from_index(root), perm, K, exponent, x, M)
        rec.trials += 1
        nontrivial += bool(split.stopped)
        for c in split.checks:
            if c.name in LEMMA_CHECKS:
                key = f"max_{c.name}_ratio"
                if c.rhs:
                    _bump(rec.stats, key, c.lhs / c.rhs)
            if not c.passed:
                rec.fail({"permutation": permutation_to_json(perm), "root": DyadicInterval.from_index(root),
                          "D": D, "series": series_to_json(x), "check": c.name, "lhs": c.lhs, "rhs": c.rhs})
    rec.stats["nonempty_stopped"] = nontrivial
    return rec


# -- full pipeline and Claims 1 / 2 -----------------------------------------


def theorem34_suite(perm: PermutationMap, alpha, trials: int, seed: int, limits: Budgets | None = None,
                    label: str = "", M=None) -> list[PropertyRecord]:
    """Certificates for pi and pi^-1 on random x: one pipeline record and one claims record."""
    limits = limits or Budgets.from_env()
    exponent = as_exponent(alpha)
    depth = perm.depth
    pipeline = PropertyRecord("pipeline", stats={"permutation": label, "alpha": exponent.alpha})
    claims = PropertyRecord("claims", stats={"permutation": label, "alpha": exponent.alpha})
    claim_names = ("claim1_carleson_O", "claim2_carleson_N", "geometric_decay")
    n_unique = without_k = decay_all = 0
    for direction, p in (("forward", perm), ("inverse", perm.inverse_map())):
        m = _exact_distortion(p, exponent, limits) if M is None else M
        K = 4 * m * m + 1
        pipeline.stats[f"M_{direction}"] = m
        pipeline.stats[f"K_{direction}"] = K
        pipeline.stats[f"certified_bound_{direction}"] = 3 * m * m * K
        for t in range(trials):
            rng = random.Random(f"{seed}:pipeline:{direction}:{t}")
            x = random_series_for(depth, rng, exponent)
            cert = run_decomposition(p, x, K=K, alpha=exponent, M=m, limits=limits)
            report = verify_certificate(cert, limits)
            pipeline.trials += 1
            claims.trials += 1
            ratio = weighted_norm_sq(permute_coefficients(x, p), exponent) / weighted_norm_sq(x, exponent)
            _bump(pipeline.stats, f"empirical_constant_{direction}", ratio)
            _bump(pipeline.stats, "levels_max", len(cert.levels))
            witness = {"permutation": permutation_to_json(p), "series": series_to_json(x), "alpha": exponent.alpha}
            pipe_fail = [c.name for c in report.failures if c.name not in claim_names]
            if pipe_fail:
                pipeline.fail({**witness, "failed_checks": sorted(set(pipe_fail))})
            claim_fail = [c.name for c in report.failures if c.name in claim_names]
            if claim_fail:
                claims.fail({**witness, "failed_checks": sorted(set(claim_fail))})
            for c in report.get("claim1_carleson_O"):
                _bump(claims.stats, "max_CC_O", c.lhs)
            for c in report.get("claim2_carleson_N"):
                _bump(claims.stats, "max_CC_N_over_M", c.lhs / m)
            n_unique += not all(c.passed for c in report.get("N_uniqueness"))
            without_k += not all(c.passed for c in report.get("norm_bound_without_K"))
            decay_all += not all(c.passed for c in report.get("geometric_decay_all"))
    claims.observations["N_uniqueness_violations"] = n_unique
    claims.observations["geometric_decay_all_violations"] = decay_all
    pipeline.observations["bound_3M2_without_K_violations"] = without_k
    return [pipeline, claims]


# -- transpose identity ------------------------------------------------------

TRANSPOSE_P = (Fraction(1), Fraction(2, 3), Fraction(1, 2))


def transpose_check(trials: int, seed: int, depth: int = 3) -> PropertyRecord:
    """<T_{p,pi} a, c> == <a, S_{p,pi} c>."""
    rec = PropertyRecord("transpose", stats={"depth": depth, "p_values": list(TRANSPOSE_P)})
    for t in range(trials):
        rng = random.Random(f"{seed}:transpose:{t}")
        p = TRANSPOSE_P[t % len(TRANSPOSE_P)]
        perm = gen_permutation(GeneratorSpec("random_bijection", depth, rng.getrandbits(63)))
        a = random_series(depth, rng, Normalization.LAMBDA, p)
        c = random_series(depth, rng, Normalization.HP, p)
        lhs = pairing(permute_coefficients(a, perm), c)
        rhs = pairing(a, adjoint_permute(c, perm))
        rec.trials += 1
        if lhs != rhs:
            rec.fail({"permutation": permutation_to_json(perm), "a": series_to_json(a), "c": series_to_json(c),
                      "lhs": lhs, "rhs": rhs})
    return rec


# -- oracle equivalences -----------------------------------------------------


def _addr_coeffs(x: CoefficientSeries) -> dict[str, Fraction]:
    return {iv.address: v for iv, v in x.items()}


def oracle_checks(trials: int, seed: int, max_depth: int = 3) -> list[PropertyRecord]:
    bmo = PropertyRecord("oracle_bmo_sup")
    lam = PropertyRecord("oracle_weighted_norm")
    cc = PropertyRecord("oracle_carleson")
    cover = PropertyRecord("oracle_covered_measure")
    for t in range(trials):
        rng = random.Random(f"{seed}:oracle:{t}")
        depth = 1 + t % max_depth
        x = random_series(depth, rng)
        coeffs = _addr_coeffs(x)
        bmo.trials += 1
        lib, ref = weighted_norm_sq(x, 1), oracles.bmo_sup_over_collections(coeffs, depth)
        if lib != ref:
            bmo.fail({"series": series_to_json(x), "rooted_max": lib, "sup_over_collections": ref})
        alpha = 1 + t % 3
        y = random_series_for(depth, rng, alpha)
        lam.trials += 1
        lib, ref = weighted_norm_sq(y), oracles.weighted_norm_direct(_addr_coeffs(y), alpha, depth)
        if lib != ref:
            lam.fail({"series": series_to_json(y), "alpha": alpha, "library": lib, "direct": ref})
        B = random_collection(depth, rng)
        members = B.addresses()
        cc.trials += 1
        lib = carleson_constant(B, alpha)
        over_b = oracles.carleson_over_members(members, alpha)
        over_tree = oracles.carleson_over_tree(members, alpha, depth)
        if not lib == over_b == over_tree:
            cc.fail({"B": B, "alpha": alpha, "library": lib, "over_B": over_b, "over_tree": over_tree})
        if alpha == 1:
            # CC_1 is the plain Carleson constant: sup over I of (1/|I|) sum |J|
            plain = max(sum((J.measure for J in B if I.contains(J)), Fraction(0)) / I.measure for I in B)
            if plain != lib:
                cc.fail({"B": B, "CC_1": lib, "plain": plain})
        cover.trials += 1
        lib, ref = B.covered_measure(), oracles.grid_covered_measure(members, depth)
        if lib != ref:
            cover.fail({"B": B, "library": lib, "grid": ref})
    return [bmo, lam, cc, cover]


# -- invariance --------------------------------------------------------------


def invariance_check(perm: PermutationMap, alphas, trials: int, seed: int, limits: Budgets,
                     label: str = "", semyonov: bool = True) -> PropertyRecord:
    """Containment-preserving level-preserving maps: distortion 1 and norm ratio exactly 1."""
    rec = PropertyRecord("invariance", stats={"permutation": label})
    depth = perm.depth
    if semyonov:
        rec.trials += 1
        K = semyonov_search(perm, "exact", limits=limits).value
        rec.stats["K"] = K
        if K != 1:
            rec.fail({"permutation": permutation_to_json(perm), "K": K})
    for alpha in alphas:
        exponent = as_exponent(alpha)
        rec.trials += 1
        M = distortion_search(perm, exponent, "exact", limits=limits).value
        rec.stats[f"distortion_alpha_{alpha}"] = M
        if M != 1:
            rec.fail({"permutation": permutation_to_json(perm), "alpha": alpha, "distortion": M})
        for t in range(trials):
            rng = random.Random(f"{seed}:invariance:{alpha}:{t}")
            x = random_series_for(depth, rng, exponent)
            rec.trials += 1
            ratio = weighted_norm_sq(permute_coefficients(x, perm), exponent) / weighted_norm_sq(x, exponent)
            if ratio != 1:
                rec.fail({"permutation": permutation_to_json(perm), "series": series_to_json(x), "ratio": ratio})
    return rec


# -- suite -------------------------------------------------------------------

CHECKS = ("necessity", "theorem2", "semyonov", "lemma", "pipeline", "transpose", "oracles", "invariance")

DEFAULTS = {
    "necessity": {"permutations": 20, "alphas": [1, 2, 3]},
    "theorem2": {"permutations": 10, "trials": 200},
    "semyonov": {"permutations": 10},
    "lemma": {"permutations": 10, "alphas": [1, 2], "trials": 50},
    "pipeline": {"alphas": [1, 2], "trials": 20},
    "transpose": {"trials": 500},
    "oracles": {"trials": 100},
    "invariance": {"automorphisms": 3, "alphas": [1, 2, 3], "trials": 20},
}

RANDOM_KINDS = ("random_bijection", "level_preserving_random", "adversarial_mass_mover", "subtree_swap")


@dataclass
class SuiteConfig:
    checks: list[str] = field(default_factory=lambda: list(CHECKS))
    depth: int = 3
    seed: int = 0
    trials: int | None = None
    params: dict = field(default_factory=dict)
    budgets: Budgets = field(default_factory=Budgets.from_env)
    permutation_files: list[str] = field(default_factory=list)

    @classmethod
    def from_json(cls, data, base: Path | None = None) -> "SuiteConfig":
        if not isinstance(data, dict):
            raise ValidationError("suite config must be a JSON object")
        known = {"checks", "depth", "seed", "trials", "params", "budgets", "permutation_files"}
        extra = sorted(set(data) - known)
        if extra:
            raise ValidationError(f"unknown config fields: {extra}")
        cfg = cls()
        if "checks" in data:
            checks = data["checks"]
            if not isinstance(checks, list) or not all(c in CHECKS for c in checks):
                raise ValidationError(f"'checks' must be a list drawn from {CHECKS}")
            cfg.checks = list(checks)
        for key in ("depth", "seed", "trials"):
            if key in data:
                value = data[key]
                if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                    raise ValidationError(f"{key!r} must be a nonnegative integer")
                setattr(cfg, key, value)
        params = data.get("params", {})
        if not isinstance(params, dict) or not set(params) <= set(CHECKS):
            raise ValidationError(f"'params' must map check names from {CHECKS} to objects")
        cfg.params = params
        budgets = data.get("budgets", {})
        if not isinstance(budgets, dict):
            raise ValidationError("'budgets' must be an object")
        try:
            cfg.budgets = cfg.budgets.updated(**budgets)
        except TypeError as exc:
            raise ValidationError(f"bad budgets: {exc}") from None
        files = data.get("permutation_files", [])
        if not isinstance(files, list) or not all(isinstance(f, str) for f in files):
            raise ValidationError("'permutation_files' must be a list of paths")
        cfg.permutation_files = [str((base / f) if base and not Path(f).is_absolute() else f) for f in files]
        return cfg

    def param(self, check: str, key: str):
        value = self.params.get(check, {}).get(key, DEFAULTS[check].get(key))
        if key == "trials" and self.trials is not None and key not in self.params.get(check, {}):
            return self.trials
        return value

    def to_json(self) -> dict:
        return {
            "checks": self.checks,
            "depth": self.depth,
            "seed": self.seed,
            "trials": self.trials,
            "params": {c: {k: self.param(c, k) for k in DEFAULTS[c]} for c in self.checks},
            "budgets": {"max_subsets": self.budgets.max_subsets, "max_antichains": self.budgets.max_antichains,
                        "samples": self.budgets.samples},
            "permutation_files": self.permutation_files,
        }


def _random_family(cfg: SuiteConfig, check: str, count: int, depths=None):
    out = []
    for k in range(count):
        kind = RANDOM_KINDS[k % len(RANDOM_KINDS)]
        depth = depths[k % len(depths)] if depths else cfg.depth
        spec = GeneratorSpec(kind, depth, derive_seed(cfg.seed, check, k))
        out.append((f"{kind}#{k}", gen_permutation(spec)))
    return out


def pipeline_family(depth: int, seed: int) -> list[tuple[str, PermutationMap]]:
    """identity, three tree automorphisms, three subtree swaps, three random bijections."""
    out = [("identity", PermutationMap.identity(depth))]
    for kind in ("tree_automorphism", "subtree_swap", "random_bijection"):
        for k in range(3):
            out.append((f"{kind}#{k}", gen_permutation(GeneratorSpec(kind, depth, derive_seed(seed, "pipeline", kind, k)))))
    return out


def run_suite(config: SuiteConfig | dict | None = None, base: Path | None = None) -> SuiteReport:
    if config is None:
        config = SuiteConfig()
    elif isinstance(config, dict):
        config = SuiteConfig.from_json(config, base)
    cfg = config
    limits = cfg.budgets
    files = [(f"file:{Path(f).name}", load_permutation(f)) for f in cfg.permutation_files]
    report = SuiteReport(config=cfg.to_json())
    small = cfg.depth <= 3

    for check in cfg.checks:
        if check == "necessity":
            perms = [("identity", PermutationMap.identity(cfg.depth))]
            perms += _random_family(cfg, check, cfg.param(check, "permutations"))
            perms += files
            for alpha in cfg.param(check, "alphas"):
                if small:
                    report.records.append(necessity_unpermuted(cfg.depth, alpha))
                for label, perm in perms:
                    family = "all" if perm.depth <= 3 else "sampled"
                    rec = necessity_check(perm, alpha, family, derive_seed(cfg.seed, check, label, alpha),
                                          limits.samples, limits, label)
                    report.records.append(rec)
                    if family == "all":
                        report.records.append(distortion_consistency(
                            perm, alpha, rec.stats["distortion_lower_bound"], limits, label))
        elif check == "theorem2":
            perms = [("identity", PermutationMap.identity(cfg.depth))]
            for k in range(cfg.param(check, "permutations")):
                spec = GeneratorSpec("level_preserving_random", cfg.depth, derive_seed(cfg.seed, check, k))
                perms.append((f"level_preserving_random#{k}", gen_permutation(spec)))
            perms += [(lab, p) for lab, p in files if is_level_preserving(p)]
            for label, perm in perms:
                report.records.append(theorem2_check(perm, cfg.param(check, "trials"),
                                                     derive_seed(cfg.seed, check, label), limits, label))
        elif check == "semyonov":
            report.records.append(semyonov_fixed_examples(limits))
            perms = _random_family(cfg, check, cfg.param(check, "permutations"), depths=[1, 2, 3])
            perms += [(lab, p) for lab, p in files if p.depth <= 3]
            for label, perm in perms:
                report.records.append(semyonov_crosscheck(perm, limits, label))
        elif check == "lemma":
            perms = _random_family(cfg, check, cfg.param(check, "permutations"))
            for alpha in cfg.param(check, "alphas"):
                for label, perm in perms:
                    for stress in (False, True):
                        report.records.append(lemma_check(perm, alpha, cfg.param(check, "trials"),
                                                          derive_seed(cfg.seed, check, label, alpha), limits,
                                                          label, stress))
        elif check == "pipeline":
            perms = pipeline_family(cfg.depth, cfg.seed) + [(lab, p) for lab, p in files if p.depth <= 3]
            for alpha in cfg.param(check, "alphas"):
                for label, perm in perms:
                    report.records.extend(theorem34_suite(perm, alpha, cfg.param(check, "trials"),
                                                          derive_seed(cfg.seed, check, label, alpha), limits, label))
        elif check == "transpose":
            report.records.append(transpose_check(cfg.param(check, "trials"), derive_seed(cfg.seed, check),
                                                  min(cfg.depth, 3)))
        elif check == "oracles":
            report.records.extend(oracle_checks(cfg.param(check, "trials"), derive_seed(cfg.seed, check),
                                                min(cfg.depth, 3)))
        elif check == "invariance":
            perms = [("identity", PermutationMap.identity(cfg.depth))]
            for k in range(cfg.param(check, "automorphisms")):
                spec = GeneratorSpec("tree_automorphism", cfg.depth, derive_seed(cfg.seed, check, k))
                perms.append((f"tree_automorphism#{k}", gen_permutation(spec)))
            for label, perm in perms:
                report.records.append(invariance_check(perm, cfg.param(check, "alphas"), cfg.param(check, "trials"),
                                                       derive_seed(cfg.seed, check, label), limits, label))
    return report
