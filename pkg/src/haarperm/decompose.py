"""Stopping-time decomposition bounding ||T_pi x|| through Carleson distortion.

Given a permutation pi with distortion M and a threshold K > M(M+1), the
construction picks the interval J0 whose image carries the norm of T_pi x,
collects the support terms B = {J : x_J != 0, pi(J) subset pi(J0)}, and
then repeatedly splits each piece D(I) of B into a good part G(I), on which
pi does not inflate |J|^alpha by more than K, and a stopped part S(I).  The stopped part is regrouped below
the new roots O(I) by generations, and the process recurses on those roots
until nothing is stopped.

Everything is kept in a :class:`DecompositionCertificate` so that
:func:`verify_certificate` can recheck every inequality from the stored
collections alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .carleson import PermutationMap, carleson_constant, distortion_search
from .config import Budgets
from .dyadic import (
    DyadicInterval,
    IntervalCollection,
    IntervalLike,
    as_interval,
    generations,
    subtree_mask,
)
from .errors import (
    DepthMismatch,
    DepthTooLarge,
    EmptyInput,
    NonContraction,
    RootViolation,
    ZeroSeries,
)
from .exponent import CarlesonExponent, ExponentLike, as_exponent, to_fraction
from .haar_ops import (
    CoefficientSeries,
    _exponent_for,
    permute_coefficients,
    rooted_values,
    weighted_norm_sq,
)

REL_TOL = 1e-12


def _leq(lhs, rhs) -> bool:
    if isinstance(lhs, float) or isinstance(rhs, float):
        return lhs <= rhs + REL_TOL * max(abs(rhs), 1.0)
    return lhs <= rhs


def _close(lhs, rhs) -> bool:
    if isinstance(lhs, float) or isinstance(rhs, float):
        return abs(lhs - rhs) <= REL_TOL * max(abs(rhs), 1.0)
    return lhs == rhs


def _lt(lhs, rhs) -> bool:
    if isinstance(lhs, float) or isinstance(rhs, float):
        return lhs < rhs + REL_TOL * max(abs(rhs), 1.0)
    return lhs < rhs


@dataclass(frozen=True)
class Check:
    """One inequality or identity, with both sides recorded."""

    name: str
    bound: str
    lhs: object
    rhs: object
    passed: bool
    at: str = ""
    gating: bool = True


@dataclass(frozen=True)
class SplitResult:
    root: DyadicInterval
    domain: IntervalCollection
    good: IntervalCollection
    stopped: IntervalCollection
    pulled_back_max: IntervalCollection
    next_roots: IntervalCollection
    weight: object
    checks: tuple[Check, ...] = field(default=(), compare=False)


def _weight(perm: PermutationMap, domain: IntervalCollection, exponent: CarlesonExponent):
    """sum of |L|^alpha over the maximal intervals of pi(D)."""
    top = perm.image(domain).max()
    return sum((exponent.power(L.level) for L in top), exponent.power(0) * 0), top


def _stopped(domain, root, perm, K, W, exponent) -> IntervalCollection:
    # |pi(J)|^alpha / W >= K (|J| / |I|)^alpha
    mask = 0
    for J in domain:
        lhs = exponent.power(perm(J).level)
        rhs = K * W * exponent.power(J.level - root.level)
        if lhs >= rhs:
            mask |= 1 << J.index
    return IntervalCollection.from_mask(mask, domain.depth_bound)


def _series_sum(x: CoefficientSeries, collection, perm, exponent):
    return sum(
        (x[J] ** 2 * exponent.power(perm(J).level) for J in collection),
        exponent.power(0) * 0,
    )


def _relative_sum(collection, root: DyadicInterval, exponent):
    return sum(
        (exponent.power(J.level - root.level) for J in collection),
        exponent.power(0) * 0,
    )


def _lemma_checks(split: SplitResult, perm, x, K, M, exponent, norm_sq) -> list[Check]:
    at = str(split.root)
    W = split.weight
    out = []
    lhs = _series_sum(x, split.good, perm, exponent)
    rhs = W * norm_sq * K
    out.append(Check("lemma_good", "sum_{G} x_J^2 |pi J|^a <= W K ||x||^2", lhs, rhs, _leq(lhs, rhs), at))
    if exponent.is_bmo:
        star = perm.image(split.domain).covered_measure()
        out.append(Check("weight_star", "sum_{max pi D} |L| == |pi(D)*|", W, star, W == star, at))
    if M is None:
        return out
    lhs = _relative_sum(split.stopped.max(), split.root, exponent)
    rhs = M / K
    out.append(Check("lemma_stopped", "sum_{max S} (|J|/|I|)^a <= M/K", lhs, rhs, _leq(lhs, rhs), at))
    lhs = _relative_sum(split.next_roots, split.root, exponent)
    rhs = M * (M + 1) / K
    out.append(Check("lemma_next_roots", "sum_{O(I)} (|J|/|I|)^a <= M(M+1)/K", lhs, rhs, _leq(lhs, rhs), at))
    if K > M * (M + 1):
        ok = _lt(lhs, 1) and split.root not in split.next_roots
        out.append(Check("strict_descent", "every L in O(I) is a proper subinterval of I", lhs, 1, ok, at))
    return out


def _split(domain, root, perm, K, exponent):
    W, top = _weight(perm, domain, exponent)
    stopped = _stopped(domain, root, perm, K, W, exponent)
    good = domain - stopped
    pulled = perm.preimage(top)
    next_roots = (pulled & stopped) | stopped.max()
    return W, good, stopped, pulled, next_roots


def lemma_split(
    domain: IntervalCollection,
    root: IntervalLike,
    perm: PermutationMap,
    K,
    alpha: ExponentLike | None,
    x: CoefficientSeries,
    M=None,
    *,
    norm_sq=None,
) -> SplitResult:
    """Split D(I) into good and stopped parts and form N(I), O(I).

    With ``M`` given, the three bounds of the splitting lemma are evaluated
    and attached as checks (nothing is assumed).
    """
    root = as_interval(root)
    if not domain:
        raise EmptyInput("lemma_split needs a nonempty D(I)")
    outside = domain - domain.rooted_sub(root)
    if outside:
        raise RootViolation(f"{next(iter(outside))} is not contained in {root}")
    exponent = _exponent_for(x, alpha)
    K = to_fraction(K) if not isinstance(K, float) else K
    W, good, stopped, pulled, next_roots = _split(domain, root, perm, K, exponent)
    if exponent.is_bmo and W != perm.image(domain).covered_measure():
        raise AssertionError("|pi(D)*| disagrees with the sum over max pi(D)")
    if norm_sq is None:
        norm_sq = weighted_norm_sq(x, exponent)
    split = SplitResult(root, domain, good, stopped, pulled, next_roots, W)
    checks = _lemma_checks(split, perm, x, K, M, exponent, norm_sq)
    return SplitResult(root, domain, good, stopped, pulled, next_roots, W, tuple(checks))


def stopping_decomposition(stopped: IntervalCollection, roots: IntervalCollection) -> dict[DyadicInterval, IntervalCollection]:
    """D(L) for every L in O: the stopped intervals inside L, minus those
    inside a member of the next generation of O."""
    depth = max(stopped.depth_bound, roots.depth_bound)
    if not stopped:
        return {}
    gens = generations(roots)
    out: dict[DyadicInterval, IntervalCollection] = {}
    for k, layer in enumerate(gens):
        below = 0
        if k + 1 < len(gens):
            for P in gens[k + 1]:
                below |= subtree_mask(P.index, depth)
        for L in layer:
            mask = stopped.mask & subtree_mask(L.index, depth) & ~below
            out[L] = IntervalCollection.from_mask(mask, depth)
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class LevelRecord:
    roots: IntervalCollection
    splits: tuple[SplitResult, ...]

    @property
    def pulled(self) -> IntervalCollection:
        out = IntervalCollection.from_mask(0, self.roots.depth_bound)
        for s in self.splits:
            out = out | s.pulled_back_max
        return out


@dataclass
class DecompositionCertificate:
    permutation: PermutationMap
    series: CoefficientSeries
    exponent: CarlesonExponent
    K: object
    M: object
    J0: DyadicInterval
    B: IntervalCollection
    levels: list[LevelRecord]
    M_source: str = "supplied"
    report: "VerificationReport | None" = field(default=None, compare=False)

    @property
    def O(self) -> IntervalCollection:
        out = IntervalCollection.from_mask(0, self.B.depth_bound)
        for lvl in self.levels:
            out = out | lvl.roots
        return out

    @property
    def N(self) -> IntervalCollection:
        out = IntervalCollection.from_mask(0, self.B.depth_bound)
        for lvl in self.levels:
            out = out | lvl.pulled
        return out

    def splits(self):
        for l, lvl in enumerate(self.levels):
            for s in lvl.splits:
                yield l, s


@lru_cache(maxsize=512)
def _exact_distortion(perm: PermutationMap, exponent: CarlesonExponent, limits: Budgets):
    return distortion_search(perm, exponent, "exact", limits=limits).value


def _initial_collection(perm: PermutationMap, x: CoefficientSeries, J0: DyadicInterval) -> IntervalCollection:
    """B = {J : x_J != 0, pi(J) subset pi(J0)}; only these terms enter the sum at J0."""
    depth = perm.depth
    below = perm.unmap_mask(subtree_mask(perm.forward[J0.index], depth))
    return IntervalCollection.from_mask(below & x.support().mask, depth)


def _select_J0(y: CoefficientSeries, perm: PermutationMap, exponent) -> DyadicInterval:
    values = rooted_values(y, exponent)
    best = max(values.values())
    candidates = [DyadicInterval.from_index(perm.inverse[i]) for i, v in values.items() if v == best]
    return min(candidates)


def run_decomposition(
    perm: PermutationMap,
    x: CoefficientSeries,
    K="auto",
    alpha: ExponentLike | None = None,
    M="auto",
    limits: Budgets | None = None,
) -> DecompositionCertificate:
    """Build the full decomposition of B for T_pi x and return its certificate.

    ``M="auto"`` computes the exact distortion (depth <= 3); ``K="auto"``
    takes 4M^2 + 1.  K <= M(M+1) is refused.
    """
    if x.depth != perm.depth:
        raise DepthMismatch(f"series depth {x.depth} != permutation depth {perm.depth}")
    if x.is_zero():
        raise ZeroSeries("the decomposition needs a nonzero series")
    exponent = _exponent_for(x, alpha)
    if M == "auto":
        M = _exact_distortion(perm, exponent, limits or Budgets.from_env())
        source = "exact distortion"
    else:
        M = to_fraction(M) if not isinstance(M, float) else M
        source = "supplied"
    if K == "auto":
        K = 4 * M * M + 1
    else:
        K = to_fraction(K) if not isinstance(K, float) else K
    if K <= M * (M + 1):
        raise NonContraction(
            f"K={K} <= M(M+1)={M * (M + 1)}: pieces need not shrink; choose K > M(M+1), e.g. 4M^2+1"
        )

    norm_sq = weighted_norm_sq(x, exponent)
    y = permute_coefficients(x, perm)
    J0 = _select_J0(y, perm, exponent)
    depth = perm.depth
    B = _initial_collection(perm, x, J0)

    pending = {I: B.rooted_sub(I) for I in B.max()}
    levels: list[LevelRecord] = []
    while pending:
        roots = IntervalCollection(pending, depth)
        splits = []
        nxt: dict[DyadicInterval, IntervalCollection] = {}
        for I, D in pending.items():
            s = lemma_split(D, I, perm, K, exponent, x, M, norm_sq=norm_sq)
            splits.append(s)
            for L, DL in stopping_decomposition(s.stopped, s.next_roots).items():
                if DL:
                    nxt[L] = DL
        levels.append(LevelRecord(roots, tuple(splits)))
        pending = dict(sorted(nxt.items()))

    return DecompositionCertificate(perm, x, exponent, K, M, J0, B, levels, source)


# ---------------------------------------------------------------------------
# Verification


@dataclass
class VerificationReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.gating)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.gating and not c.passed]

    def get(self, name: str) -> list[Check]:
        return [c for c in self.checks if c.name == name]

    def summary(self) -> dict[str, bool]:
        out: dict[str, bool] = {}
        for c in self.checks:
            if c.gating:
                out[c.name] = out.get(c.name, True) and c.passed
        return out


def _same(name, bound, stored, recomputed, at="") -> Check:
    return Check(name, bound, stored.addresses(), recomputed.addresses(), stored == recomputed, at)


def verify_certificate(cert: DecompositionCertificate, limits: Budgets | None = None) -> VerificationReport:
    """Recheck every step and bound of a certificate from its stored data."""
    perm, x, exponent = cert.permutation, cert.series, cert.exponent
    K, M = cert.K, cert.M
    depth = perm.depth
    checks: list[Check] = []
    add = checks.append
    zero = exponent.power(0) * 0

    norm_sq = weighted_norm_sq(x, exponent)
    target = weighted_norm_sq(permute_coefficients(x, perm), exponent)

    # parameters
    add(Check("K_contraction", "K > M(M+1)", K, M * (M + 1), M * (M + 1) < K))
    try:
        exact_M = _exact_distortion(perm, exponent, limits or Budgets.from_env())
        add(Check("distortion_bound", "M >= exact distortion of pi", M, exact_M, _leq(exact_M, M)))
    except DepthTooLarge:
        add(Check("distortion_bound", "M >= exact distortion of pi", M, None, True, gating=False))

    # starting point
    J0 = cert.J0
    top = perm(J0)
    values = rooted_values(permute_coefficients(x, perm), exponent)
    at_J0 = values[top.index]
    add(Check("J0_attains_norm", "rooted value of T x at pi(J0) == ||T x||^2", at_J0, target, _close(at_J0, target), str(J0)))
    B = _initial_collection(perm, x, J0)
    add(_same("initial_collection", "B == {J : x_J != 0, pi(J) subset pi(J0)}", cert.B, B))

    # level structure
    expected_roots = {I: B.rooted_sub(I) for I in B.max()}
    parent: dict[DyadicInterval, DyadicInterval] = {}
    level_of_root: dict[DyadicInterval, int] = {}
    image_union = IntervalCollection.from_mask(0, depth)
    goods = []
    for l, lvl in enumerate(cert.levels):
        got = {s.root: s.domain for s in lvl.splits}
        add(_same("level_roots", "O_l == roots produced by level l-1", lvl.roots,
                  IntervalCollection(expected_roots, depth), at=f"level {l}"))
        ok = got == expected_roots
        add(Check("level_domains", "stored D(I) == D(I) produced by level l-1",
                  sorted(str(I) for I in got), sorted(str(I) for I in expected_roots), ok, f"level {l}"))
        nxt: dict[DyadicInterval, IntervalCollection] = {}
        for s in lvl.splits:
            at = f"level {l}, root {s.root}"
            level_of_root[s.root] = l
            add(Check("split_disjoint", "G(I) and S(I) are disjoint", len(s.good & s.stopped), 0,
                      not (s.good & s.stopped), at))
            D = s.good | s.stopped
            inside = D == D.rooted_sub(s.root)
            add(Check("root_containment", "D(I)* subset I", len(D - D.rooted_sub(s.root)), 0, inside, at))
            W, good, stopped, pulled, next_roots = _split(D, s.root, perm, K, exponent)
            add(_same("split_rule", "S(I) == {J : |pi J|^a / W >= K (|J|/|I|)^a}", s.stopped, stopped, at))
            add(_same("pulled_back_max", "N(I) == pi^-1(max pi(D(I)))", s.pulled_back_max, pulled, at))
            add(_same("next_roots", "O(I) == (N(I) & S(I)) | max S(I)", s.next_roots, next_roots, at))
            fresh = SplitResult(s.root, D, s.good, s.stopped, s.pulled_back_max, s.next_roots, W)
            for c in _lemma_checks(fresh, perm, x, K, M, exponent, norm_sq):
                add(Check(c.name, c.bound, c.lhs, c.rhs, c.passed, at, c.gating))
            for L, DL in stopping_decomposition(s.stopped, s.next_roots).items():
                if DL:
                    nxt[L] = DL
                    parent[L] = s.root
            image_union = image_union | perm.image(D).max()
            goods.append(s.good)
        expected_roots = dict(sorted(nxt.items()))
    add(Check("termination", "no roots left after the last level", len(expected_roots), 0, not expected_roots))

    O, N = cert.O, cert.N

    # geometric decay along the construction, starting from every root
    c = M * (M + 1) / K
    children: dict[DyadicInterval, list[DyadicInterval]] = {}
    for L, P in parent.items():
        children.setdefault(P, []).append(L)
    for I in sorted(level_of_root):
        frontier = [I]
        step = 0
        while frontier:
            lhs = sum((exponent.power(J.level) for J in frontier), zero)
            rhs = c ** step * exponent.power(I.level)
            add(Check("geometric_decay",
                      "sum_{J in O_k descending from I} |J|^a <= (M(M+1)/K)^(k-k0) |I|^a",
                      lhs, rhs, _leq(lhs, rhs), f"root {I}, k-k0={step}"))
            frontier = [L for J in frontier for L in children.get(J, ())]
            step += 1
    # same sums over every member of O_k inside I, whatever its ancestry
    for I, k0 in sorted(level_of_root.items()):
        for k in range(k0, len(cert.levels)):
            inside = cert.levels[k].roots.rooted_sub(I)
            if not inside:
                continue
            lhs = sum((exponent.power(J.level) for J in inside), zero)
            rhs = c ** (k - k0) * exponent.power(I.level)
            add(Check("geometric_decay_all", "sum_{J in O_k, J subset I} |J|^a <= (M(M+1)/K)^(k-k0) |I|^a",
                      lhs, rhs, _leq(lhs, rhs), f"root {I}, k={k}", gating=False))

    add(Check("claim1_precondition", "M(M+1)/K <= 1/2", c, Fraction(1, 2), _leq(c, Fraction(1, 2))))
    cc_O = carleson_constant(O, exponent) if O else zero
    add(Check("claim1_carleson_O", "CC_a(O) <= 2", cc_O, 2, _leq(cc_O, 2)))
    cc_N = carleson_constant(N, exponent) if N else zero
    add(Check("claim2_carleson_N", "CC_a(N) <= 3M", cc_N, 3 * M, _leq(cc_N, 3 * M)))
    add(_same("image_of_N", "pi(N) == union of max pi(D(I))", perm.image(N), image_union))

    owners: dict[DyadicInterval, int] = {}
    for _, s in cert.splits():
        for J in s.pulled_back_max:
            owners[J] = owners.get(J, 0) + 1
    repeated = sorted(str(J) for J, n in owners.items() if n > 1)
    add(Check("N_uniqueness", "each interval lies in at most one N(I)", repeated, [], not repeated, gating=False))

    union = IntervalCollection.from_mask(0, depth)
    overlap = 0
    for g in goods:
        overlap += len(union & g)
        union = union | g
    add(Check("partition", "{G(I)} are disjoint and cover B", overlap, 0, overlap == 0 and union == B))

    assembled = K * M * cc_N * norm_sq
    add(Check("norm_bound_assembled", "||T x||^2 <= K M CC_a(N) ||x||^2", target, assembled, _leq(target, assembled)))
    final = 3 * M * M * K * norm_sq
    add(Check("norm_bound_final", "||T x||^2 <= 3 M^2 K ||x||^2", target, final, _leq(target, final)))
    displayed = 3 * M * M * norm_sq
    add(Check("norm_bound_without_K", "||T x||^2 <= 3 M^2 ||x||^2", target, displayed,
              _leq(target, displayed), gating=False))

    return VerificationReport(checks)
