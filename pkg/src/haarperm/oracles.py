"""Brute-force reference computations on address strings.

Nothing here touches the bitmask machinery: intervals are plain bit-strings,
containment is ``str.startswith`` and measures are counted on a uniform grid.
These are the independent sides of the oracle cross-checks.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np


def tree_addresses(depth: int) -> list[str]:
    return [
        "".join(bits)
        for level in range(depth + 1)
        for bits in itertools.product("01", repeat=level)
    ]


def _power(level_diff: int, alpha) -> Fraction | float:
    alpha = Fraction(alpha)
    if alpha.denominator == 1:
        return Fraction(1, 2 ** (level_diff * int(alpha)))
    return 2.0 ** (-level_diff * float(alpha))


def grid_covered_measure(addresses: Iterable[str], depth: int) -> Fraction:
    """Lebesgue measure of the union, by marking cells of the level-``depth`` grid."""
    marked = [False] * (2**depth)
    for a in addresses:
        span = 2 ** (depth - len(a))
        start = (int(a, 2) if a else 0) * span
        for t in range(start, start + span):
            marked[t] = True
    return Fraction(sum(marked), 2**depth)


def rooted_sum(addresses: Iterable[str], top: str, alpha) -> Fraction | float:
    return sum(_power(len(j) - len(top), alpha) for j in addresses if j.startswith(top))


def carleson_over_members(addresses: Iterable[str], alpha=1):
    members = list(addresses)
    return max(rooted_sum(members, i, alpha) for i in members)


def carleson_over_tree(addresses: Iterable[str], alpha, depth: int):
    members = list(addresses)
    return max(rooted_sum(members, i, alpha) for i in tree_addresses(depth))


def weighted_norm_direct(coeffs: Mapping[str, object], alpha, depth: int):
    """max over I of |I|^-alpha sum_{J subset I} x_J^2 |J|^alpha, double loop."""
    best = 0
    for i in tree_addresses(depth):
        s = sum(v * v * _power(len(j) - len(i), alpha) for j, v in coeffs.items() if j.startswith(i))
        best = max(best, s)
    return best


def subsets(items: list[str]) -> Iterable[list[str]]:
    for r in range(1, len(items) + 1):
        yield from (list(c) for c in itertools.combinations(items, r))


def semyonov_bruteforce(mapping: Mapping[str, str], depth: int) -> Fraction:
    """max over nonempty B of |pi^-1(B)*| / |B*| over every subset of the tree."""
    inverse = {v: k for k, v in mapping.items()}
    best = Fraction(0)
    for b in subsets(tree_addresses(depth)):
        ratio = grid_covered_measure([inverse[i] for i in b], depth) / grid_covered_measure(b, depth)
        best = max(best, ratio)
    return best


def distortion_bruteforce(mapping: Mapping[str, str], alpha, depth: int):
    best = Fraction(1)
    for b in subsets(tree_addresses(depth)):
        a = carleson_over_members(b, alpha)
        c = carleson_over_members([mapping[i] for i in b], alpha)
        best = max(best, a / c, c / a)
    return best


def bmo_sup_over_collections(coeffs: Mapping[str, Fraction], depth: int) -> Fraction:
    """max over all nonempty B of (1/|B*|) sum_{I in B} x_I^2 |I|.

    Every subset of the tree is evaluated at once with numpy; numerators are
    integers after clearing denominators and |B*| is counted on the grid, so
    the final comparison is exact.
    """
    addrs = tree_addresses(depth)
    n = len(addrs)
    if n > 24:
        raise ValueError("too many intervals for exhaustive search")
    terms = [Fraction(coeffs.get(a, 0)) ** 2 * Fraction(1, 2 ** len(a)) for a in addrs]
    common = 1
    for t in terms:
        common = common * t.denominator // math.gcd(common, t.denominator)
    ints = [int(t * common) for t in terms]
    if sum(ints) >= 2**62:
        raise OverflowError("coefficients too large for the vectorized oracle")
    masks = np.arange(1, 2**n, dtype=np.int64)
    numer = np.zeros(masks.shape, dtype=np.int64)
    cover = np.zeros(masks.shape, dtype=np.int64)
    for j, a in enumerate(addrs):
        bit = (masks >> j) & 1
        numer += bit * ints[j]
        span = 2 ** (depth - len(a))
        start = (int(a, 2) if a else 0) * span
        cells = ((1 << span) - 1) << start
        cover |= bit * cells
    counts = np.zeros(masks.shape, dtype=np.int64)
    c = cover.copy()
    while c.any():
        counts += c & 1
        c >>= 1
    ratio = numer / counts
    top = ratio.max()
    near = np.nonzero(ratio >= top * (1 - 1e-9))[0]
    return max(Fraction(int(numer[k]) * 2**depth, common * int(counts[k])) for k in near)
