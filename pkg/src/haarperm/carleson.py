"""Carleson constants, the Semyonov parameter and distortion of a permutation.

The suprema over all collections B are realized at finite depth by three
search modes: ``exact`` (every nonempty subset of the tree), ``antichain``
(only downward-saturated collections, one per antichain) and ``sampled``
(random collections, a lower bound).
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping

from .config import Budgets, budgets as default_budgets
from .dyadic import (
    DyadicInterval,
    IntervalCollection,
    IntervalLike,
    as_interval,
    covered_cells,
    full_mask,
    iter_bits,
    lex_key,
    level_of,
    subtree_mask,
)
from .errors import DepthTooLarge, EmptyCollection, ValidationError
from .exponent import CarlesonExponent, ExponentLike, as_exponent, heap_levels, level_scale

MODES = ("exact", "antichain", "sampled")


class PermutationMap:
    """A bijection of the intervals of level <= depth.

    ``forward[i]`` / ``inverse[i]`` map heap indices; slot 0 is unused.
    """

    __slots__ = ("depth", "forward", "inverse", "_tables", "_inv_tables")

    def __init__(self, depth: int, mapping: Mapping[IntervalLike, IntervalLike]):
        size = 1 << (depth + 1)
        forward = [0] * size
        for key, value in mapping.items():
            src, dst = as_interval(key), as_interval(value)
            for iv in (src, dst):
                if iv.level > depth:
                    raise ValidationError(f"interval {iv} lies below depth {depth}")
            if forward[src.index]:
                raise ValidationError(f"interval {src} mapped twice")
            forward[src.index] = dst.index
        self._init(depth, forward)

    def _init(self, depth: int, forward: list[int]) -> None:
        size = 1 << (depth + 1)
        missing = [DyadicInterval.from_index(i) for i in range(1, size) if not forward[i]]
        if missing:
            raise ValidationError(f"permutation leaves {missing[0]} unmapped")
        inverse = [0] * size
        for i in range(1, size):
            j = forward[i]
            if not 0 < j < size:
                raise ValidationError(f"image of {DyadicInterval.from_index(i)} lies below depth {depth}")
            if inverse[j]:
                raise ValidationError(
                    f"not a bijection: {DyadicInterval.from_index(j)} is hit twice"
                )
            inverse[j] = i
        self.depth = depth
        self.forward = tuple(forward)
        self.inverse = tuple(inverse)
        self._tables = None
        self._inv_tables = None

    @classmethod
    def from_forward(cls, depth: int, forward) -> "PermutationMap":
        obj = cls.__new__(cls)
        obj._init(depth, list(forward))
        return obj

    @classmethod
    def identity(cls, depth: int) -> "PermutationMap":
        return cls.from_forward(depth, range(1 << (depth + 1)))

    def __call__(self, interval: IntervalLike) -> DyadicInterval:
        return DyadicInterval.from_index(self.forward[as_interval(interval).index])

    def inv(self, interval: IntervalLike) -> DyadicInterval:
        return DyadicInterval.from_index(self.inverse[as_interval(interval).index])

    def inverse_map(self) -> "PermutationMap":
        return PermutationMap.from_forward(self.depth, self.inverse)

    def compose(self, other: "PermutationMap") -> "PermutationMap":
        """self o other, i.e. I -> self(other(I))."""
        if other.depth != self.depth:
            raise ValidationError("cannot compose permutations of different depth")
        fwd = self.forward
        return PermutationMap.from_forward(self.depth, [fwd[j] if j else 0 for j in other.forward])

    def as_dict(self) -> dict[str, str]:
        return {
            iv.address: self(iv).address
            for iv in (DyadicInterval.from_index(i) for i in range(1, len(self.forward)))
        }

    def __eq__(self, other) -> bool:
        if isinstance(other, PermutationMap):
            return self.depth == other.depth and self.forward == other.forward
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.depth, self.forward))

    def __repr__(self) -> str:
        moved = {a: b for a, b in self.as_dict().items() if a != b}
        return f"PermutationMap(depth={self.depth}, moved={moved})"

    # bitmask images, 8 bits at a time through lookup tables
    @staticmethod
    def _build_tables(table_map) -> list[list[int]]:
        size = len(table_map)
        tables = []
        for base in range(0, size, 8):
            images = [1 << table_map[i] if 0 < i < size else 0 for i in range(base, base + 8)]
            t = [0] * 256
            for v in range(1, 256):
                low = v & -v
                t[v] = t[v ^ low] | images[low.bit_length() - 1]
            tables.append(t)
        return tables

    def map_mask(self, mask: int) -> int:
        tables = self._tables
        if tables is None:
            tables = self._tables = self._build_tables(self.forward)
        out = 0
        c = 0
        while mask:
            out |= tables[c][mask & 255]
            mask >>= 8
            c += 1
        return out

    def unmap_mask(self, mask: int) -> int:
        tables = self._inv_tables
        if tables is None:
            tables = self._inv_tables = self._build_tables(self.inverse)
        out = 0
        c = 0
        while mask:
            out |= tables[c][mask & 255]
            mask >>= 8
            c += 1
        return out

    def image(self, collection: IntervalCollection) -> IntervalCollection:
        return IntervalCollection.from_mask(self.map_mask(collection.mask), self.depth)

    def preimage(self, collection: IntervalCollection) -> IntervalCollection:
        return IntervalCollection.from_mask(self.unmap_mask(collection.mask), self.depth)


def is_level_preserving(perm: PermutationMap) -> bool:
    return all(level_of(perm.forward[i]) == level_of(i) for i in range(1, len(perm.forward)))


# ---------------------------------------------------------------------------
# Carleson constants


def carleson_key(mask: int, depth: int, scale) -> int | float:
    """max over I in B of (sum_{J in B, J in I} w_J) * lift(I); 0 for empty B."""
    size = 1 << (depth + 1)
    half = size >> 1
    weight, lift = scale.weight, scale.lift
    levels = heap_levels(depth)
    u = [0] * size
    best = 0
    for i in range(size - 1, 0, -1):
        acc = u[2 * i] + u[2 * i + 1] if i < half else 0
        if mask >> i & 1:
            lev = levels[i]
            acc += weight[lev]
            k = acc * lift[lev]
            if k > best:
                best = k
        u[i] = acc
    return best


def carleson_constant(collection: IntervalCollection, alpha: ExponentLike = 1):
    """max over I in B of |I|^-alpha * sum_{J in B, J subset I} |J|^alpha.

    alpha = 1 gives the classical Carleson constant; alpha = 2/p - 1 the
    Carleson p-constant.  Exact (Fraction) for integer alpha, float otherwise.
    """
    if not collection:
        raise EmptyCollection("Carleson constant of the empty collection")
    exponent = as_exponent(alpha)
    depth = collection.depth_bound
    scale = level_scale(depth, exponent)
    return scale.finish(carleson_key(collection.mask, depth, scale))


def carleson_witness(collection: IntervalCollection, alpha: ExponentLike = 1) -> DyadicInterval:
    """Lexicographically smallest I in B attaining the Carleson constant."""
    value = carleson_constant(collection, alpha)
    exponent = as_exponent(alpha)
    for iv in collection:
        sub = collection.rooted_sub(iv)
        s = sum(exponent.power(j.level - iv.level) for j in sub)
        if s == value or (not exponent.exact and abs(s - value) <= 1e-12 * value):
            return iv
    raise AssertionError("no interval attains the Carleson constant")


@lru_cache(maxsize=8)
def _carleson_table(depth: int, exponent: CarlesonExponent) -> list:
    """Carleson keys of every subset of the tree, indexed by mask >> 1."""
    scale = level_scale(depth, exponent)
    n = (1 << (depth + 1)) - 1
    return [carleson_key(m << 1, depth, scale) for m in range(1 << n)]


@lru_cache(maxsize=8)
def _cells_table(depth: int) -> list[int]:
    n = (1 << (depth + 1)) - 1
    return [covered_cells(m << 1, depth) for m in range(1 << n)]


# ---------------------------------------------------------------------------
# Searches


@dataclass(frozen=True)
class SearchResult:
    """Outcome of an extremal search; ``lower_bound`` marks sampled results."""

    value: Fraction | float
    witness: IntervalCollection | None
    mode: str
    evaluated: int
    lower_bound: bool = False


def _subset_count(depth: int) -> int:
    return 1 << ((1 << (depth + 1)) - 1)


def _require_exact(depth: int, limits: Budgets) -> None:
    count = _subset_count(depth)
    if count > limits.max_subsets:
        raise DepthTooLarge(
            f"exact enumeration at depth {depth} needs {count} subsets, "
            f"budget max_subsets={limits.max_subsets}",
            limits.max_subsets,
        )


def antichain_count(depth: int) -> int:
    """f(0) = 2, f(d+1) = f(d)^2 + 1 (the empty antichain included)."""
    f = 2
    for _ in range(depth):
        f = f * f + 1
    return f


def _require_antichains(depth: int, limits: Budgets) -> None:
    count = antichain_count(depth)
    if count > limits.max_antichains:
        raise DepthTooLarge(
            f"antichain enumeration at depth {depth} needs {count} antichains, "
            f"budget max_antichains={limits.max_antichains}",
            limits.max_antichains,
        )


def _antichain_list(index: int, remaining: int) -> list[int]:
    if remaining == 0:
        return [0, 1 << index]
    left = _antichain_list(2 * index, remaining - 1)
    right = _antichain_list(2 * index + 1, remaining - 1)
    out = [a | b for a in left for b in right]
    out.append(1 << index)
    return out


def antichain_masks(depth: int) -> Iterator[int]:
    if depth == 0:
        yield from (0, 2)
        return
    left = _antichain_list(2, depth - 1)
    right = _antichain_list(3, depth - 1)
    for a in left:
        for b in right:
            yield a | b
    yield 2


def enumerate_antichains(depth: int, limits: Budgets | None = None) -> Iterator[IntervalCollection]:
    """Every antichain of the depth-``depth`` tree exactly once, empty one included."""
    limits = limits or default_budgets()
    _require_antichains(depth, limits)
    for mask in antichain_masks(depth):
        yield IntervalCollection.from_mask(mask, depth)


def _sample_masks(depth: int, seed: int, trials: int, start: int = 0) -> Iterator[int]:
    # one generator per trial index: results do not depend on how trials are split
    n = (1 << (depth + 1)) - 1
    for t in range(start, trials):
        rng = random.Random(f"{seed}:{t}")
        mask = rng.getrandbits(n) << 1
        if mask:
            yield mask


def _better(num, den, best_num, best_den) -> int:
    """Sign of num/den - best_num/best_den for positive denominators."""
    lhs, rhs = num * best_den, best_num * den
    return (lhs > rhs) - (lhs < rhs)


class _Best:
    """Running maximum of a ratio with lexicographic tie-breaking on witnesses."""

    def __init__(self, num, den, mask):
        self.num, self.den, self.mask = num, den, mask
        self._key = None

    def offer(self, num, den, mask) -> None:
        c = _better(num, den, self.num, self.den)
        if c > 0:
            self.num, self.den, self.mask, self._key = num, den, mask, None
        elif c == 0 and mask != self.mask:
            if self._key is None:
                self._key = lex_key(self.mask)
            key = lex_key(mask)
            if key < self._key:
                self.mask, self._key = mask, key


def _ratio(num, den, exact: bool):
    return Fraction(num, den) if exact else num / den


def _partitioned(chunk, args: tuple, total: int, workers: int) -> tuple[_Best, int]:
    """Run ``chunk(*args, lo, hi)`` over [0, total) and merge the partial maxima.

    Each chunk returns (num, den, mask, count); merging goes through ``_Best``,
    so the result is independent of the number of workers.
    """
    if workers <= 1 or total < 2 * workers:
        parts = [chunk(*args, 0, total)]
    else:
        bounds = [total * w // workers for w in range(workers + 1)]
        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(chunk, *args, lo, hi) for lo, hi in zip(bounds, bounds[1:]) if lo < hi]
            parts = [f.result() for f in futures]
    num, den, mask, count = parts[0]
    best = _Best(num, den, mask)
    for num, den, mask, c in parts[1:]:
        best.offer(num, den, mask)
        count += c
    return best, count


def _semyonov_chunk(perm: PermutationMap, mode: str, seed: int, lo: int, hi: int):
    depth = perm.depth
    best = _Best(1, 1, full_mask(depth))
    count = 0
    if mode == "exact":
        cells = _cells_table(depth)
        unmap = perm.unmap_mask
        for m in range(max(lo, 1), hi):
            mask = m << 1
            best.offer(cells[unmap(mask) >> 1], cells[m], mask)
            count += 1
    else:
        for mask in _sample_masks(depth, seed, hi, lo):
            best.offer(covered_cells(perm.unmap_mask(mask), depth), covered_cells(mask, depth), mask)
            count += 1
    return best.num, best.den, best.mask, count


def semyonov_search(
    perm: PermutationMap,
    mode: str = "exact",
    seed: int = 0,
    trials: int | None = None,
    limits: Budgets | None = None,
) -> SearchResult:
    """K = max over nonempty B of |pi^-1(B)*| / |B*| with the witness B."""
    limits = limits or default_budgets()
    depth = perm.depth
    if mode == "exact":
        _require_exact(depth, limits)
        best, count = _partitioned(_semyonov_chunk, (perm, mode, seed), _subset_count(depth), limits.workers)
    elif mode == "antichain":
        _require_antichains(depth, limits)
        best = _Best(1, 1, full_mask(depth))
        count = 0
        for a in antichain_masks(depth):
            if not a:
                continue
            mask = 0
            for i in iter_bits(a):
                mask |= subtree_mask(i, depth)
            best.offer(covered_cells(perm.unmap_mask(mask), depth), covered_cells(a, depth), mask)
            count += 1
    elif mode == "sampled":
        trials = limits.samples if trials is None else trials
        best, count = _partitioned(_semyonov_chunk, (perm, mode, seed), trials, limits.workers)
    else:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return SearchResult(
        Fraction(best.num, best.den),
        IntervalCollection.from_mask(best.mask, depth),
        mode,
        count,
        lower_bound=(mode == "sampled"),
    )


def semyonov_K(perm: PermutationMap, mode: str = "exact", seed: int = 0, trials: int | None = None,
               limits: Budgets | None = None) -> Fraction:
    return semyonov_search(perm, mode, seed, trials, limits).value


def _distortion_chunk(perm: PermutationMap, exponent: CarlesonExponent, mode: str, seed: int, lo: int, hi: int):
    depth = perm.depth
    best = _Best(1, 1, full_mask(depth))
    count = 0
    if mode == "exact":
        table = _carleson_table(depth, exponent)
        fmap = perm.map_mask
        pairs = ((m << 1, table[m], table[fmap(m << 1) >> 1]) for m in range(max(lo, 1), hi))
    else:
        scale = level_scale(depth, exponent)
        pairs = (
            (mask, carleson_key(mask, depth, scale), carleson_key(perm.map_mask(mask), depth, scale))
            for mask in _sample_masks(depth, seed, hi, lo)
        )
    for mask, a, b in pairs:
        if a >= b:
            best.offer(a, b, mask)
        else:
            best.offer(b, a, mask)
        count += 1
    return best.num, best.den, best.mask, count


def distortion_search(
    perm: PermutationMap,
    alpha: ExponentLike = 1,
    mode: str = "exact",
    seed: int = 0,
    trials: int | None = None,
    limits: Budgets | None = None,
) -> SearchResult:
    """M = max over nonempty B of max(CC(pi B)/CC(B), CC(B)/CC(pi B))."""
    limits = limits or default_budgets()
    exponent = as_exponent(alpha)
    depth = perm.depth
    if mode == "exact":
        _require_exact(depth, limits)
        total = _subset_count(depth)
    elif mode == "sampled":
        total = limits.samples if trials is None else trials
    else:
        raise ValueError(f"distortion supports modes 'exact' and 'sampled', not {mode!r}")
    best, count = _partitioned(_distortion_chunk, (perm, exponent, mode, seed), total, limits.workers)
    return SearchResult(
        _ratio(best.num, best.den, exponent.exact),
        IntervalCollection.from_mask(best.mask, depth),
        mode,
        count,
        lower_bound=(mode == "sampled"),
    )


def distortion(perm: PermutationMap, alpha: ExponentLike = 1, mode: str = "exact", seed: int = 0,
               trials: int | None = None, limits: Budgets | None = None):
    return distortion_search(perm, alpha, mode, seed, trials, limits).value
