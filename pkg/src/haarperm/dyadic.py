"""Dyadic intervals of [0, 1) and finite collections of them.

An interval is addressed by the bit-string of left/right choices from the
unit interval; the empty string is [0, 1) itself.  Internally every interval
also has a heap index ``int("1" + address, 2)`` (root = 1, children of ``i``
are ``2i`` and ``2i + 1``), and collections are stored as bitmasks over heap
indices.  With that encoding containment, maximal elements and covered
measure reduce to a few integer operations, which is what makes exhaustive
searches over all collections of a depth-3 tree affordable.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Union

from .errors import ValidationError

ROOT_ALIAS = "root"


def index_of(address: str) -> int:
    return int("1" + address, 2)


def address_of(index: int) -> str:
    return bin(index)[3:]


def level_of(index: int) -> int:
    return index.bit_length() - 1


def parse_address(text: str) -> str:
    """Accept a bare bit-string address or the alias ``"root"``."""
    if not isinstance(text, str):
        raise ValidationError(f"address must be a string, got {text!r}")
    if text == ROOT_ALIAS:
        return ""
    if text.strip("01"):
        raise ValidationError(f"invalid dyadic address {text!r}")
    return text


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """[k 2^-n, (k+1) 2^-n) encoded by its address (order = lexicographic)."""

    address: str = ""

    def __post_init__(self):
        if self.address.strip("01"):
            raise ValidationError(f"invalid dyadic address {self.address!r}")

    @classmethod
    def parse(cls, text: Union[str, "DyadicInterval"]) -> "DyadicInterval":
        if isinstance(text, DyadicInterval):
            return text
        return cls(parse_address(text))

    @classmethod
    def from_index(cls, index: int) -> "DyadicInterval":
        return cls(address_of(index))

    @property
    def index(self) -> int:
        return index_of(self.address)

    @property
    def level(self) -> int:
        return len(self.address)

    @property
    def measure(self) -> Fraction:
        return Fraction(1, 1 << len(self.address))

    @property
    def left(self) -> Fraction:
        return Fraction(int(self.address or "0", 2), 1 << len(self.address))

    @property
    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        return DyadicInterval(self.address + "0"), DyadicInterval(self.address + "1")

    @property
    def parent(self) -> "DyadicInterval | None":
        return DyadicInterval(self.address[:-1]) if self.address else None

    def contains(self, other: "DyadicInterval") -> bool:
        return other.address.startswith(self.address)

    def __str__(self) -> str:
        return self.address or ROOT_ALIAS


IntervalLike = Union[DyadicInterval, str]


def as_interval(value: IntervalLike) -> DyadicInterval:
    return DyadicInterval.parse(value)


def contains(outer: IntervalLike, inner: IntervalLike) -> bool:
    """True iff ``inner`` is a subset of ``outer`` (not necessarily proper)."""
    return as_interval(inner).address.startswith(as_interval(outer).address)


# ---------------------------------------------------------------------------
# Bitmask primitives.  Bit ``i`` of a mask is the interval with heap index i.


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@lru_cache(maxsize=None)
def subtree_mask(index: int, depth: int) -> int:
    """Mask of all intervals of level <= depth contained in interval ``index``."""
    mask = 0
    lev = level_of(index)
    for k in range(depth - lev + 1):
        width = 1 << k
        mask |= ((1 << width) - 1) << (index << k)
    return mask


def full_mask(depth: int) -> int:
    return subtree_mask(1, depth)


def max_mask(mask: int) -> int:
    """Members of ``mask`` with no proper ancestor in ``mask``."""
    out = mask
    for i in iter_bits(mask):
        j = i >> 1
        while j:
            if mask >> j & 1:
                out ^= 1 << i
                break
            j >>= 1
    return out


def covered_cells(mask: int, depth: int) -> int:
    """|B*| measured in units of 2^-depth (exact integer)."""
    return sum(1 << (depth - level_of(i)) for i in iter_bits(max_mask(mask)))


def mask_depth(mask: int) -> int:
    return max(0, mask.bit_length() - 2) if mask else 0


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedTree:
    """All 2^(depth+1) - 1 dyadic intervals of level <= depth."""

    depth: int

    def __post_init__(self):
        if self.depth < 0:
            raise ValidationError("depth must be nonnegative")

    @property
    def size(self) -> int:
        return (1 << (self.depth + 1)) - 1

    @property
    def order(self) -> tuple[int, ...]:
        return preorder(self.depth)

    @property
    def intervals(self) -> tuple[DyadicInterval, ...]:
        return tuple(DyadicInterval.from_index(i) for i in self.order)

    @property
    def mask(self) -> int:
        return full_mask(self.depth)

    def collection(self) -> "IntervalCollection":
        return IntervalCollection.from_mask(self.mask, self.depth)

    def __iter__(self) -> Iterator[DyadicInterval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return self.size


@lru_cache(maxsize=None)
def preorder(depth: int) -> tuple[int, ...]:
    """Heap indices of the depth-``depth`` tree in lexicographic address order."""
    out: list[int] = []
    stack = [1]
    while stack:
        i = stack.pop()
        out.append(i)
        if level_of(i) < depth:
            stack.append(2 * i + 1)
            stack.append(2 * i)
    return tuple(out)


def lex_key(mask: int) -> tuple[str, ...]:
    """Sort key ordering collections by their sorted address tuples."""
    return tuple(sorted(address_of(i) for i in iter_bits(mask)))


class IntervalCollection:
    """A finite set of dyadic intervals of level at most ``depth_bound``.

    Equality and hashing look at the members only.  Iteration is in
    lexicographic address order.
    """

    __slots__ = ("mask", "depth_bound")

    def __init__(self, members: Iterable[IntervalLike] = (), depth_bound: int | None = None):
        mask = 0
        top = 0
        for m in members:
            iv = as_interval(m)
            mask |= 1 << iv.index
            top = max(top, iv.level)
        if depth_bound is None:
            depth_bound = top
        elif top > depth_bound:
            raise ValidationError(f"member of level {top} exceeds depth bound {depth_bound}")
        self.mask = mask
        self.depth_bound = depth_bound

    @classmethod
    def from_mask(cls, mask: int, depth_bound: int | None = None) -> "IntervalCollection":
        if mask & 1:
            raise ValidationError("bit 0 does not denote an interval")
        obj = cls.__new__(cls)
        obj.mask = mask
        obj.depth_bound = mask_depth(mask) if depth_bound is None else depth_bound
        return obj

    def _wrap(self, mask: int) -> "IntervalCollection":
        return IntervalCollection.from_mask(mask, self.depth_bound)

    def __iter__(self) -> Iterator[DyadicInterval]:
        for a in sorted(address_of(i) for i in iter_bits(self.mask)):
            yield DyadicInterval(a)

    def addresses(self) -> list[str]:
        return sorted(address_of(i) for i in iter_bits(self.mask))

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return bool(self.mask)

    def __contains__(self, item: IntervalLike) -> bool:
        return bool(self.mask >> as_interval(item).index & 1)

    def __eq__(self, other) -> bool:
        if isinstance(other, IntervalCollection):
            return self.mask == other.mask
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.mask)

    def __or__(self, other: "IntervalCollection") -> "IntervalCollection":
        return IntervalCollection.from_mask(
            self.mask | other.mask, max(self.depth_bound, other.depth_bound)
        )

    def __and__(self, other: "IntervalCollection") -> "IntervalCollection":
        return self._wrap(self.mask & other.mask)

    def __sub__(self, other: "IntervalCollection") -> "IntervalCollection":
        return self._wrap(self.mask & ~other.mask)

    def __le__(self, other: "IntervalCollection") -> bool:
        return self.mask & ~other.mask == 0

    def __repr__(self) -> str:
        body = ", ".join(repr(str(iv)) for iv in self)
        return f"IntervalCollection({{{body}}}, depth_bound={self.depth_bound})"

    def max(self) -> "IntervalCollection":
        return self._wrap(max_mask(self.mask))

    def is_antichain(self) -> bool:
        return max_mask(self.mask) == self.mask

    def covered_measure(self) -> Fraction:
        d = self.depth_bound
        return Fraction(covered_cells(self.mask, d), 1 << d)

    def rooted_sub(self, interval: IntervalLike) -> "IntervalCollection":
        iv = as_interval(interval)
        if iv.level > self.depth_bound:
            return self._wrap(0)
        return self._wrap(self.mask & subtree_mask(iv.index, self.depth_bound))


def _coerce(collection) -> IntervalCollection:
    if isinstance(collection, IntervalCollection):
        return collection
    return IntervalCollection(collection)


def max_collection(collection) -> IntervalCollection:
    """Members not strictly contained in another member."""
    return _coerce(collection).max()


def generations(collection) -> list[IntervalCollection]:
    """G_0 = max B, G_{l+1} = max(B minus G_0..G_l), until nothing remains."""
    b = _coerce(collection)
    rest = b.mask
    out = []
    while rest:
        layer = max_mask(rest)
        out.append(IntervalCollection.from_mask(layer, b.depth_bound))
        rest &= ~layer
    return out


def covered_measure(collection) -> Fraction:
    return _coerce(collection).covered_measure()


def rooted_sub(collection, interval: IntervalLike) -> IntervalCollection:
    return _coerce(collection).rooted_sub(interval)
