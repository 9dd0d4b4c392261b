"""The weight exponent alpha = 2/p - 1 and exact level weights 2^(-level*alpha)."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Union

from .errors import ValidationError


def to_fraction(value) -> Fraction:
    if type(value) is int:
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational number: {value!r}") from exc
    if isinstance(value, float):
        return Fraction(value)
    raise ValidationError(f"not a rational number: {value!r}")


class CarlesonExponent:
    """alpha = 2(1/p - 1/2); alpha = 1 (p = 1) is the BMO / classical case.

    Instances are interned per alpha and immutable.
    """

    __slots__ = ("alpha", "p", "exact", "_hash", "_scales")
    _interned: dict[Fraction, "CarlesonExponent"] = {}

    def __new__(cls, alpha):
        if isinstance(alpha, (int, Fraction)):
            cached = cls._interned.get(alpha)
            if cached is not None:
                return cached
        a = to_fraction(alpha)
        cached = cls._interned.get(a)
        if cached is not None:
            return cached
        if a < 1:
            raise ValidationError(f"alpha must be >= 1 (0 < p <= 1), got {a}")
        obj = super().__new__(cls)
        object.__setattr__(obj, "alpha", a)
        object.__setattr__(obj, "p", 2 / (a + 1))
        object.__setattr__(obj, "exact", a.denominator == 1)
        object.__setattr__(obj, "_hash", hash(("alpha", a)))
        object.__setattr__(obj, "_scales", {})
        cls._interned[a] = obj
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("CarlesonExponent is immutable")

    def __reduce__(self):
        return (CarlesonExponent, (self.alpha,))

    @classmethod
    def from_p(cls, p) -> "CarlesonExponent":
        p = to_fraction(p)
        if not 0 < p <= 1:
            raise ValidationError(f"p must lie in (0, 1], got {p}")
        return cls(2 / p - 1)

    @classmethod
    def from_alpha(cls, alpha) -> "CarlesonExponent":
        return cls(alpha)

    @property
    def is_bmo(self) -> bool:
        return self.alpha == 1

    def power(self, level: int):
        """|I|^alpha for an interval of the given level."""
        if self.exact:
            return Fraction(1, 1 << (level * int(self.alpha)))
        return 2.0 ** (-level * float(self.alpha))

    def scale(self, depth: int) -> "LevelScale":
        s = self._scales.get(depth)
        if s is None:
            s = self._scales[depth] = LevelScale(depth, self)
        return s

    def __eq__(self, other) -> bool:
        if isinstance(other, CarlesonExponent):
            return self.alpha == other.alpha
        return NotImplemented

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"CarlesonExponent(alpha={self.alpha}, p={self.p})"

    def __str__(self) -> str:
        return str(self.alpha)


BMO = CarlesonExponent(1)

ExponentLike = Union[CarlesonExponent, int, Fraction, str]


def as_exponent(value: "ExponentLike | None") -> CarlesonExponent:
    """Interpret a bare number as alpha."""
    if value is None:
        return BMO
    if isinstance(value, CarlesonExponent):
        return value
    return CarlesonExponent(value)


class LevelScale:
    """Level weights rescaled so exact exponents stay in integer arithmetic.

    ``weight[k]`` is |I|^alpha for level k multiplied by ``total``; the value of
    a rooted sum U at an interval of level k is ``U * lift[k] / total``.
    """

    def __init__(self, depth: int, exponent: CarlesonExponent):
        self.depth = depth
        self.exponent = exponent
        if exponent.exact:
            a = int(exponent.alpha)
            self.weight = [1 << ((depth - k) * a) for k in range(depth + 1)]
            self.lift = [1 << (k * a) for k in range(depth + 1)]
            self.total = 1 << (depth * a)
        else:
            a = float(exponent.alpha)
            self.weight = [2.0 ** (-k * a) for k in range(depth + 1)]
            self.lift = [2.0 ** (k * a) for k in range(depth + 1)]
            self.total = 1

    def finish(self, key):
        if type(key) is int:
            return Fraction(key, self.total)
        if isinstance(key, float) or not self.exponent.exact:
            return float(key) / self.total
        return Fraction(key) / self.total


def level_scale(depth: int, exponent: CarlesonExponent) -> LevelScale:
    return exponent.scale(depth)


@lru_cache(maxsize=None)
def heap_levels(depth: int) -> tuple[int, ...]:
    """level of heap index i (index 0 unused)."""
    out = [0] * (1 << (depth + 1))
    for i in range(1, len(out)):
        out[i] = i.bit_length() - 1
    return tuple(out)


def rooted_sums(values, depth: int, scale: LevelScale) -> list:
    """U[i] = sum over J inside interval i of values[J] * weight[level J].

    ``values`` is indexed by heap index and has length 2^(depth+1).
    """
    size = 1 << (depth + 1)
    half = size >> 1
    weight = scale.weight
    levels = heap_levels(depth)
    u = [0] * size
    for i in range(size - 1, 0, -1):
        v = values[i]
        acc = v * weight[levels[i]] if v else 0
        if i < half:
            acc = acc + u[2 * i] + u[2 * i + 1]
        u[i] = acc
    return u


def rooted_max(values, depth: int, scale: LevelScale):
    """max over all intervals I of U[I] * lift[level I] (see :func:`rooted_sums`)."""
    size = 1 << (depth + 1)
    half = size >> 1
    weight, lift = scale.weight, scale.lift
    levels = heap_levels(depth)
    u = [0] * size
    best = 0
    for i in range(size - 1, 0, -1):
        lev = levels[i]
        acc = u[2 * i] + u[2 * i + 1] if i < half else 0
        v = values[i]
        if v:
            acc = acc + v * weight[lev]
        u[i] = acc
        k = acc * lift[lev]
        if k > best:
            best = k
    return best
