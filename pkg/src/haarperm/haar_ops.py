"""Finite Haar series, their BMO / Lipschitz / H^p norms and permutation operators.

A series is stored by coefficient.  The normalization tag says which basis
the coefficients refer to:

* ``linf``   -- sum x_I h_I with the L-infinity normalized Haar functions,
* ``lambda`` -- sum a_I h_I / |I|^(1 - 1/p), the unit vectors of Lambda_(1/p - 1),
* ``hp``     -- sum c_I h_I / |I|^(1/p), the unit vectors of dyadic H^p.

For ``linf`` and ``lambda`` the permutation acts identically on coefficients
(y_I = x_{pi^-1(I)}), so T_pi and T_{p,pi} share :func:`permute_coefficients`.
"""
from __future__ import annotations

import enum
import math
from fractions import Fraction
from typing import Iterator, Mapping

from .carleson import PermutationMap
from .dyadic import DyadicInterval, IntervalCollection, IntervalLike, as_interval, iter_bits
from .errors import DepthMismatch, EmptyCollection, NormalizationMismatch, ValidationError
from .exponent import (
    BMO,
    CarlesonExponent,
    ExponentLike,
    as_exponent,
    heap_levels,
    level_scale,
    rooted_max,
    rooted_sums,
    to_fraction,
)


class Normalization(str, enum.Enum):
    LINF = "linf"
    LAMBDA = "lambda"
    HP = "hp"


class CoefficientSeries:
    """Immutable finite Haar series; absent coefficients are zero."""

    __slots__ = ("depth", "normalization", "p", "_c", "_exp")

    def __init__(
        self,
        depth: int,
        coeffs: Mapping[IntervalLike, object] | None = None,
        normalization: Normalization | str = Normalization.LINF,
        p=None,
    ):
        c = {}
        for key, value in (coeffs or {}).items():
            iv = as_interval(key)
            if iv.level > depth:
                raise ValidationError(f"coefficient at {iv} lies below depth {depth}")
            if value:
                c[iv.index] = value
        self._setup(depth, c, normalization, p)

    def _setup(self, depth, c, normalization, p) -> None:
        normalization = Normalization(normalization)
        if normalization is Normalization.LINF:
            if p is not None and to_fraction(p) != 1:
                raise NormalizationMismatch("linf series carry no p other than 1")
            p = None
        else:
            if p is None:
                raise ValidationError(f"{normalization.value} series require p")
            p = to_fraction(p)
            if not 0 < p <= 1:
                raise ValidationError(f"p must lie in (0, 1], got {p}")
        self.depth = depth
        self.normalization = normalization
        self.p = p
        self._c = c
        if normalization is Normalization.LINF:
            self._exp = BMO
        elif normalization is Normalization.LAMBDA:
            self._exp = CarlesonExponent.from_p(p)
        else:
            self._exp = None

    @classmethod
    def from_indices(cls, depth, coeffs: dict[int, object], normalization=Normalization.LINF, p=None):
        obj = cls.__new__(cls)
        obj._setup(depth, {i: v for i, v in coeffs.items() if v}, normalization, p)
        return obj

    def _like(self, c: dict[int, object]) -> "CoefficientSeries":
        obj = CoefficientSeries.__new__(CoefficientSeries)
        obj.depth, obj.normalization, obj.p, obj._c = self.depth, self.normalization, self.p, c
        obj._exp = self._exp
        return obj

    @property
    def exponent(self) -> CarlesonExponent | None:
        """alpha whose weighted norm is meaningful for this basis (None for hp)."""
        return self._exp

    def __getitem__(self, interval: IntervalLike):
        return self._c.get(as_interval(interval).index, 0)

    def items(self) -> Iterator[tuple[DyadicInterval, object]]:
        for a, v in sorted((DyadicInterval.from_index(i).address, v) for i, v in self._c.items()):
            yield DyadicInterval(a), v

    def indexed(self) -> dict[int, object]:
        return dict(self._c)

    def support(self) -> IntervalCollection:
        mask = 0
        for i in self._c:
            mask |= 1 << i
        return IntervalCollection.from_mask(mask, self.depth)

    def is_zero(self) -> bool:
        return not self._c

    def is_exact(self) -> bool:
        return not any(isinstance(v, float) for v in self._c.values())

    def scaled(self, factor) -> "CoefficientSeries":
        return self._like({i: v * factor for i, v in self._c.items() if v * factor})

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoefficientSeries):
            return NotImplemented
        return (
            self.depth == other.depth
            and self.normalization is other.normalization
            and self.p == other.p
            and self._c == other._c
        )

    def __repr__(self) -> str:
        body = ", ".join(f"{str(iv)!r}: {v}" for iv, v in self.items())
        tag = self.normalization.value + (f"(p={self.p})" if self.p is not None else "")
        return f"CoefficientSeries(depth={self.depth}, {tag}, {{{body}}})"


def _exponent_for(x: CoefficientSeries, alpha: ExponentLike | None) -> CarlesonExponent:
    native = x._exp
    if native is None:
        raise NormalizationMismatch("hp series have no weighted (BMO / Lambda) norm")
    if alpha is None or alpha is native:
        return native
    exponent = as_exponent(alpha)
    if exponent is not native:
        raise NormalizationMismatch(
            f"{x.normalization.value} series with p={x.p} pair with alpha={native}, not {exponent}"
        )
    return exponent


def _squares(x: CoefficientSeries) -> list:
    values = [0] * (1 << (x.depth + 1))
    for i, v in x._c.items():
        values[i] = v * v
    return values


def rooted_values(x: CoefficientSeries, alpha: ExponentLike | None = None) -> dict[int, object]:
    """|I|^-alpha * sum_{J subset I} x_J^2 |J|^alpha for every interval I (heap-indexed)."""
    exponent = _exponent_for(x, alpha)
    scale = level_scale(x.depth, exponent)
    u = rooted_sums(_squares(x), x.depth, scale)
    levels = heap_levels(x.depth)
    return {i: scale.finish(u[i] * scale.lift[levels[i]]) for i in range(1, len(u))}


def weighted_norm_sq(x: CoefficientSeries, alpha: ExponentLike | None = None):
    """max over I of |I|^-alpha * sum_{J subset I} x_J^2 |J|^alpha.

    ||x||^2_BMO for alpha = 1, ||f||^2 in Lambda_(1/p - 1) for alpha = 2/p - 1.
    """
    exponent = _exponent_for(x, alpha)
    scale = level_scale(x.depth, exponent)
    if not x._c:
        return scale.finish(0)
    return scale.finish(rooted_max(_squares(x), x.depth, scale))


def bmo_over_collection(x: CoefficientSeries, collection: IntervalCollection):
    """(1/|B*|) sum_{I in B} x_I^2 |I|."""
    if x.normalization is not Normalization.LINF:
        raise NormalizationMismatch("bmo_over_collection expects a linf series")
    if not collection:
        raise EmptyCollection("collection-indexed BMO expression of the empty collection")
    total = sum(x._c.get(i, 0) ** 2 * Fraction(1, 1 << (i.bit_length() - 1)) for i in iter_bits(collection.mask))
    return total / collection.covered_measure()


def _check_depth(x: CoefficientSeries, perm: PermutationMap) -> None:
    if x.depth != perm.depth:
        raise DepthMismatch(f"series depth {x.depth} != permutation depth {perm.depth}")


def permute_coefficients(x: CoefficientSeries, perm: PermutationMap) -> CoefficientSeries:
    """T_pi on coefficients: y_I = x_{pi^-1(I)}."""
    _check_depth(x, perm)
    fwd = perm.forward
    return x._like({fwd[i]: v for i, v in x._c.items()})


def adjoint_permute(c: CoefficientSeries, perm: PermutationMap) -> CoefficientSeries:
    """S_{p,pi} on H^p coefficients: d_I = c_{pi(I)}."""
    _check_depth(c, perm)
    if c.normalization is not Normalization.HP:
        raise NormalizationMismatch("adjoint_permute acts on hp-normalized series")
    inv = perm.inverse
    return c._like({inv[i]: v for i, v in c._c.items()})


def _pairing_p(series: CoefficientSeries):
    if series.normalization is Normalization.LINF:
        return Fraction(1)
    return series.p


def pairing(a: CoefficientSeries, c: CoefficientSeries):
    """<a, c> = sum_I a_I c_I for a in Lambda(p) and c in H^p coordinates."""
    if a.depth != c.depth:
        raise DepthMismatch(f"series depths differ: {a.depth} != {c.depth}")
    if a.normalization is Normalization.HP or c.normalization is not Normalization.HP:
        raise NormalizationMismatch("pairing expects (lambda or linf, hp) series")
    if _pairing_p(a) != c.p:
        raise NormalizationMismatch(f"p differs: {_pairing_p(a)} != {c.p}")
    small, large = (a._c, c._c) if len(a._c) <= len(c._c) else (c._c, a._c)
    return sum((v * large[i] for i, v in small.items() if i in large), 0)


def _exact_sqrt(q: Fraction) -> Fraction | None:
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def hp_norm(c: CoefficientSeries, p=None):
    """L^p norm of the square function (sum_I c_I^2 |I|^(-2/p) 1_I)^(1/2).

    The square function is constant on the 2^(depth+1) cells of the next
    level, so the integral is a finite sum.  Exact when p = 1 and every cell
    value is a rational square, float otherwise.
    """
    p = c.p if p is None else to_fraction(p)
    if p is None:
        raise ValidationError("hp_norm needs p")
    if not 0 < p <= 1:
        raise ValidationError(f"p must lie in (0, 1], got {p}")
    if not c._c:
        return Fraction(0)
    cells_level = c.depth + 1
    ncells = 1 << cells_level
    two_over_p = 2 / p
    exact = c.is_exact() and two_over_p.denominator == 1
    sq = [0] * ncells
    for i, v in c._c.items():
        lev = i.bit_length() - 1
        if exact:
            w = v * v * (1 << (lev * int(two_over_p)))
        else:
            w = float(v) ** 2 * 2.0 ** (lev * float(two_over_p))
        span = cells_level - lev
        first = (i << span) - ncells
        for t in range(first, first + (1 << span)):
            sq[t] += w
    if exact and p == 1:
        roots = [_exact_sqrt(Fraction(s)) for s in sq]
        if all(r is not None for r in roots):
            return sum(roots, Fraction(0)) / ncells
    half_p = float(p) / 2
    integral = math.fsum(float(s) ** half_p for s in sq) / ncells
    return integral ** (1 / float(p))


def indicator_series(collection: IntervalCollection, alpha: ExponentLike = 1) -> CoefficientSeries:
    """sum_{I in B} of the unit vectors for the basis matching alpha."""
    exponent = as_exponent(alpha)
    obj = CoefficientSeries.__new__(CoefficientSeries)
    obj.depth = collection.depth_bound
    obj._c = {i: 1 for i in iter_bits(collection.mask)}
    if exponent.is_bmo:
        obj.normalization, obj.p = Normalization.LINF, None
    else:
        obj.normalization, obj.p = Normalization.LAMBDA, exponent.p
    obj._exp = exponent
    return obj
