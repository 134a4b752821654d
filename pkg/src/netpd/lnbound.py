"""Certified dyadic enclosures of natural logarithms and exact dyadic rounding.

Everything is integer/rational arithmetic.  ``ln x`` is split as
``e*ln 2 + 2*atanh(t)`` with ``x = 2**e * y``, ``y`` in ``[1, 2)`` and
``t = (y - 1)/(y + 1) < 1/3``; every series term is rounded outward to the
working grid and the tail is bounded by ``t**(2n+1) / ((2n+1)(1 - t**2))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor

MAX_BITS = 1 << 16


@dataclass(frozen=True)
class LnInterval:
    lo: Fraction
    hi: Fraction
    argument: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, value) -> bool:
        return self.lo <= value <= self.hi


def _atanh_scaled(t: Fraction, prec: int) -> tuple[int, int]:
    """Integers ``(lo, hi)`` with ``lo/2**prec <= atanh(t) <= hi/2**prec`` for ``0 <= t < 1``."""
    if t == 0:
        return 0, 0
    scale = 1 << prec
    t2 = t * t
    power = t  # t**(2n+1)
    lo = hi = 0
    n = 0
    while True:
        term = power * scale / (2 * n + 1)
        lo += floor(term)
        hi += ceil(term)
        n += 1
        power *= t2
        tail = power * scale / ((2 * n + 1) * (1 - t2))
        if tail < 1:
            return lo, hi + 1


@lru_cache(maxsize=64)
def _ln2_scaled(prec: int) -> tuple[int, int]:
    lo, hi = _atanh_scaled(Fraction(1, 3), prec)
    return 2 * lo, 2 * hi


def _split(x: Fraction) -> tuple[int, Fraction]:
    e = x.numerator.bit_length() - x.denominator.bit_length()
    y = x / Fraction(2) ** e
    if y < 1:
        e -= 1
        y *= 2
    elif y >= 2:
        e += 1
        y /= 2
    return e, y


def ln_interval(x, bits: int) -> LnInterval:
    """Enclosure of ``ln x`` with dyadic endpoints and width at most ``2**-bits``."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("logarithm of a non-positive number")
    if x == 1:
        return LnInterval(Fraction(0), Fraction(0), x)
    e, y = _split(x)
    t = (y - 1) / (y + 1)
    prec = bits + abs(e).bit_length() + 8
    while True:
        a_lo, a_hi = _atanh_scaled(t, prec)
        l_lo, l_hi = _ln2_scaled(prec)
        if e >= 0:
            lo, hi = e * l_lo + 2 * a_lo, e * l_hi + 2 * a_hi
        else:
            lo, hi = e * l_hi + 2 * a_lo, e * l_lo + 2 * a_hi
        if hi - lo <= 1 << (prec - bits):
            return LnInterval(Fraction(lo, 1 << prec), Fraction(hi, 1 << prec), x)
        prec += 8


def grid_cell(lo, hi, H: int, direction: str) -> Fraction | None:
    """Round an enclosed real to the grid ``2**-H`` if the enclosure decides it.

    ``direction`` is ``"floor"`` or ``"ceil"``.  Returns ``None`` when ``[lo, hi]``
    straddles a grid point in a way that leaves the answer ambiguous.
    """
    scale = 1 << H
    if direction == "floor":
        a, b = floor(Fraction(lo) * scale), floor(Fraction(hi) * scale)
    elif direction == "ceil":
        a, b = ceil(Fraction(lo) * scale), ceil(Fraction(hi) * scale)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return Fraction(a, scale) if a == b else None


def dyadic_round(c, v, H: int, direction: str) -> Fraction:
    """``floor_H`` or ``ceil_H`` of ``c - ln v`` for rational ``c`` and ``v > 0``.

    For ``v != 1`` the value is irrational, so refining the enclosure always
    settles the grid cell eventually.
    """
    c, v = Fraction(c), Fraction(v)
    if v == 1:
        cell = grid_cell(c, c, H, direction)
        assert cell is not None
        return cell
    bits = H + 8
    while bits <= MAX_BITS:
        ln = ln_interval(v, bits)
        cell = grid_cell(c - ln.hi, c - ln.lo, H, direction)
        if cell is not None:
            return cell
        bits += 32
    raise ArithmeticError("rounding did not resolve; is the value rational?")


def compare_ln(x, value) -> int:
    """Sign of ``ln x - value`` for rational ``x`` and ``value``, decided exactly."""
    x, value = Fraction(x), Fraction(value)
    if x == 1:
        return (0 > value) - (0 < value)
    bits = 16
    while bits <= MAX_BITS:
        ln = ln_interval(x, bits)
        if ln.lo > value:
            return 1
        if ln.hi < value:
            return -1
        bits *= 2
    raise ArithmeticError("comparison did not resolve")
