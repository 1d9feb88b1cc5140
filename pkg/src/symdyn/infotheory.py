"""Entropies, mutual information and exact comparisons against powers of two.

Logarithms of exact rationals are evaluated with mpmath at a working
precision that leaves at least 128 correct fractional bits.
"""

from __future__ import annotations

from fractions import Fraction
from math import floor
from typing import Iterable

import mpmath

FRACTION_BITS = 128


def log2_frac(x: Fraction, bits: int = FRACTION_BITS) -> mpmath.mpf:
    """log2 of a positive rational, good to ``bits`` fractional bits."""
    if x <= 0:
        raise ValueError("log2 of a nonpositive number")
    with mpmath.workprec(bits + 64):
        return mpmath.log(mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator), 2)


def floor_pow2(exponent: Fraction) -> int:
    """Exact ``floor(2**exponent)`` for a nonnegative rational exponent."""
    exponent = Fraction(exponent)
    if exponent < 0:
        raise ValueError("negative exponent")
    whole = floor(exponent)
    if exponent == whole:
        return 1 << whole
    p, q = exponent.numerator, exponent.denominator
    with mpmath.workprec(whole + 64):
        guess = int(mpmath.floor(mpmath.power(2, mpmath.mpf(p) / q)))
    target = 1 << p
    while guess ** q > target:
        guess -= 1
    while (guess + 1) ** q <= target:
        guess += 1
    return guess


def exceeds_pow2(length: Fraction, exponent: Fraction) -> bool:
    """Exact test of ``length > 2**(-exponent)``."""
    exponent = Fraction(exponent)
    p, q = exponent.numerator, exponent.denominator
    if q <= 64:
        # length**q * 2**p > 1
        return length.numerator ** q << p > length.denominator ** q if p >= 0 else (
            length.numerator ** q > length.denominator ** q << -p)
    value = log2_frac(length) + mpmath.mpf(p) / q
    if abs(value) > mpmath.ldexp(1, -64):
        return value > 0
    return length.numerator ** q << p > length.denominator ** q


def entropy(p: Iterable[Fraction]) -> mpmath.mpf:
    """Shannon entropy in bits."""
    with mpmath.workprec(FRACTION_BITS + 64):
        return -mpmath.fsum(log2_frac(v) * v.numerator / mpmath.mpf(v.denominator)
                            for v in map(Fraction, p) if v > 0)


def mutual_information(joint) -> mpmath.mpf:
    """I(X;Y) in bits for a 2-D table of exact probabilities."""
    rows = [[Fraction(v) for v in row] for row in joint]
    p_x = [sum(row) for row in rows]
    p_y = [sum(col) for col in zip(*rows)]
    flat = [v for row in rows for v in row]
    with mpmath.workprec(FRACTION_BITS + 64):
        return entropy(p_x) + entropy(p_y) - entropy(flat)


def binary_entropy(d: Fraction) -> mpmath.mpf:
    d = Fraction(d)
    return entropy([d, 1 - d])
