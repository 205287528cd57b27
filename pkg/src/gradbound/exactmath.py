"""Exact integer/rational helpers shared across the package.

Everything here is branch-for-branch exact: primality by trial division
(moduli in this package are small), rational square-root comparisons done on
integers, and helpers for turning nonnegative rationals into floats through a
single final square root.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]


def is_prime(q: int) -> bool:
    """Trial-division primality test (intended for small moduli)."""
    if q < 2:
        return False
    if q < 4:
        return True
    if q % 2 == 0:
        return False
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def frac_sqrt_float(x: Rational) -> float:
    """sqrt of a nonnegative rational, via exact integer isqrt then one division.

    Computes sqrt(num)/sqrt(den) with math.sqrt on integers; for the integer
    magnitudes used here (numerators below ~2**200 reduced first through
    Fraction normalization) this is accurate to float precision because
    math.sqrt of a Python int is correctly rounded after float conversion of
    a value that may itself exceed 2**53 -- so go through isqrt refinement.
    """
    f = Fraction(x)
    if f < 0:
        raise ValueError(f"square root of negative rational {f}")
    if f == 0:
        return 0.0
    num, den = f.numerator, f.denominator
    # Scale so integer sqrt retains ~30 digits beyond the point, then divide.
    shift = 10 ** 40
    s = math.isqrt(num * shift * shift // den)
    return s / shift


def le_sqrt_sum(v: Rational, a: Rational, b: Rational) -> bool:
    """Decide v <= sqrt(a) + sqrt(b) exactly on rationals (a, b >= 0).

    Used for soundness checks of the form variance <= sqrt(A) + sqrt(B)
    without introducing floating-point error into the verdict.
    """
    v = Fraction(v)
    a = Fraction(a)
    b = Fraction(b)
    if a < 0 or b < 0:
        raise ValueError("le_sqrt_sum requires nonnegative radicands")
    if v <= 0:
        return True
    # v > 0 from here.  v <= sqrt(a)+sqrt(b)  <=>  (v - sqrt(a)) <= sqrt(b).
    if v * v <= a:
        return True  # v <= sqrt(a) already
    # Now v > sqrt(a) >= 0, so square: v^2 - 2 v sqrt(a) + a <= b
    #  <=>  v^2 + a - b <= 2 v sqrt(a).
    lhs = v * v + a - b
    if lhs <= 0:
        return True
    # Both sides positive: square again.
    return lhs * lhs <= 4 * v * v * a


def le_scaled_sqrt(v: Rational, c: Rational, r: Rational) -> bool:
    """Decide v <= c * sqrt(r) exactly on rationals (c, r >= 0)."""
    v = Fraction(v)
    c = Fraction(c)
    r = Fraction(r)
    if c < 0 or r < 0:
        raise ValueError("le_scaled_sqrt requires nonnegative c and r")
    if v <= 0:
        return True
    return v * v <= c * c * r


def rank2_mod_q(x: tuple[int, ...], y: tuple[int, ...], q: int) -> int:
    """Rank over Z_q (q prime) of the 2 x n matrix with rows x and y.

    Gaussian elimination with modular inverses; returns 0, 1, or 2.
    """
    n = len(x)
    if len(y) != n:
        raise ValueError("rank2_mod_q requires equal-length vectors")
    a = [v % q for v in x]
    b = [v % q for v in y]
    # Find pivot for the first row.
    piv = next((j for j in range(n) if a[j]), None)
    if piv is None:
        a, b = b, a
        piv = next((j for j in range(n) if a[j]), None)
        if piv is None:
            return 0
        # One zero row eliminated; only the (former) second row can add rank.
        return 1
    inv = pow(a[piv], q - 2, q)
    factor = (b[piv] * inv) % q
    for j in range(n):
        b[j] = (b[j] - factor * a[j]) % q
    return 2 if any(b) else 1


def collinearity_scalar(x: tuple[int, ...], y: tuple[int, ...], q: int) -> int | None:
    """Return lam in Z_q* with y = lam * x (mod q), or None if not collinear.

    Requires x != 0 mod q.  y = 0 is reported as not collinear (lam would be 0,
    outside Z_q*).
    """
    piv = next((j for j in range(len(x)) if x[j] % q), None)
    if piv is None:
        raise ValueError("collinearity_scalar requires x nonzero mod q")
    lam = (y[piv] * pow(x[piv] % q, q - 2, q)) % q
    if lam == 0:
        return None
    for xj, yj in zip(x, y):
        if (yj - lam * xj) % q:
            return None
    return lam
