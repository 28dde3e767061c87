"""Exact integer/rational helpers shared by the DoF formulas.

``BigRational`` is :class:`fractions.Fraction`; Python integers are already
arbitrary precision, so nothing here ever rounds.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce as _fold
from typing import Iterable, List, Tuple

BigRational = Fraction

Composition = Tuple[int, ...]


def reduce(a: int, b: int) -> Tuple[int, int]:
    """Return ``a/b`` in lowest terms as an ``(numerator, denominator)`` pair."""
    if b == 0:
        raise ValueError("zero denominator")
    if b < 0:
        a, b = -a, -b
    g = math.gcd(a, b)
    return a // g, b // g


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient; 0 when ``k > n``."""
    if n < 0 or k < 0:
        raise ValueError("binomial arguments must be non-negative")
    return math.comb(n, k)


def lcm_all(values: Iterable[int]) -> int:
    """Least common multiple of positive integers (1 for an empty list)."""
    vals = list(values)
    if any(v < 1 for v in vals):
        raise ValueError("lcm_all expects positive integers")
    return _fold(math.lcm, vals, 1)


def compositions(p: int, r: int) -> List[Composition]:
    """All ordered ``r``-tuples of positive integers summing to ``p``.

    Tuples come out in lexicographic order, e.g. ``compositions(3, 2)`` is
    ``[(1, 2), (2, 1)]``. Returns an empty list when ``r > p`` or either
    argument is non-positive.
    """
    if r < 1 or p < r:
        return []
    if r == 1:
        return [(p,)]
    out: List[Composition] = []
    # first part ranges so that the remaining r-1 parts are each >= 1
    for first in range(1, p - r + 2):
        for rest in compositions(p - first, r - 1):
            out.append((first,) + rest)
    return out


def to_float(q: Fraction) -> float:
    """Float view of an exact rational, only for CSV output."""
    return q.numerator / q.denominator
