"""Closed-form and recursive DoF expressions, all in exact rationals.

Schemes covered: Cadambe-Jafar IA (``CJ``), MAT and its truncation to
``theta`` phases, the HC scheme for the MISO IC, uMAT for the ``(L, C)``
interference broadcast channel, and the cooperative bound.
"""

from __future__ import annotations

import enum
from functools import lru_cache
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .exactnum import binomial


class Scheme(str, enum.Enum):
    CJ = "CJ"
    MAT = "MAT"
    TMAT = "TMAT"
    HC = "HC"
    UMAT = "uMAT"
    COOP = "Coop"


@dataclass(frozen=True)
class DofValue:
    """A DoF sum tagged with the scheme and parameters that produced it."""

    value: Fraction
    scheme: Scheme
    L: int
    C: int = 1
    theta: Optional[int] = None

    @property
    def K(self) -> int:
        return self.L * self.C


def _harmonic(n: int) -> Fraction:
    return sum((Fraction(1, p) for p in range(1, n + 1)), Fraction(0))


def _require_positive(name: str, value: Fraction) -> None:
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")


def dof_cj(K: int, m: int = 1) -> Fraction:
    if K < 1 or m < 1:
        raise ValueError("K and m must be >= 1")
    return Fraction(K * m, 2)


def dof_mat(K: int) -> Fraction:
    """MAT DoF for the K-user MISO BC: ``K / H_K``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return Fraction(K) / _harmonic(K)


def dof_order_p_mat(K: int, p: int, d_next: Fraction) -> Fraction:
    """Order-``p`` MAT DoF given the order-``p+1`` DoF ``d_next``."""
    if not 1 <= p < K:
        raise ValueError(f"need 1 <= p < K, got p={p}, K={K}")
    d_next = Fraction(d_next)
    _require_positive("d_next", d_next)
    ckp = binomial(K, p)
    return Fraction((K - p + 1) * ckp) / (ckp + p * binomial(K, p + 1) / d_next)


def dof_mat_truncated(K: int, theta: int) -> Fraction:
    """MAT truncated to ``theta`` phases (``d_theta = 1``), chained down to order 1."""
    if not 1 <= theta <= K:
        raise ValueError(f"need 1 <= theta <= K, got theta={theta}, K={K}")
    d = Fraction(1)
    for p in range(theta - 1, 0, -1):
        d = dof_order_p_mat(K, p, d)
    return d


def dof_hc_order2(K: int) -> Fraction:
    if K < 2:
        raise ValueError("HC needs K >= 2")
    s = sum((Fraction(K - l, l * l - 1) for l in range(2, K)), Fraction(0))
    return 1 / (1 - s / (K - 1))


def dof_hc(K: int) -> Fraction:
    """HC DoF: best of the two integer group sizes around ``2 * d2``."""
    d2 = dof_hc_order2(K)
    two_d2 = 2 * d2
    n_lo = two_d2.numerator // two_d2.denominator
    n_hi = -((-two_d2.numerator) // two_d2.denominator)
    return max(Fraction(n * n) / (1 + Fraction(n * (n - 1)) / d2) for n in {n_lo, n_hi})


def composition_weight(p: int, r: int, L: int) -> int:
    """Sum over compositions ``g`` of ``p`` into ``r`` parts of prod ``C(L, g_j)``.

    Equals the ``x**p`` coefficient of ``((1 + x)**L - 1)**r``, which is how
    it is computed; enumerating compositions is far slower for large ``p``.
    """
    if r < 1 or p < r:
        return 0
    base = [binomial(L, k) for k in range(1, min(L, p) + 1)]  # x^1 .. x^min(L,p)
    poly = [1]  # coefficients from x^0
    for _ in range(r):
        nxt = [0] * min(len(poly) + len(base), p + 1)
        for i, a in enumerate(poly):
            if a == 0:
                continue
            for k, c in enumerate(base, start=1):
                if i + k > p:
                    break
                nxt[i + k] += a * c
        poly = nxt
    return poly[p] if p < len(poly) else 0


@lru_cache(maxsize=None)
def nu_umat(p: int, L: int, C: int) -> int:
    """Number of repeated rounds in phase ``p`` of uMAT.

    Zero for the first and last (``p == L``) phases. Otherwise counts, for
    every choice of ``r >= 2`` cells and every way of splitting ``p`` users
    over them with at least one per cell, the resulting user groups.
    """
    if not 1 <= p <= L:
        raise ValueError(f"need 1 <= p <= L, got p={p}, L={L}")
    if p == 1 or p == L:
        return 0
    return sum(binomial(C, r) * composition_weight(p, r, L)
               for r in range(2, min(p, C) + 1))


def dof_order_p_umat(L: int, C: int, p: int, d_next: Fraction) -> Fraction:
    if not 2 <= p <= L - 1:
        raise ValueError(f"need 2 <= p <= L-1, got p={p}, L={L}")
    d_next = Fraction(d_next)
    _require_positive("d_next", d_next)
    K = L * C
    ckp = binomial(K, p)
    return Fraction((K - p + 1) * ckp) / (
        ckp + nu_umat(p, L, C) + p * binomial(K, p + 1) / d_next
    )


@lru_cache(maxsize=None)
def dof_umat(L: int, C: int) -> Fraction:
    """uMAT DoF sum for the ``(L, C)`` MISO IBC, closed form."""
    if L < 1 or C < 1:
        raise ValueError("L and C must be >= 1")
    K = L * C
    den = _harmonic(L) + (C - 1)
    for p in range(2, L):
        den += Fraction(nu_umat(p, L, C), p * binomial(K, p))
    return Fraction(K) / den


def dof_umat_recursive(L: int, C: int, theta: Optional[int] = None) -> Fraction:
    """uMAT DoF by chaining the order-``p`` recursion from ``d_theta = 1``.

    ``theta`` defaults to ``L``. With ``theta < L`` this is the truncated
    scheme; the last phase then carries no repetitions, as for ``theta = L``.
    """
    theta = L if theta is None else theta
    if not 1 <= theta <= L:
        raise ValueError(f"need 1 <= theta <= L, got theta={theta}, L={L}")
    K = L * C
    if theta == 1:
        return Fraction(1)
    d = Fraction(1)
    for p in range(theta - 1, 1, -1):
        ckp = binomial(K, p)
        d = Fraction((K - p + 1) * ckp) / (
            ckp + nu_umat(p, L, C) + p * binomial(K, p + 1) / d
        )
    # order-1 step has no repetitions (one BS active at a time)
    return dof_order_p_mat(K, 1, d)


def kappa(L: int) -> Fraction:
    """Sum over ``p = 2..L-1`` of ``(1/p) prod_{j<p} (L-j)/(2L-j)``."""
    if L < 1:
        raise ValueError("L must be >= 1")
    # prod_{j<p} (L-j)/(2L-j) == C(L, p) / C(2L, p)
    return sum((Fraction(binomial(L, p), p * binomial(2 * L, p)) for p in range(2, L)),
               Fraction(0))


def dof_umat_c2_closed(L: int) -> Fraction:
    """Two-cell uMAT DoF written through ``kappa``."""
    if L < 1:
        raise ValueError("L must be >= 1")
    return Fraction(L) / (_harmonic(L) - Fraction(1, 2 * L) - kappa(L))


def kappa_bound(L: int) -> Fraction:
    """Geometric upper bound on ``kappa``: sum of ``(1/p) 2^-p`` for ``p = 2..L-1``."""
    return sum((Fraction(1, p * 2**p) for p in range(2, L)), Fraction(0))


def gap_epsilon(L: int, C: int) -> Fraction:
    return dof_umat(L, C) - dof_mat(L)


def dof_coop(L: int, C: int) -> Fraction:
    return dof_mat(L * C)


def timeshare(d: Fraction, tau: int, C: int, Q: int) -> Tuple[Fraction, int]:
    """Serve every ``Q``-subset of the ``C`` cells in turn.

    The DoF sum is unchanged and the slot count grows by ``C choose Q``.
    """
    if not 1 <= Q <= C:
        raise ValueError(f"need 1 <= Q <= C, got Q={Q}, C={C}")
    return Fraction(d), tau * binomial(C, Q)
