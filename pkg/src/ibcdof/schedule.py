"""Round/slot schedules for (truncated) MAT and uMAT.

Users are numbered ``1..K`` and grouped into cells of ``L`` consecutive ids.
``schedule_params`` gives the per-phase counts; ``enumerate_rounds`` expands
them into the concrete list of rounds the simulator plays back.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, List, Optional, Tuple

from . import dofmath
from .exactnum import binomial, lcm_all, reduce


class ScheduleError(ValueError):
    pass


class ConsistencyError(AssertionError):
    """K*b/tau disagrees with the closed-form DoF."""


def cell_of(j: int, L: int) -> int:
    if j < 1 or L < 1:
        raise ValueError(f"invalid user id {j} for L={L}")
    return -(-j // L)


def cells_of(users, L: int) -> Tuple[int, ...]:
    return tuple(sorted({cell_of(j, L) for j in users}))


def alpha_beta(K: int, theta: int) -> Tuple[List[int], List[int]]:
    """Unreduced slot-ratio coefficients ``alpha_p / beta_p`` for ``p = 1..theta``."""
    if not 2 <= theta <= K:
        raise ValueError(f"need 2 <= theta <= K, got theta={theta}, K={K}")
    alpha = [1]
    beta = [1]
    for p in range(2, theta):
        alpha.append(alpha[-1] * (p - 1))
        beta.append(beta[-1] * (K - p + 1))
    # the last phase resolves (theta-1) records per user with no listeners left
    alpha.append((theta - 1) * alpha[-1])
    beta.append(beta[-1])
    return alpha, beta


def lambda_factor(K: int, theta: int) -> int:
    alpha, beta = alpha_beta(K, theta)
    return lcm_all(reduce(a, b)[1] for a, b in zip(alpha[1:-1], beta[1:-1]))


@dataclass(frozen=True)
class SchemeParams:
    L: int
    C: int
    theta: int
    lam: int
    b: int
    R: Tuple[int, ...]
    S: Tuple[int, ...]
    nu: Tuple[int, ...]
    repetitions: bool = True

    @property
    def K(self) -> int:
        return self.L * self.C

    @property
    def tau_p(self) -> Tuple[int, ...]:
        return tuple(r * s for r, s in zip(self.R, self.S))

    @property
    def tau(self) -> int:
        return sum(self.tau_p)

    @property
    def dof(self) -> Fraction:
        return Fraction(self.K * self.b, self.tau)


def schedule_params(L: int, C: int, theta: Optional[int] = None, *,
                    repetitions: bool = True) -> SchemeParams:
    """Per-phase rounds, slots and repetitions for the ``(L, C)`` IBC.

    Parameters
    ----------
    L, C : int
        Users per cell and number of cells.
    theta : int, optional
        Number of phases. Defaults to ``L`` (``K`` when ``C == 1``). Capped at
        ``L`` for ``C >= 2`` when repetitions are used.
    repetitions : bool
        ``False`` drops the uncoupling repetitions, i.e. plain MAT run over
        all ``K`` users (the naive negative control); ``theta <= K`` then.
    """
    if L < 1 or C < 1:
        raise ScheduleError("L and C must be >= 1")
    K = L * C
    uncoupled = repetitions and C >= 2
    if theta is None:
        theta = L if uncoupled else K
    cap = L if uncoupled else K
    if not 1 <= theta <= cap:
        raise ScheduleError(f"theta must lie in 1..{cap}, got {theta}")

    if theta == 1:
        # plain TDMA: every user gets its b = K symbols in K exclusive slots
        return SchemeParams(L, C, 1, 1, K, (K,), (K,), (0,), repetitions)

    alpha, beta = alpha_beta(K, theta)
    lam = lambda_factor(K, theta)
    S = [lam]
    for a, bt in zip(alpha[1:], beta[1:]):
        num, den = reduce(a, bt)
        S.append(num * lam // den)
    nu = [0] * theta
    if uncoupled:
        for p in range(2, theta):
            nu[p - 1] = dofmath.nu_umat(p, L, C)
    R = [binomial(K, p) + nu[p - 1] for p in range(1, theta + 1)]
    return SchemeParams(L, C, theta, lam, K * lam, tuple(R), tuple(S), tuple(nu),
                        repetitions)


def formula_dof(params: SchemeParams) -> Fraction:
    """Closed-form / recursive DoF the schedule must reproduce."""
    if params.C == 1 or not params.repetitions:
        return dofmath.dof_mat_truncated(params.K, params.theta)
    if params.theta == params.L:
        return dofmath.dof_umat(params.L, params.C)
    return dofmath.dof_umat_recursive(params.L, params.C, params.theta)


def consistency_check(params: SchemeParams) -> Fraction:
    achieved = params.dof
    expected = formula_dof(params)
    if achieved != expected:
        raise ConsistencyError(
            f"K*b/tau = {achieved} but formula gives {expected} for "
            f"L={params.L}, C={params.C}, theta={params.theta}")
    return achieved


@dataclass(frozen=True)
class Pass:
    """A stretch of ``slots`` slots during which the BSs in ``bss`` transmit together."""

    bss: Tuple[int, ...]
    slots: int


@dataclass(frozen=True)
class RoundPlan:
    phase: int
    index: int
    served: FrozenSet[int]
    passes: Tuple[Pass, ...]
    repetition_of: Optional[int] = None

    @property
    def group(self) -> Tuple[int, ...]:
        return tuple(sorted(self.served))


def enumerate_rounds(params: SchemeParams) -> List[RoundPlan]:
    """Expand ``params`` into the ordered list of rounds.

    Groups of each phase follow lexicographic order. In an intermediate
    phase of uMAT a group spanning two cells is played twice back to back,
    once per BS. The first and last phases never repeat; in the last phase
    all involved BSs transmit at once. Without repetitions every round is a
    single pass of all involved BSs.
    """
    L, C, K = params.L, params.C, params.K
    if C > 2 and params.repetitions:
        raise ScheduleError("round enumeration is only defined for C <= 2")
    rounds: List[RoundPlan] = []
    for p in range(1, params.theta + 1):
        S_p = params.S[p - 1]
        idx = 0
        for group in itertools.combinations(range(1, K + 1), p):
            served = frozenset(group)
            involved = cells_of(group, L)
            intermediate = 1 < p < params.theta
            if params.repetitions and intermediate and len(involved) > 1:
                base = idx
                for c in involved:
                    rounds.append(RoundPlan(p, idx, served, (Pass((c,), S_p),),
                                            None if idx == base else base))
                    idx += 1
            else:
                rounds.append(RoundPlan(p, idx, served, (Pass(involved, S_p),)))
                idx += 1
        if idx != params.R[p - 1]:
            raise ScheduleError(
                f"phase {p}: enumerated {idx} rounds, expected {params.R[p - 1]}")
    return rounds
