"""Data series behind the DoF-vs-L, gap and DoF-vs-delay plots.

Each function returns a header and a list of rows ready for ``csv.writer``.
CSG curves are not produced; their DoF expression is not part of this package.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

from . import dofmath
from .exactnum import to_float
from .schedule import schedule_params

Rows = Tuple[List[str], List[list]]


def exact_cols(q: Fraction) -> list:
    return [q.numerator, q.denominator, f"{to_float(q):.12g}"]


def fig3_rows(Ls: Iterable[int] = range(3, 41),
              umat_C: Sequence[int] = (2, 3, 4, 5),
              coop_C: Sequence[int] = (2, 3),
              hc_C: Sequence[int] = (2, 3, 5)) -> Rows:
    header = ["series", "L", "C", "dof_num", "dof_den", "dof_float"]
    rows = []
    for L in Ls:
        rows.append(["MAT", L, 1] + exact_cols(dofmath.dof_mat(L)))
        for C in umat_C:
            rows.append(["uMAT", L, C] + exact_cols(dofmath.dof_umat(L, C)))
        for C in coop_C:
            rows.append(["Coop", L, C] + exact_cols(dofmath.dof_coop(L, C)))
        for C in hc_C:
            rows.append(["HC", L, C] + exact_cols(dofmath.dof_hc(L * C)))
    return header, rows


def fig4_rows(Ls: Iterable[int] = range(2, 41), Cs: Sequence[int] = (2, 3, 4, 5)) -> Rows:
    header = ["L", "C", "eps_num", "eps_den", "eps_float"]
    rows = []
    for C in Cs:
        for L in Ls:
            rows.append([L, C] + exact_cols(dofmath.gap_epsilon(L, C)))
    return header, rows


def fig5_rows(Ls: Sequence[int] = (2, 4, 6), Cs: Sequence[int] = (1, 2, 3, 4)) -> Rows:
    """(tau, DoF) points sweeping the number of phases.

    A scheme designed for ``Q`` cells is embedded into ``C`` cells by time
    sharing, which multiplies ``tau`` by ``C choose Q``. MAT is the ``Q = 1``
    case. HC is absent because its slot count is not specified.
    """
    header = ["series", "L", "C", "Q", "theta", "tau", "dof_num", "dof_den", "dof_float"]
    rows = []
    for L in Ls:
        for C in Cs:
            for Q in range(1, C + 1):
                series = "MAT" if Q == 1 else "uMAT"
                for theta in range(1, L + 1):
                    params = schedule_params(L, Q, theta)
                    d, tau = dofmath.timeshare(params.dof, params.tau, C, Q)
                    rows.append([series, L, C, Q, theta, tau] + exact_cols(d))
    return header, rows
