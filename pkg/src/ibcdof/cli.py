"""Command line entry point: ``ibcdof {dof,schedule,simulate,figures}``.

Exit codes: 0 success (including the expected failure of the naive
variant), 1 usage error, 2 consistency or decodability failure, 3 numeric
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from . import dofmath
from .cmatrix import DEFAULT_TOL_SCALE, NumericError
from .figures import exact_cols, fig3_rows, fig4_rows, fig5_rows
from .schedule import ConsistencyError, ScheduleError, consistency_check, schedule_params
from .simengine import ProtocolError, SimConfig, Variant, simulate

log = logging.getLogger("ibcdof")

EXIT_OK, EXIT_USAGE, EXIT_CONSISTENCY, EXIT_NUMERIC = 0, 1, 2, 3

DOF_SCHEMES = ("MAT", "uMAT", "HC", "Coop", "CJ")
SIM_VARIANTS = {"mat_bc": Variant.MAT_BC, "umat": Variant.UMAT_IBC,
                "naive": Variant.NAIVE_MAT_IBC}


class UsageError(ValueError):
    pass


def parse_range(text: str) -> List[int]:
    """``"3"``, ``"2..5"`` or ``"1,4,7"`` to a list of ints."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            vals = list(range(int(lo), int(hi) + 1))
        else:
            vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None
    if not vals:
        raise UsageError(f"empty range {text!r}")
    return vals


def parse_theta(text: Optional[str]) -> Optional[int]:
    if text is None or text == "max":
        return None
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"--theta must be an integer or 'max', got {text!r}") from None


def _writer(out: Optional[str]):
    if out is None:
        return sys.stdout, False
    return open(out, "w", newline="", encoding="utf-8"), True


def _emit(header, rows, out: Optional[str]) -> None:
    fh, close = _writer(out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if close:
            fh.close()


def dof_rows(schemes: Sequence[str], Ls: Sequence[int], Cs: Sequence[int],
             theta: Optional[int]) -> List[list]:
    rows = []
    for scheme in schemes:
        for L in Ls:
            for C in Cs:
                th = "" if theta is None else theta
                if scheme == "MAT":
                    th = L if theta is None else theta
                    d = dofmath.dof_mat_truncated(L, th)
                elif scheme == "uMAT":
                    th = L if theta is None else theta
                    d = dofmath.dof_umat(L, C) if th == L else \
                        dofmath.dof_umat_recursive(L, C, th)
                elif scheme == "HC":
                    if L * C < 2:
                        raise UsageError("HC needs L*C >= 2")
                    d = dofmath.dof_hc(L * C)
                elif scheme == "Coop":
                    d = dofmath.dof_coop(L, C)
                elif scheme == "CJ":
                    d = dofmath.dof_cj(L * C)
                else:
                    raise UsageError(f"unknown scheme {scheme!r}")
                rows.append([scheme, L, C, th] + exact_cols(d))
    return rows


def cmd_dof(args) -> int:
    schemes = args.scheme.split(",") if args.scheme else ["MAT", "uMAT", "HC", "Coop"]
    for s in schemes:
        if s not in DOF_SCHEMES:
            raise UsageError(f"unknown scheme {s!r}; choose from {','.join(DOF_SCHEMES)}")
    try:
        rows = dof_rows(schemes, parse_range(args.L), parse_range(args.C),
                        parse_theta(args.theta))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(["scheme", "L", "C", "theta", "dof_num", "dof_den", "dof_float"], rows, args.out)
    return EXIT_OK


def schedule_text(L: int, C: int, theta: Optional[int]) -> str:
    params = schedule_params(L, C, theta)
    consistency_check(params)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["L", "C", "theta", "lambda", "b", "tau"])
    w.writerow([L, C, params.theta, params.lam, params.b, params.tau])
    w.writerow(["p", "R_p", "S_p", "nu_p", "tau_p"])
    for p in range(params.theta):
        w.writerow([p + 1, params.R[p], params.S[p], params.nu[p], params.tau_p[p]])
    return buf.getvalue()


def cmd_schedule(args) -> int:
    theta = parse_theta(args.theta)
    try:
        text = "".join(schedule_text(L, C, theta)
                       for L in parse_range(args.L) for C in parse_range(args.C))
    except ScheduleError as exc:
        raise UsageError(str(exc)) from exc
    fh, close = _writer(args.out)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _sim_config(variant: Variant, L: int, C: int, theta, seed: int, tol: float) -> SimConfig:
    if variant is Variant.MAT_BC:
        if C != 1:
            raise UsageError("mat_bc needs --C 1")
        return SimConfig.mat_bc(L, theta, seed, tol_scale=tol)
    if C != 2:
        raise UsageError("IBC simulation is only available for --C 2")
    if variant is Variant.UMAT_IBC:
        return SimConfig.umat_ibc(L, theta, seed, tol_scale=tol)
    return SimConfig.naive_ibc(L, theta, seed, tol_scale=tol)


def cmd_simulate(args) -> int:
    name = args.scheme or "umat"
    if name not in SIM_VARIANTS:
        raise UsageError(f"unknown variant {name!r}; choose from {','.join(SIM_VARIANTS)}")
    variant = SIM_VARIANTS[name]
    seeds = parse_range(args.seeds)
    if len(set(seeds)) != len(seeds):
        raise UsageError("seeds must be distinct")
    theta = parse_theta(args.theta)
    try:
        configs = [_sim_config(variant, L, C, theta, s, args.tol_scale)
                   for L in parse_range(args.L) for C in parse_range(args.C) for s in seeds]
    except ScheduleError as exc:
        raise UsageError(str(exc)) from exc

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(simulate, configs))
    else:
        reports = [simulate(c) for c in configs]

    rows = []
    failed = 0
    for rep in reports:
        for u in rep.users:
            rows.append([rep.L, rep.C, rep.theta, rep.seed, u.user, u.rank_interference,
                         u.rank_joint, u.lcs_recovered, int(u.decodable)])
        ok = rep.all_decodable and rep.csit_audit_clean
        failed += not ok
        print(f"{variant.value} L={rep.L} C={rep.C} theta={rep.theta} seed={rep.seed}: "
              f"achieved DoF {rep.achieved_dof} (target {rep.upper_dof}), "
              f"{'decodable' if rep.all_decodable else 'NOT decodable'}, "
              f"{len(rep.alignment_failures)} alignment failures",
              file=sys.stderr)
    _emit(["L", "C", "theta", "seed", "user", "rank_I", "rank_joint", "lcs", "decodable"],
          rows, args.out)
    if variant is Variant.NAIVE_MAT_IBC:
        return EXIT_OK
    return EXIT_CONSISTENCY if failed else EXIT_OK


def cmd_figures(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in (("fig3.csv", fig3_rows()), ("fig4.csv", fig4_rows()),
                                 ("fig5.csv", fig5_rows())):
        _emit(header, rows, str(out / name))
        log.info("wrote %s (%d rows)", out / name, len(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ibcdof", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, L="2..3", C="2"):
        p.add_argument("--L", default=L, help="users per cell: n, a..b or a,b,c")
        p.add_argument("--C", default=C, help="number of cells")
        p.add_argument("--theta", default="max", help="number of phases or 'max'")
        p.add_argument("--out", help="output file (stdout if omitted)")

    p = sub.add_parser("dof", help="exact DoF table")
    common(p)
    p.add_argument("--scheme", help=f"comma list from {','.join(DOF_SCHEMES)}")
    p.set_defaults(func=cmd_dof)

    p = sub.add_parser("schedule", help="rounds/slots of uMAT (MAT when C=1)")
    common(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("simulate", help="rank-test simulation")
    common(p)
    p.add_argument("--scheme", help=f"one of {','.join(SIM_VARIANTS)} (default umat)")
    p.add_argument("--seeds", default="0..19")
    p.add_argument("--tol-scale", type=float, default=DEFAULT_TOL_SCALE)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("figures", help="write fig3.csv, fig4.csv, fig5.csv")
    p.add_argument("--out", help="output directory (default: current)")
    p.set_defaults(func=cmd_figures)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConsistencyError, ProtocolError) as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
