"""Acceptance criteria, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py``; the terminal summary carries
one PASS/FAIL line per criterion. Criteria that fail are reported, not
relaxed.
"""

import math
import time
from fractions import Fraction as F

import pytest

from ibcdof import dofmath as dm
from ibcdof.exactnum import binomial
from ibcdof.figures import fig3_rows, fig4_rows
from ibcdof.schedule import schedule_params
from ibcdof.simengine import (SimConfig, build_phase_p_precoders, CsitAuditError,
                              naive_mat_on_ibc, simulate)

SEEDS = range(20)
TOL_SCALE = 1e3


def cold():
    """Drop memoised DoF values so runtime checks measure real work."""
    dm.dof_umat.cache_clear()
    dm.nu_umat.cache_clear()


# --- 1 ----------------------------------------------------------------------

@pytest.mark.criterion("AC1", "6-user 3-phase fixture exact, < 1 ms")
def test_ac1_exact_fixture():
    t0 = time.perf_counter()
    p = schedule_params(6, 1, 3)
    d = dm.dof_mat_truncated(6, 3)
    elapsed = time.perf_counter() - t0
    assert p.R == (6, 15, 20)
    assert p.S == (5, 1, 2)
    assert p.tau_p == (30, 15, 40)
    assert p.tau == 85 and p.b == 30
    assert d == F(36, 17) and p.dof == d
    assert elapsed < 1e-3, f"{elapsed * 1e3:.3f} ms"


# --- 2 ----------------------------------------------------------------------

@pytest.mark.criterion("AC2", "recursion = closed form = K*b/tau for L<=12, C<=5, < 1 s")
def test_ac2_three_way_identity():
    cold()
    t0 = time.perf_counter()
    mismatches = []
    for L in range(1, 13):
        for C in range(1, 6):
            rec = dm.dof_umat_recursive(L, C)
            closed = dm.dof_umat(L, C)
            sched = schedule_params(L, C).dof
            if not rec == closed == sched:
                mismatches.append((L, C, rec, closed, sched))
    elapsed = time.perf_counter() - t0
    assert not mismatches
    assert elapsed < 1.0


# --- 3 ----------------------------------------------------------------------

@pytest.mark.criterion("AC3", "two-cell closed form equals uMAT for L=1..40, < 1 s")
def test_ac3_two_cell_closed_form():
    cold()
    t0 = time.perf_counter()
    bad = [(L, dm.dof_umat(L, 2), dm.dof_umat_c2_closed(L)) for L in range(1, 41)
           if dm.dof_umat(L, 2) != dm.dof_umat_c2_closed(L)]
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    assert not bad, f"(L, uMAT, closed form) mismatches: {bad}"


@pytest.mark.criterion("AC3", "nu(p, L, 2) = C(2L, p) - 2 C(L, p) for L <= 30, < 1 s")
def test_ac3_two_cell_nu_identity():
    cold()
    t0 = time.perf_counter()
    bad = [(p, L) for L in range(1, 31) for p in range(2, L)
           if dm.nu_umat(p, L, 2) != binomial(2 * L, p) - 2 * binomial(L, p)]
    assert time.perf_counter() - t0 < 1.0
    assert not bad


# --- 4 and 6 share the positive runs -----------------------------------------

POSITIVE = [
    ("MAT_BC K=6 theta=3", lambda s: SimConfig.mat_bc(6, 3, s, tol_scale=TOL_SCALE),
     30, 85, (55, 85), F(36, 17)),
    ("UMAT_IBC (2,2)", lambda s: SimConfig.umat_ibc(2, None, s, tol_scale=TOL_SCALE),
     4, 10, None, F(8, 5)),
    ("UMAT_IBC (3,2)", lambda s: SimConfig.umat_ibc(3, None, s, tol_scale=TOL_SCALE),
     30, 94, None, F(90, 47)),
]


@pytest.fixture(scope="module")
def positive_runs():
    t0 = time.perf_counter()
    runs = {name: [simulate(make(s)) for s in SEEDS] for name, make, *_ in POSITIVE}
    return runs, time.perf_counter() - t0


@pytest.mark.criterion("AC4", "positive simulations decode on all 20 seeds")
def test_ac4_positive_simulations(positive_runs):
    runs, elapsed = positive_runs
    failures = []
    for name, _, lcs, tau, ranks, dof in POSITIVE:
        for rep in runs[name]:
            ok = rep.tau == tau and rep.achieved_dof == dof and all(
                u.lcs_recovered == lcs and u.decodable for u in rep.users)
            if ranks is not None:
                ok &= all((u.rank_interference, u.rank_joint) == ranks for u in rep.users)
            if not ok:
                failures.append((name, rep.seed))
    assert not failures
    assert elapsed < 60


@pytest.mark.criterion("AC5", "naive MAT on the IBC fails on all 20 seeds")
def test_ac5_naive_negative():
    t0 = time.perf_counter()
    survivors = []
    for s in SEEDS:
        rep = naive_mat_on_ibc(SimConfig.naive_ibc(3, 3, s, tol_scale=TOL_SCALE))
        failed_decode = not rep.all_decodable
        phase3_misaligned = any(a[0] == 3 for a in rep.alignment_failures)
        if not (failed_decode and phase3_misaligned):
            survivors.append(s)
    assert not survivors
    assert time.perf_counter() - t0 < 60


@pytest.mark.criterion("AC6", "positive runs audit clean; injected current-phase read trips, < 1 s")
def test_ac6_csit_audit(positive_runs):
    runs, _ = positive_runs
    assert all(rep.csit_audit_clean for reps in runs.values() for rep in reps)

    def peeking_builder(rnd, store, ledger, channels, rng, config, pending):
        t_now = int((channels.phase_of_slot == rnd.phase).argmax())
        ledger.tx_channel(channels, t_now, 1, 1, requester="peek")
        return build_phase_p_precoders(rnd, store, ledger, channels, rng, config, pending)

    t0 = time.perf_counter()
    with pytest.raises(CsitAuditError):
        simulate(SimConfig.umat_ibc(2, seed=0), builder=peeking_builder)
    assert time.perf_counter() - t0 < 1.0


# --- 7 ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def figure_data():
    cold()
    t0 = time.perf_counter()
    _, f3 = fig3_rows()
    _, f4 = fig4_rows()
    return f3, f4, time.perf_counter() - t0


def series(rows, name):
    return {(r[1], r[2]): F(r[3], r[4]) for r in rows if r[0] == name}


@pytest.mark.criterion("AC7", "uMAT > MAT for L=3..40, C=2..5")
def test_ac7_umat_beats_mat(figure_data):
    f3, _, elapsed = figure_data
    mat, umat = series(f3, "MAT"), series(f3, "uMAT")
    assert all(umat[(L, C)] > mat[(L, 1)] for (L, C) in umat)
    assert len(umat) == 38 * 4
    assert elapsed < 5.0


@pytest.mark.criterion("AC7", "Coop >= uMAT everywhere")
def test_ac7_coop_dominates():
    cold()
    t0 = time.perf_counter()
    assert all(dm.dof_coop(L, C) >= dm.dof_umat(L, C) for L in range(1, 41) for C in range(1, 6))
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.criterion("AC7", "HC crossovers at L=3 (C=3,5) and L>=4 (C=2)")
def test_ac7_hc_crossover(figure_data):
    f3, _, _ = figure_data
    hc, umat = series(f3, "HC"), series(f3, "uMAT")
    assert hc[(3, 3)] > umat[(3, 3)] and hc[(3, 5)] > umat[(3, 5)]
    assert hc[(3, 3)] == dm.dof_hc(9) and hc[(3, 5)] == dm.dof_hc(15)
    assert all(umat[(L, 2)] > hc[(L, 2)] for L in range(4, 41))


@pytest.mark.criterion("AC7", "gap strictly increasing in L for each C (fig4 data, L=2..40)")
def test_ac7_gap_increasing(figure_data):
    _, f4, _ = figure_data
    bad = []
    for C in (2, 3, 4, 5):
        pts = sorted((r[0], F(r[2], r[3])) for r in f4 if r[1] == C)
        bad += [(C, L1, L2) for (L1, g1), (L2, g2) in zip(pts, pts[1:]) if not g1 < g2]
    assert not bad, f"non-increasing steps (C, L, L+1): {bad}"


# --- 8 ----------------------------------------------------------------------

@pytest.mark.criterion("AC8", "kappa <= geometric bound for L<=200; L*kappa/log(L)^2 increasing on 10..200, < 1 s")
def test_ac8_kappa_bound():
    t0 = time.perf_counter()
    kappas = {L: dm.kappa(L) for L in range(1, 201)}
    assert all(kappas[L] <= dm.kappa_bound(L) for L in kappas)
    probe = [L * float(kappas[L]) / math.log(L) ** 2 for L in range(10, 201)]
    assert all(a < b for a, b in zip(probe, probe[1:]))
    assert time.perf_counter() - t0 < 1.0
