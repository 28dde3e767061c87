"""Noise-free playback of MAT / uMAT over random channels, with rank-based decoding.

Every user ``j`` accumulates a signal space matrix ``Omega_j`` (one row per
slot, ``K*b`` columns: the stacked symbol vectors of all users). User ``j``
can zero-force its interference and keep ``b`` clean combinations exactly
when ``rank(Omega_j) - rank(Omega_j[:, interference]) == b``.

Transmitter-side precoder builders only see overheard interference (OHI)
rebuilt from channels of earlier phases; :class:`CsitLedger` enforces this.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .cmatrix import (DEFAULT_TOL_SCALE, complex_gaussian, numerical_rank,
                      rowspan_contained)
from .schedule import (RoundPlan, SchemeParams, cell_of, enumerate_rounds,
                       schedule_params)

# independent named random streams derived from one seed
STREAM_CHANNELS = 0
STREAM_CODEBOOK = 1
STREAM_COMBINERS = 2


class Variant(str, enum.Enum):
    MAT_BC = "MAT_BC"
    UMAT_IBC = "UMAT_IBC"
    NAIVE_MAT_IBC = "NAIVE_MAT_IBC"


class CsitAuditError(RuntimeError):
    """A transmitter-side builder touched a channel it cannot know yet."""


class ProtocolError(RuntimeError):
    """The OHI inventory does not match what the schedule requires."""


def _stream(seed: int, name: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, name])


@dataclass(frozen=True)
class SimConfig:
    """What to simulate.

    ``antennas`` is the number of transmit antennas at every BS and
    defaults to ``K``. With fewer than ``K`` antennas the first phase cannot
    deliver ``b`` independent observations of a user's symbols, so decoding
    fails by construction (see ``tests/test_simengine.py``).
    """

    params: SchemeParams
    variant: Variant
    seed: int = 0
    tol_scale: float = DEFAULT_TOL_SCALE
    antennas: Optional[int] = None

    def __post_init__(self):
        p = self.params
        if self.variant is Variant.MAT_BC and p.C != 1:
            raise ValueError("MAT_BC needs C = 1")
        if self.variant is Variant.UMAT_IBC and (p.C != 2 or not p.repetitions):
            raise ValueError("UMAT_IBC needs C = 2 with repetitions")
        if self.variant is Variant.NAIVE_MAT_IBC and (p.C != 2 or p.repetitions):
            raise ValueError("NAIVE_MAT_IBC needs C = 2 without repetitions")
        if self.antennas is not None and self.antennas < 1:
            raise ValueError("antennas must be >= 1")

    @property
    def n_antennas(self) -> int:
        return self.params.K if self.antennas is None else self.antennas

    @classmethod
    def mat_bc(cls, K: int, theta: Optional[int] = None, seed: int = 0, **kw) -> "SimConfig":
        return cls(schedule_params(K, 1, theta), Variant.MAT_BC, seed, **kw)

    @classmethod
    def umat_ibc(cls, L: int, theta: Optional[int] = None, seed: int = 0, **kw) -> "SimConfig":
        return cls(schedule_params(L, 2, theta), Variant.UMAT_IBC, seed, **kw)

    @classmethod
    def naive_ibc(cls, L: int, theta: Optional[int] = None, seed: int = 0, **kw) -> "SimConfig":
        params = schedule_params(L, 2, L if theta is None else theta, repetitions=False)
        return cls(params, Variant.NAIVE_MAT_IBC, seed, **kw)


@dataclass
class ChannelSet:
    """Per-slot channel rows ``h[t, rx, tx]`` (0-based slot, 1-based ids)."""

    h: np.ndarray  # shape (tau, K, C, N)
    phase_of_slot: np.ndarray

    def row(self, t: int, rx: int, tx: int) -> np.ndarray:
        return self.h[t, rx - 1, tx - 1]

    @property
    def tau(self) -> int:
        return self.h.shape[0]


def slot_phases(params: SchemeParams) -> np.ndarray:
    return np.repeat(np.arange(1, params.theta + 1), params.tau_p)


def generate_channels(config: SimConfig) -> ChannelSet:
    p = config.params
    rng = _stream(config.seed, STREAM_CHANNELS)
    h = complex_gaussian(rng, (p.tau, p.K, p.C, config.n_antennas))
    return ChannelSet(h, slot_phases(p))


@dataclass
class CsitLedger:
    """Tracks which channels transmitter-side code reads during each phase."""

    phase_of_slot: np.ndarray
    current_phase: int = 1
    log: List[Tuple[str, int]] = field(default_factory=list)
    violations: List[Tuple[str, int, int]] = field(default_factory=list)

    def begin_phase(self, p: int) -> None:
        self.current_phase = p

    def tx_channel(self, channels: ChannelSet, t: int, rx: int, tx: int,
                   requester: str = "tx") -> np.ndarray:
        phase = int(self.phase_of_slot[t])
        self.log.append((requester, phase))
        if phase >= self.current_phase:
            self.violations.append((requester, phase, self.current_phase))
            raise CsitAuditError(
                f"{requester} read a phase-{phase} channel while building phase "
                f"{self.current_phase}")
        return channels.row(t, rx, tx)

    @property
    def clean(self) -> bool:
        return not self.violations


@dataclass
class OhiRecord:
    """One slot of overheard interference kept for later retransmission."""

    observer: int
    source_cell: Optional[int]  # None: several BSs were active (coupled)
    desired_by: FrozenSet[int]
    row: np.ndarray
    provenance: Tuple[int, int, int, int]  # (phase, round, pass, slot)
    segments: Tuple[Tuple[int, np.ndarray], ...] = ()
    consumed: bool = False

    def support_cells(self, L: int, b: int) -> Tuple[int, ...]:
        users = np.nonzero(np.abs(self.row.reshape(-1, b)).max(axis=1))[0] + 1
        return tuple(sorted({cell_of(int(u), L) for u in users}))


class OhiStore:
    def __init__(self):
        self._by_key: Dict[Tuple[int, FrozenSet[int]], List[OhiRecord]] = defaultdict(list)

    def add(self, rec: OhiRecord) -> None:
        self._by_key[(rec.observer, rec.desired_by)].append(rec)

    def take(self, observer: int, desired_by: FrozenSet[int]) -> List[OhiRecord]:
        recs = [r for r in self._by_key.get((observer, desired_by), []) if not r.consumed]
        for r in recs:
            r.consumed = True
        return sorted(recs, key=lambda r: r.provenance)

    def records(self) -> List[OhiRecord]:
        return [r for recs in self._by_key.values() for r in recs]


class SsmAccumulator:
    """Growing ``Omega_j`` for every user, with a tag per row."""

    def __init__(self, K: int, b: int):
        self.K = K
        self.b = b
        self._rows: Dict[int, List[np.ndarray]] = {j: [] for j in range(1, K + 1)}
        self._tags: Dict[int, List[Tuple[int, int]]] = {j: [] for j in range(1, K + 1)}

    def append(self, j: int, row: np.ndarray, tag: Tuple[int, int]) -> None:
        self._rows[j].append(row)
        self._tags[j].append(tag)

    def matrix(self, j: int) -> np.ndarray:
        rows = self._rows[j]
        if not rows:
            return np.zeros((0, self.K * self.b), dtype=complex)
        return np.vstack(rows)

    def tags(self, j: int) -> List[Tuple[int, int]]:
        return list(self._tags[j])

    def desired_cols(self, j: int) -> np.ndarray:
        return np.arange((j - 1) * self.b, j * self.b)

    def interference_cols(self, j: int) -> np.ndarray:
        cols = np.ones(self.K * self.b, dtype=bool)
        cols[self.desired_cols(j)] = False
        return np.nonzero(cols)[0]


@dataclass
class PassPrecoder:
    """Stacked per-slot transmit maps of one pass: ``P[c]`` is ``(N*S, K*b)``."""

    bss: Tuple[int, ...]
    slots: int
    P: Dict[int, np.ndarray]
    consumed: List[OhiRecord] = field(default_factory=list)


def _unit_columns(m: np.ndarray) -> np.ndarray:
    return m / np.linalg.norm(m, axis=0, keepdims=True)


def build_phase1_precoders(params: SchemeParams, n_antennas: int,
                           codebook_seed: int) -> Dict[int, np.ndarray]:
    """Codebook precoders ``V_r`` of shape ``(N*S_1, b)``, one per user."""
    rng = _stream(codebook_seed, STREAM_CODEBOOK)
    S1 = params.S[0]
    return {r: _unit_columns(complex_gaussian(rng, (n_antennas * S1, params.b)))
            for r in range(1, params.K + 1)}


def phase1_pass(rnd: RoundPlan, V: Dict[int, np.ndarray], params: SchemeParams) -> PassPrecoder:
    (r,) = rnd.group
    (ps,) = rnd.passes
    (c,) = ps.bss
    b = params.b
    P = np.zeros((V[r].shape[0], params.K * b), dtype=complex)
    P[:, (r - 1) * b:r * b] = V[r]
    return PassPrecoder(ps.bss, ps.slots, {c: P})


class _Pending:
    """OHI taken for a served group, handed out pass by pass.

    A group split into one round per BS takes its records once; each round
    then picks up the share of its own BS.
    """

    def __init__(self):
        self._left: Dict[Tuple[int, FrozenSet[int]], Dict[Optional[int], List[OhiRecord]]] = {}

    def get(self, key, loader):
        if key not in self._left:
            self._left[key] = loader()
        return self._left[key]

    def done(self, key) -> None:
        if key in self._left and not any(self._left[key].values()):
            del self._left[key]

    def leftover(self) -> int:
        return sum(len(v) for d in self._left.values() for v in d.values())


def build_phase_p_precoders(rnd: RoundPlan, store: OhiStore, ledger: CsitLedger,
                            channels: ChannelSet, rng: np.random.Generator,
                            config: SimConfig, pending: _Pending) -> List[PassPrecoder]:
    """Order-``p`` transmission for one round, built from earlier-phase OHI.

    For every ``(p-1)``-subset ``T`` of the served group, all records desired
    by ``T`` and overheard by the remaining user are retransmitted, each with
    its own random combining vector. A record is sent by the BS whose signal
    produced it; coupled records (naive variant only) are split by cell and
    sent by both BSs with the same combining vector.
    """
    params = config.params
    N, L, b, K = config.n_antennas, params.L, params.b, params.K
    key = (rnd.phase, rnd.served)

    def load():
        by_cell: Dict[Optional[int], List[OhiRecord]] = defaultdict(list)
        for m in rnd.group:
            recs = store.take(m, rnd.served - {m})
            if not recs:
                raise ProtocolError(
                    f"no OHI at user {m} for group {sorted(rnd.served - {m})}")
            for rec in recs:
                by_cell[rec.source_cell].append(rec)
        return by_cell

    by_cell = pending.get(key, load)
    out = []
    for ps in rnd.passes:
        P = {c: np.zeros((N * ps.slots, K * b), dtype=complex) for c in ps.bss}
        mine: List[OhiRecord] = []
        for c in ps.bss:
            mine.extend(by_cell.pop(c, []))
        if len(ps.bss) > 1:
            mine.extend(by_cell.pop(None, []))
        for rec in sorted(mine, key=lambda r: r.provenance):
            row = _tx_side_row(rec, ledger, channels)
            sigma = complex_gaussian(rng, N * ps.slots)
            sigma /= np.linalg.norm(sigma)
            if rec.source_cell is not None:
                P[rec.source_cell] += np.outer(sigma, row)
            else:
                for c in ps.bss:
                    part = np.zeros_like(row)
                    cols = slice((c - 1) * L * b, c * L * b)
                    part[cols] = row[cols]
                    P[c] += np.outer(sigma, part)
        out.append(PassPrecoder(ps.bss, ps.slots, P, mine))
    pending.done(key)
    return out


def _tx_side_row(rec: OhiRecord, ledger: CsitLedger, channels: ChannelSet) -> np.ndarray:
    """Rebuild an overheard row from delayed CSI and the stored transmit maps."""
    t = rec.provenance[3]
    row = np.zeros_like(rec.row)
    for c, seg in rec.segments:
        row += ledger.tx_channel(channels, t, rec.observer, c, requester="tx-builder") @ seg
    return row / np.linalg.norm(row)


def run_round(rnd: RoundPlan, passes: Sequence[PassPrecoder], channels: ChannelSet,
              store: OhiStore, ssm: SsmAccumulator, t0: int, N: int) -> int:
    """Play one round starting at global slot ``t0``; returns the next free slot."""
    t = t0
    K = ssm.K
    for pi, ps in enumerate(passes):
        for s in range(ps.slots):
            segs = tuple((c, ps.P[c][s * N:(s + 1) * N]) for c in ps.bss)
            for j in range(1, K + 1):
                row = sum(channels.row(t, j, c) @ seg for c, seg in segs)
                ssm.append(j, row, (rnd.phase, rnd.index))
                if j not in rnd.served:
                    src = ps.bss[0] if len(ps.bss) == 1 else None
                    store.add(OhiRecord(j, src, rnd.served, row / np.linalg.norm(row),
                                        (rnd.phase, rnd.index, pi, t), segs))
            t += 1
    return t


def known_interference(prior: np.ndarray, desired: np.ndarray, interference: np.ndarray,
                       tol_scale: float) -> np.ndarray:
    """Interference rows a receiver can synthesize from past observations.

    These are the combinations of earlier rows whose desired part cancels.
    """
    if prior.shape[0] == 0:
        return np.zeros((0, interference.size), dtype=complex)
    D = prior[:, desired]
    r = numerical_rank(D, tol_scale) if D.size else 0
    U, _, _ = np.linalg.svd(D, full_matrices=True)
    W = U[:, r:].conj().T
    return W @ prior[:, interference]


def verify_alignment(rnd: RoundPlan, j: int, ssm: SsmAccumulator,
                     tol_scale: float = DEFAULT_TOL_SCALE) -> bool:
    """Does the interference ``j`` received in ``rnd`` lie in what it already knows?"""
    omega = ssm.matrix(j)
    tags = ssm.tags(j)
    tag = (rnd.phase, rnd.index)
    new_idx = [i for i, tg in enumerate(tags) if tg == tag]
    if not new_idx:
        raise ValueError(f"round {tag} has not been played for user {j}")
    prior = omega[:new_idx[0]]
    des, intf = ssm.desired_cols(j), ssm.interference_cols(j)
    new_i = omega[new_idx][:, intf]
    if not np.any(np.abs(new_i) > 0):
        return True
    return rowspan_contained(new_i, known_interference(prior, des, intf, tol_scale),
                             tol_scale)


@dataclass(frozen=True)
class UserDecode:
    user: int
    rank_interference: int
    rank_joint: int
    lcs_recovered: int
    decodable: bool


@dataclass(frozen=True)
class DecodeReport:
    variant: Variant
    L: int
    C: int
    theta: int
    seed: int
    b: int
    tau: int
    users: Tuple[UserDecode, ...]
    achieved_dof: Fraction
    csit_audit_clean: bool
    alignment: Tuple[Tuple[int, int, int, bool], ...] = ()  # (phase, round, user, ok)
    coupled_consumed: int = 0

    @property
    def K(self) -> int:
        return self.L * self.C

    @property
    def all_decodable(self) -> bool:
        return all(u.decodable for u in self.users)

    @property
    def alignment_failures(self) -> List[Tuple[int, int, int, bool]]:
        return [a for a in self.alignment if not a[3]]

    @property
    def upper_dof(self) -> Fraction:
        return Fraction(self.K * self.b, self.tau)


def decode(ssm: SsmAccumulator, tol_scale: float) -> Tuple[UserDecode, ...]:
    out = []
    for j in range(1, ssm.K + 1):
        omega = ssm.matrix(j)
        r_i = numerical_rank(omega[:, ssm.interference_cols(j)], tol_scale)
        r_j = numerical_rank(omega, tol_scale)
        lcs = r_j - r_i
        out.append(UserDecode(j, r_i, r_j, lcs, lcs == ssm.b))
    return tuple(out)


Builder = Callable[..., List[PassPrecoder]]


def simulate(config: SimConfig, *, builder: Optional[Builder] = None,
             check_alignment: bool = True) -> DecodeReport:
    """Run every phase of the configured scheme and decode by rank tests.

    ``builder`` replaces :func:`build_phase_p_precoders` (same signature);
    it exists so tests can inject a builder that breaks the delayed-CSIT
    rule.
    """
    params = config.params
    builder = builder or build_phase_p_precoders
    N = config.n_antennas
    channels = generate_channels(config)
    ledger = CsitLedger(channels.phase_of_slot)
    store = OhiStore()
    ssm = SsmAccumulator(params.K, params.b)
    pending = _Pending()
    sigma_rng = _stream(config.seed, STREAM_COMBINERS)
    V1 = build_phase1_precoders(params, N, config.seed)

    alignment = []
    coupled = 0
    t = 0
    for rnd in enumerate_rounds(params):
        ledger.begin_phase(rnd.phase)
        if rnd.phase == 1:
            passes = [phase1_pass(rnd, V1, params)]
        else:
            passes = builder(rnd, store, ledger, channels, sigma_rng, config, pending)
            for ps in passes:
                coupled += sum(1 for r in ps.consumed
                               if len(r.support_cells(params.L, params.b)) > 1)
        t = run_round(rnd, passes, channels, store, ssm, t, N)
        if check_alignment and rnd.phase > 1:
            for j in rnd.group:
                alignment.append((rnd.phase, rnd.index, j,
                                  verify_alignment(rnd, j, ssm, config.tol_scale)))
    if t != params.tau:
        raise ProtocolError(f"played {t} slots, schedule has {params.tau}")
    if pending.leftover():
        raise ProtocolError(f"{pending.leftover()} OHI records were taken but never sent")

    users = decode(ssm, config.tol_scale)
    return DecodeReport(config.variant, params.L, params.C, params.theta, config.seed,
                        params.b, params.tau, users,
                        Fraction(sum(u.lcs_recovered for u in users), params.tau),
                        ledger.clean, tuple(alignment), coupled)


def naive_mat_on_ibc(config: SimConfig) -> DecodeReport:
    """Plain MAT across both cells; the negative control."""
    if config.variant is not Variant.NAIVE_MAT_IBC:
        raise ValueError("naive_mat_on_ibc needs a NAIVE_MAT_IBC config")
    if config.params.L < 2 or config.params.theta < 3:
        raise ValueError("coupling only shows up with L >= 2 and theta >= 3")
    return simulate(config)


def simulate_timeshared(L: int, C: int, theta: Optional[int] = None, seed: int = 0,
                        tol_scale: float = DEFAULT_TOL_SCALE) -> DecodeReport:
    """Serve one cell at a time with MAT; users are renumbered per cell."""
    users: List[UserDecode] = []
    tau = 0
    clean = True
    b = None
    th = None
    for c in range(1, C + 1):
        rep = simulate(SimConfig.mat_bc(L, theta, seed + c - 1, tol_scale=tol_scale),
                       check_alignment=False)
        b, th = rep.b, rep.theta
        tau += rep.tau
        clean &= rep.csit_audit_clean
        users.extend(UserDecode(u.user + (c - 1) * L, u.rank_interference, u.rank_joint,
                                u.lcs_recovered, u.decodable) for u in rep.users)
    return DecodeReport(Variant.MAT_BC, L, C, th, seed, b, tau, tuple(users),
                        Fraction(sum(u.lcs_recovered for u in users), tau), clean)
