"""One-step and n-step walk dynamics, truncated band matrices, moments.

The walk operator is U = D * S_o * S_e in the relabeled basis: S_e applies
the block [[r, t], [t, -r]] on index pairs (2k, 2k+1), S_o swaps pairs
(2k+1, 2k+2), and D multiplies index m by exp(-i w_m).  Evolution streams
these factors over a pre-allocated window (the light cone grows by one site
per step); matrices are materialized only for truncation-based studies.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .coins import CoinParams, PhaseDistribution, PhaseSequence, sample_phases
from .errors import DomainError, ValidationError, WindowError
from .states import WalkState, position_moment

TRUNCATIONS = ("finite", "semifinite-plus", "semifinite-minus", "none")


# --------------------------------------------------------------------------
# disorder regimes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Deterministic:
    """Fixed coin phases every step (all zero when ``phases`` is None)."""
    phases: PhaseSequence | None = None


@dataclass(frozen=True)
class SpatialDisorder:
    """One random phase per lattice index, drawn once and frozen in time."""
    dist: PhaseDistribution
    seed: int


@dataclass(frozen=True)
class TemporalDisorder:
    """A fresh phase pair per time step, identical across all sites."""
    dist: PhaseDistribution
    seed: int


Regime = Deterministic | SpatialDisorder | TemporalDisorder


# --------------------------------------------------------------------------
# streaming evolution
# --------------------------------------------------------------------------

class Walker:
    """Mutable evolution buffer for up to ``n_max`` steps of one walk."""

    def __init__(self, initial: WalkState, coin: CoinParams, n_max: int):
        pad = 2 * (n_max + 1) + 2
        init_len = len(initial.amplitudes)
        self.offset = initial.offset - pad
        self.psi = np.zeros(init_len + 2 * pad, dtype=complex)
        self.psi[pad:pad + init_len] = initial.amplitudes
        self.a, self.b = pad, pad + init_len
        self.coin = coin
        self.sites = np.arange(self.offset, self.offset + len(self.psi)) // 2

    @property
    def buffer_window(self) -> tuple[int, int]:
        return self.offset, self.offset + len(self.psi) - 1

    def step_spatial(self, dphase: np.ndarray) -> None:
        self.a, self.b = backend.walk_step_spatial(
            self.psi, self.offset, self.a, self.b,
            self.coin.r, self.coin.t, dphase)

    def step_temporal(self, up_factor: complex, dn_factor: complex) -> None:
        self.a, self.b = backend.walk_step_temporal(
            self.psi, self.offset, self.a, self.b,
            self.coin.r, self.coin.t, up_factor, dn_factor)

    def state(self) -> WalkState:
        return WalkState(offset=self.offset + self.a,
                         amplitudes=self.psi[self.a:self.b].copy())

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.psi[self.a:self.b]) ** 2))

    def moment(self, L: int) -> float:
        p = np.abs(self.psi[self.a:self.b]) ** 2
        k = self.sites[self.a:self.b].astype(float)
        return float(np.sum((k ** L) * p))


def _dphase_for(walker: Walker, phases: PhaseSequence | None) -> np.ndarray:
    lo, hi = walker.buffer_window
    if phases is None:
        return np.ones(hi - lo + 1, dtype=complex)
    if not phases.covers(lo, hi):
        raise WindowError(
            f"phase window {phases.window} must cover the evolution buffer ({lo}, {hi})")
    return phases.phase_factors(lo, hi)


def apply_step(state: WalkState, coin: CoinParams,
               phases: PhaseSequence | None) -> WalkState:
    """One application of U to a finitely supported state.

    ``phases`` must cover the support extended by one site on each side.
    """
    s_lo, s_hi = state.support()
    if s_hi < s_lo:
        return state
    if phases is not None and not phases.covers(s_lo - 2, s_hi + 2):
        raise WindowError(
            f"phases {phases.window} must cover ({s_lo - 2}, {s_hi + 2})")
    pad = 2
    buf = np.zeros((s_hi - s_lo + 1) + 2 * pad, dtype=complex)
    offset = s_lo - pad
    buf[pad:pad + (s_hi - s_lo + 1)] = state.amplitudes[
        s_lo - state.offset:s_hi - state.offset + 1]
    if phases is None:
        dphase = np.ones(len(buf), dtype=complex)
    else:
        dphase = phases.phase_factors(offset, offset + len(buf) - 1)
    a, b = backend.walk_step_spatial(buf, offset, pad, len(buf) - pad,
                                     coin.r, coin.t, dphase)
    return WalkState(offset=offset + a, amplitudes=buf[a:b].copy())


def _temporal_factors(dist: PhaseDistribution, rng: np.random.Generator):
    w = dist.sample(rng, 2)
    return complex(np.exp(-1j * w[0])), complex(np.exp(-1j * w[1]))


def evolve(state: WalkState, coin: CoinParams, n: int, regime: Regime) -> WalkState:
    """Evolve ``n`` steps under the given disorder regime."""
    if n < 0:
        raise DomainError("step count must be nonnegative")
    if n == 0:
        return state
    walker = Walker(state, coin, n)
    if isinstance(regime, Deterministic):
        dphase = _dphase_for(walker, regime.phases)
        for _ in range(n):
            walker.step_spatial(dphase)
    elif isinstance(regime, SpatialDisorder):
        seq = sample_phases(regime.dist, walker.buffer_window, regime.seed)
        dphase = seq.phase_factors(*walker.buffer_window)
        for _ in range(n):
            walker.step_spatial(dphase)
    elif isinstance(regime, TemporalDisorder):
        rng = np.random.default_rng(np.random.SeedSequence(regime.seed))
        for _ in range(n):
            up_f, dn_f = _temporal_factors(regime.dist, rng)
            walker.step_temporal(up_f, dn_f)
    else:
        raise ValidationError(f"unknown regime {regime!r}")
    return walker.state()


# --------------------------------------------------------------------------
# moment time series
# --------------------------------------------------------------------------

@dataclass
class MomentSeries:
    """Position moment of one order after each step, n = 0 .. n_max."""

    L: int
    values: np.ndarray
    initial: str = ""
    seed: int | None = None

    def __getitem__(self, n: int) -> float:
        return float(self.values[n])


def moment_series(initial: WalkState, coin: CoinParams, regime: Regime,
                  L_list, n_max: int) -> dict[int, MomentSeries]:
    """Evaluate position moments after every step up to ``n_max``."""
    nrm = initial.norm_sq()
    if abs(nrm - 1.0) > 1e-9:
        raise ValidationError(f"initial state norm^2 = {nrm}, expected 1")
    L_list = list(L_list)
    walker = Walker(initial, coin, n_max)
    out = {L: np.empty(n_max + 1) for L in L_list}
    for L in L_list:
        out[L][0] = position_moment(initial, L)
    if isinstance(regime, Deterministic):
        dphase = _dphase_for(walker, regime.phases)
        stepper = lambda: walker.step_spatial(dphase)
    elif isinstance(regime, SpatialDisorder):
        seq = sample_phases(regime.dist, walker.buffer_window, regime.seed)
        dphase = seq.phase_factors(*walker.buffer_window)
        stepper = lambda: walker.step_spatial(dphase)
    elif isinstance(regime, TemporalDisorder):
        rng = np.random.default_rng(np.random.SeedSequence(regime.seed))
        def stepper():
            up_f, dn_f = _temporal_factors(regime.dist, rng)
            walker.step_temporal(up_f, dn_f)
    else:
        raise ValidationError(f"unknown regime {regime!r}")
    for n in range(1, n_max + 1):
        stepper()
        for L in L_list:
            out[L][n] = walker.moment(L)
    seed = getattr(regime, "seed", None)
    return {L: MomentSeries(L=L, values=out[L], seed=seed) for L in L_list}


def averaged_moment_series(initial: WalkState, coin: CoinParams,
                           dist: PhaseDistribution, regime_kind: str,
                           L_list, n_max: int, replicas: int,
                           master_seed: int):
    """Disorder-averaged moments: plain mean over replica seeds with the
    standard error across replicas.  Returns {L: (mean, stderr)} arrays."""
    if regime_kind not in ("spatial", "temporal"):
        raise ValidationError("regime_kind must be 'spatial' or 'temporal'")
    L_list = list(L_list)
    acc = {L: np.zeros(n_max + 1) for L in L_list}
    acc2 = {L: np.zeros(n_max + 1) for L in L_list}
    for rep in range(replicas):
        seed = int(np.random.SeedSequence((master_seed, rep)).generate_state(1)[0])
        regime = (SpatialDisorder(dist, seed) if regime_kind == "spatial"
                  else TemporalDisorder(dist, seed))
        series = moment_series(initial, coin, regime, L_list, n_max)
        for L in L_list:
            acc[L] += series[L].values
            acc2[L] += series[L].values ** 2
    out = {}
    for L in L_list:
        mean = acc[L] / replicas
        var = np.maximum(acc2[L] / replicas - mean ** 2, 0.0)
        stderr = np.sqrt(var / max(replicas - 1, 1))
        out[L] = (mean, stderr)
    return out


def write_moment_series_csv(path, series_by_L: dict[int, MomentSeries]) -> None:
    """CSV rows (n, L, value, seed)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "L", "value", "seed"])
        for L in sorted(series_by_L):
            s = series_by_L[L]
            for n, v in enumerate(s.values):
                writer.writerow([n, L, repr(float(v)),
                                 "" if s.seed is None else s.seed])


def write_averaged_series_csv(path, averaged, replicas: int) -> None:
    """CSV rows (n, L, mean, stderr, replicas)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "L", "mean", "stderr", "replicas"])
        for L in sorted(averaged):
            mean, stderr = averaged[L]
            for n in range(len(mean)):
                writer.writerow([n, L, repr(float(mean[n])),
                                 repr(float(stderr[n])), replicas])


# --------------------------------------------------------------------------
# truncated band matrices
# --------------------------------------------------------------------------

@dataclass
class BandUnitary:
    """Materialized walk operator on a window of relabeled indices.

    The finite truncation is exactly unitary.  Semifinite and infinite
    ("none") variants are exact sub-blocks of the corresponding operator;
    ``inexact_columns`` lists window columns whose full column extends
    beyond the window (open ends).
    """

    window: tuple[int, int]
    truncation: str
    coin: CoinParams
    dense: np.ndarray = field(repr=False)
    inexact_columns: tuple[int, ...] = ()

    @property
    def dim(self) -> int:
        return self.dense.shape[0]

    def unitarity_defect(self) -> float:
        u = self.dense
        return float(np.max(np.abs(u.conj().T @ u - np.eye(self.dim))))

    def banded(self, shift: complex = 0.0) -> np.ndarray:
        """(U - shift*I) in scipy solve_banded storage with l = u = 2."""
        a = self.dense - shift * np.eye(self.dim)
        ab = np.zeros((5, self.dim), dtype=complex)
        for i in range(self.dim):
            for j in range(max(0, i - 2), min(self.dim, i + 3)):
                ab[2 + i - j, j] = a[i, j]
        return ab


def _shift_product_dense(lo: int, hi: int, coin: CoinParams,
                         left_closed: bool, right_closed: bool) -> np.ndarray:
    """S_o S_e on the inclusive index range [lo, hi] (even endpoints).

    Closed ends carry the 1x1 boundary blocks of the finite truncation;
    open ends tile full blocks cut at the edge.
    """
    dim = hi - lo + 1
    r, t = coin.r, coin.t
    se = np.zeros((dim, dim))
    so = np.zeros((dim, dim))
    # S_e: blocks [[r, t], [t, -r]] starting on even indices
    m = lo
    while m <= hi:
        if m + 1 <= hi and not (right_closed and m == hi):
            i = m - lo
            se[i, i] = r
            se[i, i + 1] = t
            se[i + 1, i] = t
            se[i + 1, i + 1] = -r
        else:
            se[m - lo, m - lo] = 1.0 if right_closed else r
        m += 2
    # S_o: swap blocks starting on odd indices; closed left end keeps a 1
    so[0, 0] = 1.0 if left_closed else 0.0
    m = lo + 1
    while m <= hi:
        if m + 1 <= hi:
            i = m - lo
            so[i, i + 1] = 1.0
            so[i + 1, i] = 1.0
        # a cut swap block at an open edge leaves the row empty
        m += 2
    return so @ se


def build_band_matrix(window, coin: CoinParams, phases: PhaseSequence,
                      truncation: str = "finite") -> BandUnitary:
    """Materialize the walk operator on an even-endpoint window.

    For the semifinite and infinite variants the block pattern is built on a
    window extended past each open end and then sliced back, so interior
    entries agree with the untruncated operator; ``phases`` must cover the
    extension (two indices per open end).
    """
    lo, hi = int(window[0]), int(window[1])
    if lo % 2 != 0 or hi % 2 != 0 or hi <= lo:
        raise WindowError("band window needs even endpoints 2*n0 < 2*m0")
    if truncation not in TRUNCATIONS:
        raise ValidationError(f"unknown truncation {truncation!r}")
    left_open = truncation in ("semifinite-minus", "none")
    right_open = truncation in ("semifinite-plus", "none")
    lo_x = lo - 2 if left_open else lo
    hi_x = hi + 2 if right_open else hi
    s = _shift_product_dense(lo_x, hi_x, coin,
                             left_closed=not left_open,
                             right_closed=not right_open)
    if not phases.covers(lo_x, hi_x):
        raise WindowError(
            f"phases {phases.window} must cover the extended window ({lo_x}, {hi_x})")
    d = phases.phase_factors(lo_x, hi_x)
    u = d[:, None] * s
    sl = slice(lo - lo_x, lo - lo_x + (hi - lo + 1))
    dense = np.ascontiguousarray(u[sl, sl])
    inexact: list[int] = []
    if left_open:
        inexact += [lo, lo + 1]
    if right_open:
        inexact += [hi - 1, hi]
    return BandUnitary(window=(lo, hi), truncation=truncation, coin=coin,
                       dense=dense, inexact_columns=tuple(inexact))
