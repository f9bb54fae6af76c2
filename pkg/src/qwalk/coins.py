"""Coin parametrization, random phases, and gauge reductions.

The normal-form coin has real amplitudes (t, r) with r^2 + t^2 = 1 and picks
up one random phase per row,

    C_k = [[exp(-i w_up) t,  -exp(-i w_up) r],
           [exp(-i w_dn) r,   exp(-i w_dn) t]].

Relabeled lattice indices follow e_{2k} = up at site k, e_{2k+1} = down at
site k, and phases are indexed accordingly: w_up(k) = w[2k], w_dn(k) = w[2k+1].
A window is an inclusive pair (lo, hi) of relabeled indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError, WindowError

TWO_PI = 2.0 * math.pi

UNITARITY_TOL = 1e-12


# --------------------------------------------------------------------------
# deterministic coin amplitudes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CoinParams:
    """Real transmission/reflection amplitude pair with r^2 + t^2 = 1."""

    t: float
    r: float

    def __post_init__(self):
        if not (0.0 <= self.t <= 1.0 and 0.0 <= self.r <= 1.0):
            raise DomainError("coin amplitudes must lie in [0, 1]")
        if abs(self.r * self.r + self.t * self.t - 1.0) > UNITARITY_TOL:
            raise ValidationError("coin amplitudes must satisfy r^2 + t^2 = 1")

    def matrix(self, w_up: float = 0.0, w_dn: float = 0.0) -> np.ndarray:
        """The 2x2 normal-form coin with row phases (w_up, w_dn)."""
        pu = np.exp(-1j * w_up)
        pd = np.exp(-1j * w_dn)
        return np.array([[pu * self.t, -pu * self.r],
                         [pd * self.r, pd * self.t]], dtype=complex)


def make_coin(t: float) -> CoinParams:
    """Coin with transmission amplitude t and r = sqrt(1 - t^2)."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"transmission amplitude t={t} outside [0, 1]")
    return CoinParams(t=float(t), r=math.sqrt(max(0.0, 1.0 - t * t)))


def hadamard_coin() -> CoinParams:
    """The coin with Hadamard amplitudes t = r = 1/sqrt(2)."""
    s = 1.0 / math.sqrt(2.0)
    return CoinParams(t=s, r=s)


# --------------------------------------------------------------------------
# phase distributions and sequences
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseDistribution:
    """Law of a single coin phase on the torus [0, 2*pi).

    Kinds: "uniform-full", "uniform-interval" (params a < b in [0, 2*pi]),
    "point-mass" (param value).  The uniform variants have bounded density;
    the point mass does not satisfy the localization hypotheses and is
    admitted only for deterministic checks.
    """

    kind: str
    a: float = 0.0
    b: float = TWO_PI
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform-full", "uniform-interval", "point-mass"):
            raise ValidationError(f"unknown phase distribution kind {self.kind!r}")
        if self.kind == "uniform-interval":
            if not (0.0 <= self.a < self.b <= TWO_PI):
                raise ValidationError("uniform-interval requires 0 <= a < b <= 2*pi")
        if self.kind == "point-mass":
            object.__setattr__(self, "value", self.value % TWO_PI)

    @staticmethod
    def uniform_full() -> "PhaseDistribution":
        return PhaseDistribution("uniform-full")

    @staticmethod
    def uniform_interval(a: float, b: float) -> "PhaseDistribution":
        return PhaseDistribution("uniform-interval", a=a, b=b)

    @staticmethod
    def point_mass(value: float) -> "PhaseDistribution":
        return PhaseDistribution("point-mass", value=value)

    @property
    def has_bounded_density(self) -> bool:
        return self.kind != "point-mass"

    @property
    def is_point_mass(self) -> bool:
        return self.kind == "point-mass"

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` i.i.d. phases in [0, 2*pi)."""
        if self.kind == "uniform-full":
            return rng.uniform(0.0, TWO_PI, size)
        if self.kind == "uniform-interval":
            return rng.uniform(self.a, self.b, size) % TWO_PI
        return np.full(size, self.value)

    def circular_mean(self) -> complex:
        """E[exp(-i w)], computed in closed form."""
        if self.kind == "uniform-full":
            return 0.0 + 0.0j
        if self.kind == "uniform-interval":
            width = self.b - self.a
            return (np.exp(-1j * self.a) - np.exp(-1j * self.b)) / (1j * width)
        return complex(np.exp(-1j * self.value))

    def describe(self) -> str:
        if self.kind == "uniform-interval":
            return f"uniform-interval({self.a}, {self.b})"
        if self.kind == "point-mass":
            return f"point-mass({self.value})"
        return "uniform-full"


def _check_window(window) -> tuple[int, int]:
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise WindowError(f"empty window ({lo}, {hi})")
    return lo, hi


@dataclass(frozen=True)
class PhaseSequence:
    """Phases over an inclusive window of relabeled indices.

    Regeneration with the same (distribution, window, seed) is bit-identical.
    """

    offset: int
    values: np.ndarray = field(repr=False)
    seed: int | None = None

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float) % TWO_PI
        object.__setattr__(self, "values", vals)
        vals.setflags(write=False)

    @property
    def window(self) -> tuple[int, int]:
        return self.offset, self.offset + len(self.values) - 1

    def __getitem__(self, m: int) -> float:
        i = m - self.offset
        if not 0 <= i < len(self.values):
            raise WindowError(f"phase index {m} outside window {self.window}")
        return float(self.values[i])

    def covers(self, lo: int, hi: int) -> bool:
        return self.offset <= lo and hi <= self.offset + len(self.values) - 1

    def slice(self, lo: int, hi: int) -> np.ndarray:
        """Phases for relabeled indices lo..hi inclusive."""
        if not self.covers(lo, hi):
            raise WindowError(
                f"requested ({lo}, {hi}) not covered by window {self.window}")
        return self.values[lo - self.offset:hi - self.offset + 1]

    def phase_factors(self, lo: int, hi: int) -> np.ndarray:
        """exp(-i w_m) for m = lo..hi inclusive."""
        return np.exp(-1j * self.slice(lo, hi))

    def site_phase(self, k: int) -> float:
        """Single phase per site, read from the even relabeled entry 2k."""
        return self[2 * k]


def sample_phases(dist: PhaseDistribution, window, seed: int) -> PhaseSequence:
    """I.i.d. phases, one per relabeled index in the inclusive window."""
    lo, hi = _check_window(window)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    values = dist.sample(rng, hi - lo + 1)
    return PhaseSequence(offset=lo, values=values, seed=seed)


def zero_phases(window) -> PhaseSequence:
    lo, hi = _check_window(window)
    return PhaseSequence(offset=lo, values=np.zeros(hi - lo + 1))


# --------------------------------------------------------------------------
# general U(2) coin family and its reduction to normal form
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneralCoin:
    """U(2) coin exp(-i theta) [[t e^{-i alpha}, i r e^{i gamma}],
    [i r e^{-i gamma}, t e^{i alpha}]]."""

    t: float
    r: float
    alpha: float = 0.0
    gamma: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "gamma", "theta"):
            object.__setattr__(self, name, getattr(self, name) % TWO_PI)
        m = self.matrix()
        if np.max(np.abs(m.conj().T @ m - np.eye(2))) > UNITARITY_TOL:
            raise ValidationError("general coin matrix is not unitary")

    def matrix(self) -> np.ndarray:
        g = np.exp(-1j * self.theta)
        ea = np.exp(-1j * self.alpha)
        eg = np.exp(1j * self.gamma)
        return g * np.array([[self.t * ea, 1j * self.r * eg],
                             [1j * self.r / eg, self.t / ea]], dtype=complex)


@dataclass(frozen=True)
class GaugeReduction:
    """Diagonal gauge data mapping a general coin walk to normal form.

    ``sigma`` is the constant spin rotation diag(1, -i e^{i gamma}); ``zeta``
    are the site-linear phases -k*alpha on the window; multiplying the gauged
    operator by ``global_phase`` = e^{i theta} yields the normal-form walk.
    """

    coin: CoinParams
    window: tuple[int, int]
    zeta: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    global_phase: complex

    def total_phases(self) -> np.ndarray:
        """Phases of the combined diagonal V = Sigma^{-1} (x) V_alpha over the
        window: the alpha part on every index, the sigma angle on odd ones."""
        lo, hi = self.window
        zt = self.zeta.copy()
        sigma_angle = float(np.angle(self.sigma[1, 1]))
        for m in range(lo, hi + 1):
            if m % 2 != 0:
                zt[m - lo] -= sigma_angle
        return zt


def _alpha_zeta(window, alpha: float) -> np.ndarray:
    """zeta_{2k+2} = zeta_{2k+1} = -k*alpha over the inclusive window."""
    lo, hi = window
    out = np.empty(hi - lo + 1)
    for m in range(lo, hi + 1):
        k = (m - 2) // 2 if m % 2 == 0 else (m - 1) // 2
        out[m - lo] = -k * alpha
    return out


def reduce_general_coin(coin: GeneralCoin, window) -> GaugeReduction:
    """Normal-form amplitudes plus the diagonal gauge removing the phases
    (alpha, gamma, theta) of a general U(2) coin."""
    lo, hi = _check_window(window)
    sigma = np.array([[1.0, 0.0],
                      [0.0, -1j * np.exp(1j * coin.gamma)]], dtype=complex)
    zeta = _alpha_zeta((lo, hi), coin.alpha)
    return GaugeReduction(
        coin=CoinParams(t=coin.t, r=coin.r),
        window=(lo, hi),
        zeta=zeta,
        sigma=sigma,
        global_phase=complex(np.exp(1j * coin.theta)),
    )


# --------------------------------------------------------------------------
# dense walk matrices on a window (for gauge verification)
# --------------------------------------------------------------------------

def walk_matrix_from_site_coins(window, coin_of_site) -> np.ndarray:
    """Dense one-step walk matrix on an inclusive window of relabeled indices.

    ``coin_of_site(k)`` returns the 2x2 coin at site k.  Column 2k sends
    C[0,0] to row 2k+2 and C[1,0] to row 2k-1; column 2k+1 sends C[0,1] to
    row 2k+2 and C[1,1] to row 2k-1.  Matrix elements whose source or target
    falls outside the window are dropped, so only interior columns agree
    with the infinite operator.
    """
    lo, hi = _check_window(window)
    dim = hi - lo + 1
    u = np.zeros((dim, dim), dtype=complex)
    for m in range(lo, hi + 1):
        k, is_up = divmod(m, 2)
        try:
            c = np.asarray(coin_of_site(k), dtype=complex)
        except WindowError:
            continue  # boundary column without phase coverage stays zero
        col = 0 if is_up == 0 else 1
        up_row, dn_row = 2 * k + 2, 2 * k - 1
        if lo <= up_row <= hi:
            u[up_row - lo, m - lo] = c[0, col]
        if lo <= dn_row <= hi:
            u[dn_row - lo, m - lo] = c[1, col]
    return u


def interior_columns(window) -> tuple[int, int]:
    """Inclusive range of columns whose images stay inside the window."""
    lo, hi = _check_window(window)
    return lo + 2, hi - 2


def normal_walk_matrix(coin: CoinParams, phases: PhaseSequence, window) -> np.ndarray:
    """Dense normal-form walk matrix with per-site row phases from ``phases``."""
    def coin_of_site(k):
        return coin.matrix(phases[2 * k], phases[2 * k + 1])
    return walk_matrix_from_site_coins(window, coin_of_site)


def general_walk_matrix(coin: GeneralCoin, phases: PhaseSequence, window) -> np.ndarray:
    """Dense walk matrix for random row phases on top of a general coin."""
    base = coin.matrix()
    def coin_of_site(k):
        d = np.diag([np.exp(-1j * phases[2 * k]), np.exp(-1j * phases[2 * k + 1])])
        return d @ base
    return walk_matrix_from_site_coins(window, coin_of_site)


def _conjugate_by_phases(u: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """V^{-1} U V for the diagonal V e_m = exp(i zeta_m) e_m."""
    v = np.exp(1j * zeta)
    return u * (v[None, :] / v[:, None])


def verify_general_reduction(coin: GeneralCoin, phases: PhaseSequence,
                             window) -> float:
    """Max entrywise deviation between the gauged general-coin walk and the
    normal-form walk on interior columns of the window."""
    lo, hi = _check_window(window)
    red = reduce_general_coin(coin, (lo, hi))
    u_gen = general_walk_matrix(coin, phases, (lo, hi))
    u_norm = normal_walk_matrix(red.coin, phases, (lo, hi))
    gauged = red.global_phase * _conjugate_by_phases(u_gen, red.total_phases())
    c0, c1 = interior_columns((lo, hi))
    sl = slice(c0 - lo, c1 - lo + 1)
    return float(np.max(np.abs(gauged[:, sl] - u_norm[:, sl])))


# --------------------------------------------------------------------------
# Konno model: randomness removable by a gauge transformation
# --------------------------------------------------------------------------

def konno_coin_matrix(coin: CoinParams, w: float) -> np.ndarray:
    """Coin [[t e^{i w}, r], [r, -t e^{-i w}]] whose single random phase per
    site can be gauged away."""
    return np.array([[coin.t * np.exp(1j * w), coin.r],
                     [coin.r, -coin.t * np.exp(-1j * w)]], dtype=complex)


def konno_walk_matrix(coin: CoinParams, phases: PhaseSequence, window) -> np.ndarray:
    def coin_of_site(k):
        return konno_coin_matrix(coin, phases.site_phase(k))
    return walk_matrix_from_site_coins(window, coin_of_site)


def konno_gauge(phases: PhaseSequence) -> np.ndarray:
    """Cumulative-sum gauge phases zeta_m removing the Konno randomness.

    Convention zeta_0 = zeta_{-1} = 0; ascending, zeta_{2k+2} = zeta_{2k+1} =
    w_0 + ... + w_k with w_k the site phase at k.  The window must contain
    relabeled index 0.
    """
    lo, hi = phases.window
    if not (lo <= -1 and 0 <= hi):
        raise WindowError("konno gauge needs a window containing indices -1 and 0")
    zeta = np.zeros(hi - lo + 1)

    def setz(m, value):
        if lo <= m <= hi:
            zeta[m - lo] = value

    acc = 0.0
    for k in range(0, (hi - 1) // 2 + 1):
        acc += phases.site_phase(k)
        setz(2 * k + 1, acc)
        setz(2 * k + 2, acc)
    acc = 0.0
    for k in range(-1, (lo + 1) // 2 - 1, -1):
        acc -= phases.site_phase(k)
        setz(2 * k, acc)
        setz(2 * k - 1, acc)
    return zeta


def verify_konno_gauge(coin: CoinParams, phases: PhaseSequence) -> float:
    """Max entrywise deviation of V^{-1} U_w V from the deterministic Konno
    walk (coin [[t, r], [r, -t]]) on interior columns."""
    window = phases.window
    zeta = konno_gauge(phases)
    u_rand = konno_walk_matrix(coin, phases, window)
    u_det = konno_walk_matrix(coin, zero_phases(window), window)
    gauged = _conjugate_by_phases(u_rand, zeta)
    lo, hi = window
    c0, c1 = interior_columns(window)
    sl = slice(c0 - lo, c1 - lo + 1)
    return float(np.max(np.abs(gauged[:, sl] - u_det[:, sl])))
