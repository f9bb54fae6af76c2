"""Temporal disorder: quantum site distributions, the equivalent persistent
random walk, exact recursions, generating functions, diffusion constants.

Averaging the temporally disordered walk over zero-circular-mean phases
turns the quantum site distribution W_k(n) into the law w_k(n) of a
classical persistent random walk: probability t^2 of repeating the previous
step and r^2 of reversing it, with the first-step law (a, b) fixed by the
initial coin vector.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .coins import CoinParams, PhaseDistribution
from .errors import DomainError, HypothesisError, ValidationError
from .evolution import Walker
from .rngutil import replica_rng
from .states import WalkState, site_probabilities

CIRCULAR_MEAN_TOL = 1e-12


@dataclass(frozen=True)
class PersistentRWParams:
    """First-step law (a, b) and persist/flip probabilities (t^2, r^2)."""

    a: float
    b: float
    persist: float
    flip: float

    def __post_init__(self):
        vals = (self.a, self.b, self.persist, self.flip)
        if any(not (-1e-12 <= v <= 1 + 1e-12) for v in vals):
            raise ValidationError("probabilities must lie in [0, 1]")
        if abs(self.a + self.b - 1.0) > 1e-12:
            raise ValidationError("first-step probabilities must sum to one")
        if abs(self.persist + self.flip - 1.0) > 1e-12:
            raise ValidationError("persist + flip must equal one")


def prw_params(phi0, coin: CoinParams) -> PersistentRWParams:
    """Persistent-walk parameters induced by the initial coin vector
    phi0 = alpha |up> + beta |down>."""
    alpha, beta = complex(phi0[0]), complex(phi0[1])
    nrm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(nrm - 1.0) > 1e-9:
        raise ValidationError(f"initial coin vector has |alpha|^2+|beta|^2 = {nrm}")
    t2, r2 = coin.t ** 2, coin.r ** 2
    rt = coin.r * coin.t
    a = abs(alpha) ** 2 * t2 + abs(beta) ** 2 * r2 \
        - 2.0 * (alpha.conjugate() * beta).real * rt
    a = min(max(a, 0.0), 1.0)
    return PersistentRWParams(a=a, b=1.0 - a, persist=t2, flip=r2)


@dataclass
class DistributionTable:
    """Site probabilities at one time: w_k (classical) or W_k (quantum)."""

    n: int
    probs: np.ndarray = field(repr=False)
    kind: str = "classical"

    def __post_init__(self):
        if len(self.probs) != 2 * self.n + 1:
            raise ValidationError("table must cover k = -n .. n")

    @property
    def parity(self) -> int:
        """Sites k with k != n (mod 2) carry zero probability."""
        return self.n % 2

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.n, self.n + 1)

    def prob(self, k: int) -> float:
        if abs(k) > self.n:
            return 0.0
        return float(self.probs[k + self.n])

    def total(self) -> float:
        return float(math.fsum(self.probs))

    def moment(self, L: int) -> float:
        """Sum_k k^L w_k with compensated summation."""
        k = self.sites.astype(float)
        return float(math.fsum((k ** L) * self.probs))

    def characteristic(self, y: complex) -> complex:
        """Sum_k exp(i y k) w_k."""
        k = self.sites.astype(float)
        return complex(np.sum(np.exp(1j * y * k) * self.probs))


def prw_distribution(params: PersistentRWParams, n: int) -> DistributionTable:
    """Exact persistent-walk distribution at time n by the two-component
    recursion (w+, w-), an O(n^2) dynamic program."""
    if n < 1:
        raise DomainError("recursion starts at n = 1")
    return _prw_series(params, [n])[0]


def prw_distribution_series(params: PersistentRWParams,
                            n_list) -> list[DistributionTable]:
    """Distribution snapshots at each time in increasing ``n_list``,
    computed in one pass of the recursion."""
    return _prw_series(params, list(n_list))


def _prw_series(params: PersistentRWParams, n_list) -> list[DistributionTable]:
    if any(n < 1 for n in n_list):
        raise DomainError("recursion starts at n = 1")
    if sorted(n_list) != list(n_list):
        raise DomainError("snapshot times must be increasing")
    n_max = n_list[-1]
    wp = np.zeros(2 * n_max + 1)
    wm = np.zeros(2 * n_max + 1)
    wp[n_max + 1] = params.a
    wm[n_max - 1] = params.b
    out = []
    current = 1
    for n in n_list:
        backend.prw_steps(wp, wm, params.persist, params.flip, n - current)
        current = n
        probs = (wp + wm)[n_max - n:n_max + n + 1].copy()
        out.append(DistributionTable(n=n, probs=probs, kind="classical"))
    return out


# --------------------------------------------------------------------------
# quantum distribution per realization
# --------------------------------------------------------------------------

def sample_step_phases(dist: PhaseDistribution, n: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Fresh (w+, w-) pair per step, shape (n, 2)."""
    return dist.sample(rng, 2 * n).reshape(n, 2)


def quantum_distribution(coin: CoinParams, step_phases: np.ndarray,
                         phi0, n: int) -> DistributionTable:
    """Site distribution W_k(n) of one temporal-disorder realization,
    started from phi0 (x) |0>.

    ``step_phases[j]`` holds the phase pair of step j; W_k is read off the
    evolved state as the summed squared amplitude at site k.
    """
    step_phases = np.asarray(step_phases, dtype=float)
    if step_phases.shape[0] < n or step_phases.shape[1] != 2:
        raise DomainError("need one (w+, w-) pair per step")
    alpha, beta = complex(phi0[0]), complex(phi0[1])
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-9:
        raise ValidationError("phi0 must be normalized")
    initial = WalkState(offset=0, amplitudes=np.array([alpha, beta]))
    walker = Walker(initial, coin, n)
    for j in range(n):
        up_f = complex(np.exp(-1j * step_phases[j, 0]))
        dn_f = complex(np.exp(-1j * step_phases[j, 1]))
        walker.step_temporal(up_f, dn_f)
    sites, probs = site_probabilities(walker.state())
    table = np.zeros(2 * n + 1)
    for k, p in zip(sites, probs):
        if -n <= k <= n:
            table[k + n] = p
    return DistributionTable(n=n, probs=table, kind="quantum")


# --------------------------------------------------------------------------
# Monte Carlo vs exact recursion
# --------------------------------------------------------------------------

@dataclass
class ComparisonReport:
    """Disorder-averaged quantum distribution against the exact recursion."""

    n: int
    replicas: int
    sites: np.ndarray
    mc_mean: np.ndarray
    mc_stderr: np.ndarray
    exact: np.ndarray
    z_scores: np.ndarray
    max_abs_dev: float
    max_abs_z: float


def mc_vs_exact(coin: CoinParams, phi0, dist: PhaseDistribution, n: int,
                replicas: int, seed: int) -> ComparisonReport:
    """Compare the Monte Carlo mean of W_k(n) with w_k(n).

    The equivalence needs phases with vanishing circular mean; other
    distributions raise HypothesisError.
    """
    if abs(dist.circular_mean()) > CIRCULAR_MEAN_TOL:
        raise HypothesisError(
            f"E[e^(-i w)] = {dist.circular_mean():.3g} != 0 for "
            f"{dist.describe()}; quantum/classical equivalence fails")
    params = prw_params(phi0, coin)
    exact = prw_distribution(params, n)
    acc = np.zeros(2 * n + 1)
    acc2 = np.zeros(2 * n + 1)
    for rep in range(replicas):
        rng = replica_rng(seed, rep)
        table = quantum_distribution(coin, sample_step_phases(dist, n, rng),
                                     phi0, n)
        acc += table.probs
        acc2 += table.probs ** 2
    mean = acc / replicas
    var = np.maximum(acc2 / replicas - mean ** 2, 0.0)
    stderr = np.sqrt(var / max(replicas - 1, 1))
    dev = mean - exact.probs
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(stderr > 0, dev / stderr, np.where(dev == 0.0, 0.0, np.inf))
    return ComparisonReport(
        n=n, replicas=replicas, sites=exact.sites, mc_mean=mean,
        mc_stderr=stderr, exact=exact.probs, z_scores=z,
        max_abs_dev=float(np.max(np.abs(dev))),
        max_abs_z=float(np.max(np.abs(z))))


def write_comparison_json(path, report: ComparisonReport) -> None:
    payload = {
        "n": report.n,
        "replicas": report.replicas,
        "max_abs_dev": report.max_abs_dev,
        "max_abs_z": report.max_abs_z,
        "per_site": [
            {"site": int(k), "mc_mean": float(m), "mc_stderr": float(se),
             "exact": float(e), "z": float(zz)}
            for k, m, se, e, zz in zip(report.sites, report.mc_mean,
                                       report.mc_stderr, report.exact,
                                       report.z_scores)
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# --------------------------------------------------------------------------
# generating functions and diffusion constants
# --------------------------------------------------------------------------

def transition_symbol(y: complex, params: PersistentRWParams) -> np.ndarray:
    """The 2x2 update M(y) of the conditional generating-function pair."""
    t2, r2 = params.persist, params.flip
    ey = np.exp(1j * y)
    return np.array([[t2 * ey, r2 * ey],
                     [r2 / ey, t2 / ey]], dtype=complex)


def generating_function(y: complex, n: int, params: PersistentRWParams) -> complex:
    """Psi_n(y) = sum_k e^{iyk} w_k(n), via n-1 applications of M(y)."""
    if n < 1:
        raise DomainError("generating function defined for n >= 1")
    ey = np.exp(1j * y)
    phi = np.array([params.a * ey, params.b / ey], dtype=complex)
    m = transition_symbol(y, params)
    phi = np.linalg.matrix_power(m, n - 1) @ phi
    return complex(phi[0] + phi[1])


def gaussian_limit(y: float, params: PersistentRWParams) -> float:
    """The limiting value exp(-(t^2 / 2 r^2) y^2) of Psi_tau(y / sqrt(tau))."""
    if params.flip == 0.0:
        raise DomainError("gaussian limit divergent for r = 0")
    return math.exp(-(params.persist / (2.0 * params.flip)) * y * y)


def double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def diffusion_constant(L: int, coin: CoinParams) -> float:
    """D(L): zero for odd L, (L-1)!! (t^2/r^2)^{L/2} for even L."""
    if L < 1:
        raise DomainError("moment order must be a positive integer")
    if L % 2 == 1:
        return 0.0
    if coin.r == 0.0:
        raise DomainError("diffusion constant diverges for r = 0 (ballistic)")
    return double_factorial(L - 1) * (coin.t ** 2 / coin.r ** 2) ** (L // 2)


def hermite_zero(L: int) -> float:
    """H_L(0) for the probabilists' Hermite polynomials."""
    if L % 2 == 1:
        return 0.0
    return float((-1) ** (L // 2) * double_factorial(L - 1))


def moment_scaling(L: int, coin: CoinParams, phi0, n_list) -> list[tuple[int, float]]:
    """Exact scaled moments (n, sum_k k^L w_k(n) / n^{L/2}) along n_list."""
    params = prw_params(phi0, coin)
    tables = prw_distribution_series(params, n_list)
    return [(tab.n, tab.moment(L) / tab.n ** (L / 2.0)) for tab in tables]


def write_distribution_csv(path, table: DistributionTable) -> None:
    """CSV rows (site, prob, n, kind)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["site", "prob", "n", "kind"])
        for k, p in zip(table.sites, table.probs):
            writer.writerow([int(k), repr(float(p)), table.n, table.kind])


def write_moment_scaling_csv(path, L: int, rows) -> None:
    """CSV rows (n, L, ratio)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "L", "ratio"])
        for n, ratio in rows:
            writer.writerow([int(n), L, repr(float(ratio))])
