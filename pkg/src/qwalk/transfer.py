"""Transfer matrices, Lyapunov exponents, and generalized eigenvectors.

For the band walk operator, (U - z) psi = 0 is equivalent to the two-term
recursion  (psi_{2n+1}, psi_{2n}) = T_z(w_{2n}, w_{2n-1}) (psi_{2n-1},
psi_{2n-2})  with

    T_z(theta, eta) = e^{-i theta} / (z t) *
        [[z^2 e^{i(eta+theta)} + r^2, -r t], [-r t, t^2]],

whose determinant is exactly e^{-i(theta - eta)}.  Norms are Frobenius
throughout; the Lyapunov limit does not depend on that choice.
"""

from __future__ import annotations

import cmath
import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import backend
from .coins import CoinParams, PhaseDistribution, PhaseSequence
from .errors import (DegenerateWitnessError, DomainError, SingularCoinError,
                     WindowError)
from .rngutil import map_replicas, replica_rng

_SQRT2 = math.sqrt(2.0)

DEFAULT_CHUNK = 1 << 15


def transfer_matrix(z: complex, theta: float, eta: float,
                    coin: CoinParams) -> np.ndarray:
    """The 2x2 transfer matrix T_z(theta, eta)."""
    if z == 0:
        raise DomainError("transfer matrix undefined at z = 0")
    if coin.t == 0.0:
        raise SingularCoinError("transfer matrix undefined for t = 0")
    r, t = coin.r, coin.t
    f = cmath.exp(-1j * theta) / (z * t)
    return np.array([
        [(z * z * cmath.exp(1j * (eta + theta)) + r * r) * f, -r * t * f],
        [-r * t * f, t * t * f],
    ])


def transfer_det(theta: float, eta: float) -> complex:
    """Exact determinant e^{-i(theta - eta)} of T_z(theta, eta)."""
    return cmath.exp(-1j * (theta - eta))


def _split_stream(phases: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # stream w_1, w_2, ..., w_2n; factor i uses theta = w_2i, eta = w_{2i-1}
    phases = np.asarray(phases, dtype=float)
    if len(phases) % 2 != 0:
        raise DomainError("phase stream must have even length (pairs per factor)")
    return phases[1::2], phases[0::2]


def product_matrix_naive(z: complex, phases: np.ndarray,
                         coin: CoinParams) -> np.ndarray:
    """Unstabilized product T_n ... T_1 (test oracle; overflows for large n)."""
    thetas, etas = _split_stream(phases)
    p = np.eye(2, dtype=complex)
    for th, et in zip(thetas, etas):
        p = transfer_matrix(z, th, et, coin) @ p
    return p


def product_log_norm(z: complex, phases: np.ndarray, coin: CoinParams) -> float:
    """log || T_z(w_{2n}, w_{2n-1}) ... T_z(w_2, w_1) ||_F, renormalizing the
    running product to unit norm every multiplication so that products of
    length up to 1e7 cannot overflow."""
    if coin.t == 0.0:
        raise SingularCoinError("transfer product undefined for t = 0")
    if z == 0:
        raise DomainError("z must be nonzero")
    thetas, etas = _split_stream(phases)
    p = (1.0 / _SQRT2, 0.0, 0.0, 1.0 / _SQRT2)
    acc, p = backend.transfer_product_chunk(p, thetas, etas, complex(z),
                                            coin.r, coin.t)
    return acc + math.log(_SQRT2)


@dataclass
class LyapunovEstimate:
    """Monte Carlo Lyapunov exponent at one spectral parameter."""

    z: complex
    gamma_hat: float
    stderr: float
    n: int
    replicas: int
    per_replica: np.ndarray | None = field(default=None, repr=False)


def _lyap_replica(rep: int, z: complex, coin: CoinParams,
                  dist: PhaseDistribution, n: int, seed: int,
                  chunk: int) -> float:
    rng = replica_rng(seed, rep)
    p = (1.0 / _SQRT2, 0.0, 0.0, 1.0 / _SQRT2)
    acc = math.log(_SQRT2)
    left = n
    while left > 0:
        m = min(chunk, left)
        draws = dist.sample(rng, 2 * m)
        delta, p = backend.transfer_product_chunk(
            p, draws[1::2], draws[0::2], complex(z), coin.r, coin.t)
        acc += delta
        left -= m
    return acc / n


def lyapunov_estimate(z: complex, coin: CoinParams, dist: PhaseDistribution,
                      n: int, replicas: int, seed: int,
                      chunk: int = DEFAULT_CHUNK,
                      workers: int = 1) -> LyapunovEstimate:
    """Estimate gamma(z) as the replica mean of (1/n) log ||T_z(w, n)||.

    Phases stream through the product kernel in chunks, so memory stays
    O(chunk) for products of any length.  Replica j draws from the generator
    seeded by (seed, j); the error bar is the standard error over replicas,
    and results do not depend on the worker count.
    """
    if n < 1 or replicas < 1:
        raise DomainError("n and replicas must be positive")
    if coin.t == 0.0:
        raise SingularCoinError("Lyapunov exponent undefined for t = 0")
    if dist.is_point_mass:
        warnings.warn("point-mass phases violate the positivity theorem's "
                      "hypotheses; estimate returned anyway", stacklevel=2)
    fn = partial(_lyap_replica, z=complex(z), coin=coin, dist=dist, n=n,
                 seed=seed, chunk=chunk)
    vals = np.array(map_replicas(fn, replicas, workers))
    gamma_hat = float(np.mean(vals))
    stderr = (float(np.std(vals, ddof=1) / math.sqrt(replicas))
              if replicas > 1 else 0.0)
    return LyapunovEstimate(z=complex(z), gamma_hat=gamma_hat, stderr=stderr,
                            n=n, replicas=replicas, per_replica=vals)


def lyapunov_scan(z_values, coin: CoinParams, dist: PhaseDistribution,
                  n: int, replicas: int, seed: int,
                  workers: int = 1) -> list[LyapunovEstimate]:
    """Estimates over a grid of spectral parameters, one shared master seed."""
    return [lyapunov_estimate(z, coin, dist, n, replicas, seed, workers=workers)
            for z in z_values]


def annulus_grid(radii=(0.9, 0.95, 1.0, 1.05, 1.1), angles: int = 8) -> list[complex]:
    """Default z-grid: an annulus around the unit circle."""
    out = []
    for rho in radii:
        for j in range(angles):
            out.append(rho * cmath.exp(2j * math.pi * j / angles))
    return out


def write_lyapunov_csv(path, estimates: list[LyapunovEstimate]) -> None:
    """CSV rows (re_z, im_z, gamma_hat, stderr, n, replicas)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["re_z", "im_z", "gamma_hat", "stderr", "n", "replicas"])
        for e in estimates:
            writer.writerow([repr(e.z.real), repr(e.z.imag), repr(e.gamma_hat),
                             repr(e.stderr), e.n, e.replicas])


# --------------------------------------------------------------------------
# real 4x4 embedding
# --------------------------------------------------------------------------

_J = np.array([[0.0, 1.0], [-1.0, 0.0]])
_I2 = np.eye(2)


def tau_embed(a: np.ndarray) -> np.ndarray:
    """Embed a complex 2x2 matrix into the real 4x4 matrices, sending each
    entry w to Re(w) I + Im(w) J.  Multiplicative, and the Frobenius norm
    doubles in square: ||tau(A)|| = sqrt(2) ||A||."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (2, 2):
        raise DomainError("tau embedding defined for 2x2 matrices")
    out = np.empty((4, 4))
    for i in range(2):
        for j in range(2):
            w = a[i, j]
            out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = w.real * _I2 + w.imag * _J
    return out


def product_log_norm_tau(z: complex, phases: np.ndarray,
                         coin: CoinParams) -> float:
    """Stabilized log-norm of the product of tau-embedded 4x4 factors.

    Equals product_log_norm + log(sqrt(2)) up to rounding, which is the
    norm-scaling of the embedding; the Lyapunov slope is identical.
    """
    thetas, etas = _split_stream(phases)
    p = np.eye(4) / 2.0  # unit Frobenius norm
    acc = math.log(2.0)
    for th, et in zip(thetas, etas):
        p = tau_embed(transfer_matrix(z, th, et, coin)) @ p
        s = float(np.linalg.norm(p))
        acc += math.log(s)
        p /= s
    return acc


def lyapunov_estimate_tau(z: complex, coin: CoinParams, dist: PhaseDistribution,
                          n: int, replicas: int, seed: int) -> LyapunovEstimate:
    """Lyapunov estimate through the 4x4 real embedding (equivalence check).

    The per-product norm differs from the 2x2 route by the constant factor
    sqrt(2), which vanishes in the 1/n limit.
    """
    vals = np.empty(replicas)
    for rep in range(replicas):
        rng = replica_rng(seed, rep)
        draws = dist.sample(rng, 2 * n)
        vals[rep] = product_log_norm_tau(z, draws, coin) / n
    gamma_hat = float(np.mean(vals))
    stderr = (float(np.std(vals, ddof=1) / math.sqrt(replicas))
              if replicas > 1 else 0.0)
    return LyapunovEstimate(z=complex(z), gamma_hat=gamma_hat, stderr=stderr,
                            n=n, replicas=replicas, per_replica=vals)


# --------------------------------------------------------------------------
# noncompactness witness
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessResult:
    matrix: np.ndarray
    spectral_radius: float


def noncompactness_witness(z: complex, theta: float, eta: float,
                           coin: CoinParams) -> WitnessResult:
    """The z-independent product M = T_z(eta,theta) T_z(eta,eta)^{-1}
    T_z(theta,theta)^{-1} T_z(theta,eta), a positive matrix with an
    eigenvalue strictly above one whenever theta != eta and r, t > 0."""
    if z == 0:
        raise DomainError("witness needs z != 0")
    if coin.t == 0.0 or coin.r == 0.0:
        raise SingularCoinError("witness needs 0 < r, t < 1")
    if abs(cmath.exp(1j * (theta - eta)) - 1.0) < 1e-12:
        raise DegenerateWitnessError("witness degenerates to identity at theta = eta")

    def witness_at(zz):
        t1 = transfer_matrix(zz, eta, theta, coin)
        t2 = np.linalg.inv(transfer_matrix(zz, eta, eta, coin))
        t3 = np.linalg.inv(transfer_matrix(zz, theta, theta, coin))
        t4 = transfer_matrix(zz, theta, eta, coin)
        return t1 @ t2 @ t3 @ t4

    m = witness_at(z)
    m_other = witness_at(z * 1.7 * cmath.exp(0.31j))
    if np.max(np.abs(m - m_other)) > 1e-10:
        raise AssertionError("witness product unexpectedly depends on z")
    radius = float(np.max(np.abs(np.linalg.eigvals(m))))
    if radius <= 1.0:
        raise AssertionError("witness spectral radius not above one")
    return WitnessResult(matrix=m, spectral_radius=radius)


# --------------------------------------------------------------------------
# generalized eigenvectors with semifinite boundary conditions
# --------------------------------------------------------------------------

def boundary_vector_plus(z: complex, w_left: float, coin: CoinParams) -> np.ndarray:
    """Normalized (phi_{2n0+1}, phi_{2n0}) satisfying the closed-left-end
    condition  phi_{2n0+1} = (z e^{i w_{2n0}} - r) phi_{2n0} / t."""
    top = z * cmath.exp(1j * w_left) - coin.r
    v = np.array([top, coin.t], dtype=complex)
    return v / np.linalg.norm(v)


def boundary_vector_minus(z: complex, w_right: float, coin: CoinParams) -> np.ndarray:
    """Normalized (phi_{2m0}, phi_{2m0-1}) satisfying the closed-right-end
    condition  phi_{2m0} = z e^{i w_{2m0-1}} phi_{2m0-1}."""
    v = np.array([z * cmath.exp(1j * w_right), 1.0], dtype=complex)
    return v / np.linalg.norm(v)


def generalized_eigenvector(z: complex, coin: CoinParams,
                            phases: PhaseSequence, window,
                            side: str) -> np.ndarray:
    """Solution of (U^{+/-} - z) phi = 0 on an even-endpoint window.

    side="plus": the half-line operator on [2n0, inf); the normalized left
    boundary pair seeds the transfer recursion upward.  side="minus": the
    operator on (-inf, 2m0]; the right boundary pair is propagated downward
    with inverse transfer matrices.  Returns phi over the inclusive window.
    """
    lo, hi = int(window[0]), int(window[1])
    if lo % 2 != 0 or hi % 2 != 0 or hi - lo < 4:
        raise WindowError("window needs even endpoints spanning >= 2 pairs")
    if side not in ("plus", "minus"):
        raise DomainError("side must be 'plus' or 'minus'")
    if coin.t == 0.0:
        raise SingularCoinError("generalized eigenvector needs t > 0")
    if not phases.covers(lo, hi):
        raise WindowError(f"phases {phases.window} must cover ({lo}, {hi})")
    z = complex(z)
    n0, m0 = lo // 2, hi // 2
    phi = np.zeros(hi - lo + 1, dtype=complex)
    if side == "plus":
        pair = boundary_vector_plus(z, phases[lo], coin)
        phi[1], phi[0] = pair[0], pair[1]
        for n in range(n0 + 1, m0 + 1):
            pair = transfer_matrix(z, phases[2 * n], phases[2 * n - 1], coin) @ pair
            phi[2 * n - lo] = pair[1]
            if 2 * n + 1 <= hi:
                phi[2 * n + 1 - lo] = pair[0]
    else:
        top = boundary_vector_minus(z, phases[hi - 1], coin)
        phi[hi - lo], phi[hi - 1 - lo] = top[0], top[1]
        # the row at 2m0 fixes phi_{2m0-2} from the boundary pair
        below = (z * cmath.exp(1j * phases[hi]) * top[0] + coin.r * top[1]) / coin.t
        phi[hi - 2 - lo] = below
        pair = np.array([top[1], below], dtype=complex)
        for n in range(m0 - 1, n0, -1):
            pair = np.linalg.solve(
                transfer_matrix(z, phases[2 * n], phases[2 * n - 1], coin), pair)
            phi[2 * n - 1 - lo] = pair[0]
            phi[2 * n - 2 - lo] = pair[1]
    return phi
