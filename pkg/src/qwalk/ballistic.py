"""Deterministic-walk analysis in Fourier space.

The translation-invariant walk is multiplication by V(x) = diag(e^{-ix},
e^{ix}) C under f(x) = sum_k psi_k e^{-ikx}.  Its unimodular eigenvalue
branches alpha_j(x) = e^{i phi_j(x)} carry the transport: the physical
group velocity is v_j = -phi_j'(x), obtained from the characteristic
polynomial as v_j = (i tau'(x) / (alpha_j - alpha_other)) with tau = tr V,
and the quadratic-growth constant of the second moment is

    B = (1/2pi) Int_0^{2pi} sum_j v_j(x)^2 ||P_j(x) f(x)||^2 dx.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .coins import CoinParams
from .errors import DomainError, ValidationError
from .states import WalkState

UNITARITY_TOL = 1e-12

DIAGONAL_EPS = 1e-9

DEFAULT_GRID = 1024


def as_coin_matrix(coin) -> np.ndarray:
    """Accept a CoinParams (zero phases) or an explicit 2x2 unitary."""
    if isinstance(coin, CoinParams):
        return coin.matrix()
    c = np.asarray(coin, dtype=complex)
    if c.shape != (2, 2):
        raise ValidationError("coin must be a 2x2 matrix")
    if np.max(np.abs(c.conj().T @ c - np.eye(2))) > UNITARITY_TOL:
        raise ValidationError("coin matrix is not unitary")
    return c


def symbol(x: float, coin) -> np.ndarray:
    """The multiplication symbol V(x) = diag(e^{-ix}, e^{ix}) C."""
    c = as_coin_matrix(coin)
    return np.diag([np.exp(-1j * x), np.exp(1j * x)]) @ c


@dataclass
class BandsData:
    """Tracked eigenphases, group velocities, and projectors on a grid."""

    x: np.ndarray
    eigenvalues: np.ndarray = field(repr=False)   # (2, N) complex
    velocities: np.ndarray = field(repr=False)    # (2, N) real
    projectors: np.ndarray = field(repr=False)    # (2, N, 2, 2) complex
    coin: np.ndarray = field(repr=False)

    @property
    def eigenphases(self) -> np.ndarray:
        return np.angle(self.eigenvalues)


def _eig_pair(v: np.ndarray, tau: complex, det: complex):
    disc = np.sqrt(tau * tau - 4.0 * det + 0j)
    return (tau + disc) / 2.0, (tau - disc) / 2.0


def bands(coin, grid_size: int = DEFAULT_GRID) -> BandsData:
    """Branch-tracked band structure of the walk symbol.

    Branches are continued along the grid by nearest-eigenvalue matching;
    a diagonal coin (the only case with band crossings) uses its exact
    closed-form branches instead.
    """
    if grid_size < 16:
        raise DomainError("grid_size must be at least 16")
    c = as_coin_matrix(coin)
    xs = np.linspace(0.0, 2.0 * math.pi, grid_size, endpoint=False)
    a, d = c[0, 0], c[1, 1]
    b = c[0, 1]
    evals = np.empty((2, grid_size), dtype=complex)
    vels = np.empty((2, grid_size))
    projs = np.empty((2, grid_size, 2, 2), dtype=complex)
    if abs(b) < DIAGONAL_EPS:
        # diagonal coin: exact branches e^{-ix} a and e^{ix} d cross, but
        # the analytic continuation through the crossing is the same pair
        evals[0] = np.exp(-1j * xs) * a
        evals[1] = np.exp(1j * xs) * d
        vels[0] = 1.0
        vels[1] = -1.0
        projs[0] = np.array([[1.0, 0.0], [0.0, 0.0]])
        projs[1] = np.array([[0.0, 0.0], [0.0, 1.0]])
        return BandsData(x=xs, eigenvalues=evals, velocities=vels,
                         projectors=projs, coin=c)
    det_c = complex(np.linalg.det(c))
    prev = None
    eye = np.eye(2)
    for i, x in enumerate(xs):
         phase = np.exp(-1j * x)
        v = np.array([[phase * c[0, 0], phase * c[0, 1]],
                      [c[1, 0] / phase, c[1, 1] / phase]])
        tau = phase * a + d / phase
        dtau = -1j * phase * a + 1j * d / phase
        a1, a2 = _eig_pair(v, tau, det_c)
        if prev is not None and (abs(a1 - prev[0]) + abs(a2 - prev[1]) >
                                 abs(a2 - prev[0]) + abs(a1 - prev[1])):
            a1, a2 = a2, a1
        prev = (a1, a2)
        gap = a1 - a2
        evals[0, i], evals[1, i] = a1, a2
        vels[0, i] = (1j * dtau / gap).real
        vels[1, i] = (1j * dtau / -gap).real
        projs[0, i] = (v - a2 * eye) / gap
        projs[1, i] = (v - a1 * eye) / -gap
    return BandsData(x=xs, eigenvalues=evals, velocities=vels,
                     projectors=projs, coin=c)


def _fourier_components(state: WalkState, xs: np.ndarray) -> np.ndarray:
    """f(x) = sum_k psi_k e^{-ikx} on the grid, shape (2, N)."""
    lo, hi = state.window
    k_lo, k_hi = lo // 2, hi // 2
    sites = np.arange(k_lo, k_hi + 1)
    up = np.array([state.amplitude(2 * k) for k in sites])
    dn = np.array([state.amplitude(2 * k + 1) for k in sites])
    basis = np.exp(-1j * np.outer(sites, xs))
    return np.vstack([up @ basis, dn @ basis])


@dataclass(frozen=True)
class BallisticResult:
    B: float
    quad_error: float
    grid_size: int


def ballistic_constant(coin, initial: WalkState,
                       grid_size: int = DEFAULT_GRID) -> BallisticResult:
    """Quadratic-growth constant of the second moment for the deterministic
    walk started from ``initial``.

    Composite trapezoid on the periodic domain; the quadrature error is
    estimated by comparing with the half-resolution subgrid.
    """
    nrm = initial.norm_sq()
    if abs(nrm - 1.0) > 1e-9:
        raise ValidationError(f"initial state norm^2 = {nrm}, expected 1")
    data = bands(coin, grid_size)
    f = _fourier_components(initial, data.x)
    integrand = np.zeros(grid_size)
    for j in (0, 1):
        pf = np.einsum("nab,bn->an", data.projectors[j], f)
        integrand += data.velocities[j] ** 2 * np.sum(np.abs(pf) ** 2, axis=0)
    b_full = float(np.mean(integrand))
    b_half = float(np.mean(integrand[::2]))
    err = abs(b_full - b_half) + 8.0 * np.finfo(float).eps * (1.0 + b_full)
    return BallisticResult(B=b_full, quad_error=err, grid_size=grid_size)


def write_bands_csv(path, data: BandsData) -> None:
    """CSV rows (x, branch, eigenphase, group_velocity)."""
    phases = data.eigenphases
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "branch", "eigenphase", "group_velocity"])
        for j in (0, 1):
            for i, x in enumerate(data.x):
                writer.writerow([repr(float(x)), j, repr(float(phases[j, i])),
                                 repr(float(data.velocities[j, i]))])
