"""Pure-numpy implementations of the hot kernels.

The compiled extension ``qwalk._ckernels`` mirrors these signatures; the
active implementation is chosen in :mod:`qwalk.backend`.  Arrays are always
complex128 (or float64 for the classical recursion) and are modified in
place.  Index ``i`` of a state array corresponds to the relabeled lattice
index ``offset + i``; even relabeled indices are spin-up, odd are spin-down.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

BACKEND_NAME = "python"


def _pair_starts(offset: int, a: int, b: int, want_even: bool):
    """First array index >= a-2 whose relabeled index has the wanted parity,
    and the exclusive stop so that pairs (i, i+1) stay inside [0, b+2)."""
    lo = max(a - 2, 0)
    parity = 0 if want_even else 1
    if (offset + lo) % 2 != parity:
        lo += 1
    return lo


def walk_step_spatial(psi: np.ndarray, offset: int, a: int, b: int,
                      r: float, t: float, dphase: np.ndarray):
    """One step of D * S_o * S_e on the active slice [a, b) of ``psi``.

    ``dphase[i]`` holds exp(-i*omega_m) for relabeled index m = offset + i.
    Returns the new active range; the caller guarantees two slack entries
    beyond it on each side.
    """
    na, nb = max(a - 2, 0), min(b + 2, psi.shape[0])
    # S_e: blocks [[r, t], [t, -r]] on pairs starting at even relabeled index
    i0 = _pair_starts(offset, a, b, want_even=True)
    hi = nb - 1
    if i0 < hi:
        u = psi[i0:hi:2]
        v = psi[i0 + 1:hi + 1:2]
        u_new = r * u + t * v
        v_new = t * u - r * v
        psi[i0:hi:2] = u_new
        psi[i0 + 1:hi + 1:2] = v_new
    # S_o: swap on pairs starting at odd relabeled index
    i0 = _pair_starts(offset, a, b, want_even=False)
    if i0 < hi:
        u = psi[i0:hi:2].copy()
        psi[i0:hi:2] = psi[i0 + 1:hi + 1:2]
        psi[i0 + 1:hi + 1:2] = u
    psi[na:nb] *= dphase[na:nb]
    return na, nb


def walk_step_temporal(psi: np.ndarray, offset: int, a: int, b: int,
                       r: float, t: float, up_factor: complex, dn_factor: complex):
    """One temporal-disorder step: same shift structure, but the phase
    factor depends only on the parity of the relabeled index."""
    na, nb = max(a - 2, 0), min(b + 2, psi.shape[0])
    i0 = _pair_starts(offset, a, b, want_even=True)
    hi = nb - 1
    if i0 < hi:
        u = psi[i0:hi:2]
        v = psi[i0 + 1:hi + 1:2]
        u_new = r * u + t * v
        v_new = t * u - r * v
        psi[i0:hi:2] = u_new
        psi[i0 + 1:hi + 1:2] = v_new
    i0 = _pair_starts(offset, a, b, want_even=False)
    if i0 < hi:
        u = psi[i0:hi:2].copy()
        psi[i0:hi:2] = psi[i0 + 1:hi + 1:2]
        psi[i0 + 1:hi + 1:2] = u
    even0 = na if (offset + na) % 2 == 0 else na + 1
    odd0 = na if (offset + na) % 2 == 1 else na + 1
    psi[even0:nb:2] *= up_factor
    psi[odd0:nb:2] *= dn_factor
    return na, nb


def transfer_product_chunk(p, thetas, etas, z: complex, r: float, t: float):
    """Multiply the running 2x2 product by T_z(theta_i, eta_i) for each i,
    renormalizing to unit Frobenius norm every step.

    ``p`` is a length-4 complex sequence (p00, p01, p10, p11) of the current
    normalized product; returns (log_accumulated, new_p).
    """
    p00, p01, p10, p11 = complex(p[0]), complex(p[1]), complex(p[2]), complex(p[3])
    zt = z * t
    r2 = r * r
    rt = r * t
    t2 = t * t
    z2 = z * z
    acc = 0.0
    for i in range(len(thetas)):
        th = thetas[i]
        et = etas[i]
        f = cmath.exp(-1j * th) / zt
        a = (z2 * cmath.exp(1j * (et + th)) + r2) * f
        b = -rt * f
        d = t2 * f
        q00 = a * p00 + b * p10
        q01 = a * p01 + b * p11
        q10 = b * p00 + d * p10
        q11 = b * p01 + d * p11
        s = math.sqrt(abs(q00) ** 2 + abs(q01) ** 2 + abs(q10) ** 2 + abs(q11) ** 2)
        acc += math.log(s)
        inv = 1.0 / s
        p00, p01, p10, p11 = q00 * inv, q01 * inv, q10 * inv, q11 * inv
    return acc, (p00, p01, p10, p11)


def prw_steps(wp: np.ndarray, wm: np.ndarray, t2: float, r2: float, nsteps: int):
    """Advance the persistent-random-walk pair (w+, w-) by ``nsteps``.

    Arrays are indexed by lattice site shifted so that index j holds site
    j - n_max; both are updated in place over their full length.
    """
    for _ in range(nsteps):
        wp_prev = wp.copy()
        wm_prev = wm.copy()
        wp[1:] = t2 * wp_prev[:-1] + r2 * wm_prev[:-1]
        wp[0] = 0.0
        wm[:-1] = t2 * wm_prev[1:] + r2 * wp_prev[1:]
        wm[-1] = 0.0
    return wp, wm
