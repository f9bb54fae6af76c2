"""Finitely supported states on the relabeled lattice and their moments."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

TRIM_THRESHOLD = 1e-300


@dataclass(frozen=True)
class WalkState:
    """Complex amplitudes over a contiguous range of relabeled indices.

    ``amplitudes[i]`` belongs to relabeled index ``offset + i``; even indices
    are spin-up at site m/2, odd are spin-down at site (m-1)/2.  Treated as a
    value type: never mutate ``amplitudes`` after construction.
    """

    offset: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        amps.setflags(write=False)

    @property
    def window(self) -> tuple[int, int]:
        return self.offset, self.offset + len(self.amplitudes) - 1

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def amplitude(self, m: int) -> complex:
        i = m - self.offset
        if 0 <= i < len(self.amplitudes):
            return complex(self.amplitudes[i])
        return 0.0 + 0.0j

    def support(self) -> tuple[int, int]:
        """Inclusive relabeled range of nonzero amplitudes (0,-1 if empty)."""
        nz = np.nonzero(self.amplitudes)[0]
        if len(nz) == 0:
            return 0, -1
        return self.offset + int(nz[0]), self.offset + int(nz[-1])

    def sites(self) -> np.ndarray:
        """Physical sites k touched by the window, ascending."""
        lo, hi = self.window
        return np.arange(_site_of(lo), _site_of(hi) + 1)


def _site_of(m: int) -> int:
    # e_{2k} and e_{2k+1} both live at site k; floor division does the map
    return m // 2


def basis_state(spin: str, site: int) -> WalkState:
    """Unit vector: spin "up" maps to relabeled index 2*site, "down" to
    2*site + 1."""
    if spin not in ("up", "down"):
        raise ValidationError(f"spin must be 'up' or 'down', got {spin!r}")
    m = 2 * site + (0 if spin == "up" else 1)
    return WalkState(offset=m, amplitudes=np.array([1.0 + 0.0j]))


def superposition_state(components: dict[tuple[str, int], complex]) -> WalkState:
    """Normalized state from {(spin, site): amplitude} components."""
    if not components:
        raise ValidationError("empty superposition")
    idx = {}
    for (spin, site), amp in components.items():
        if spin not in ("up", "down"):
            raise ValidationError(f"spin must be 'up' or 'down', got {spin!r}")
        m = 2 * site + (0 if spin == "up" else 1)
        idx[m] = idx.get(m, 0.0) + complex(amp)
    lo, hi = min(idx), max(idx)
    amps = np.zeros(hi - lo + 1, dtype=complex)
    for m, amp in idx.items():
        amps[m - lo] = amp
    nrm = math.sqrt(float(np.sum(np.abs(amps) ** 2)))
    if nrm == 0.0:
        raise ValidationError("superposition has zero norm")
    return WalkState(offset=lo, amplitudes=amps / nrm)


def site_probabilities(state: WalkState) -> tuple[np.ndarray, np.ndarray]:
    """(sites, probabilities): |psi_{2k}|^2 + |psi_{2k+1}|^2 per site k."""
    lo, hi = state.window
    k_lo, k_hi = _site_of(lo), _site_of(hi)
    probs = np.zeros(k_hi - k_lo + 1)
    p = np.abs(state.amplitudes) ** 2
    for i, m in enumerate(range(lo, hi + 1)):
        probs[_site_of(m) - k_lo] += p[i]
    return np.arange(k_lo, k_hi + 1), probs


def position_moment(state: WalkState, L: int, absolute: bool = False) -> float:
    """Sum_k k^L (|psi_{2k}|^2 + |psi_{2k+1}|^2) in the physical site
    coordinate; with ``absolute`` uses |k|^L.  L = 0 returns the squared
    norm.  Accumulated with compensated summation (k^L spans many orders
    of magnitude against tiny weights)."""
    if L < 0:
        raise ValidationError("moment order must be nonnegative")
    sites, probs = site_probabilities(state)
    kvals = np.abs(sites) if absolute else sites
    terms = (kvals.astype(float) ** L) * probs
    return float(math.fsum(terms))


def trim(state: WalkState, threshold: float = TRIM_THRESHOLD) -> WalkState:
    """Drop window edges whose amplitudes are below ``threshold``.

    Exact dynamics has a strictly finite light cone, so this never fires in
    exact arithmetic; it exists to keep long runs from dragging dead zeros.
    """
    mag = np.abs(state.amplitudes)
    keep = np.nonzero(mag >= threshold)[0]
    if len(keep) == 0:
        return WalkState(offset=state.offset, amplitudes=np.zeros(1, dtype=complex))
    lo, hi = int(keep[0]), int(keep[-1])
    return WalkState(offset=state.offset + lo,
                     amplitudes=state.amplitudes[lo:hi + 1].copy())


def write_state_csv(state: WalkState, path) -> None:
    """Snapshot as CSV rows (site, spin, re, im)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["site", "spin", "re", "im"])
        lo, hi = state.window
        for m in range(lo, hi + 1):
            amp = state.amplitude(m)
            spin = "up" if m % 2 == 0 else "down"
            writer.writerow([_site_of(m), spin, repr(amp.real), repr(amp.imag)])


def read_state_csv(path) -> WalkState:
    components: dict[tuple[str, int], complex] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            amp = complex(float(row["re"]), float(row["im"]))
            components[(row["spin"], int(row["site"]))] = amp
    idx = {2 * site + (0 if spin == "up" else 1): amp
           for (spin, site), amp in components.items()}
    lo, hi = min(idx), max(idx)
    amps = np.zeros(hi - lo + 1, dtype=complex)
    for m, amp in idx.items():
        amps[m - lo] = amp
    return WalkState(offset=lo, amplitudes=amps)
