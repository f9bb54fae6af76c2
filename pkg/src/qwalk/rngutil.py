"""Deterministic RNG streams for disorder replicas.

Replica k of a run with master seed s draws from ``SeedSequence((s, k))``,
so results do not depend on how replicas are scheduled across workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np


def replica_rng(master_seed: int, replica: int) -> np.random.Generator:
    """Independent generator for one disorder replica."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, replica)))


def master_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def map_replicas(fn, n_replicas: int, workers: int = 1, chunksize: int = 1):
    """Apply ``fn(replica_index)`` for every replica, in replica order.

    With ``workers > 1`` the work is farmed out to a process pool; ``fn``
    must then be picklable (a module-level function or functools.partial).
    The returned list is ordered by replica index regardless of scheduling.
    """
    indices = range(n_replicas)
    if workers <= 1 or n_replicas <= 1:
        return [fn(i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, indices, chunksize=max(chunksize, 1)))
