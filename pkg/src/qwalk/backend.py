"""Select the compiled kernel core or the pure-numpy fallback.

The Cython extension is preferred when importable.  Set the environment
variable ``QWALK_BACKEND=python`` to force the fallback (used by the tests
and the backend benchmark).
"""

from __future__ import annotations

import os

from . import _fallback

_impl = _fallback
if os.environ.get("QWALK_BACKEND", "").lower() not in ("python", "fallback"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _fallback

walk_step_spatial = _impl.walk_step_spatial
walk_step_temporal = _impl.walk_step_temporal
transfer_product_chunk = _impl.transfer_product_chunk
prw_steps = _impl.prw_steps

BACKEND_NAME: str = _impl.BACKEND_NAME


def backend_name() -> str:
    """Name of the active kernel implementation ("compiled" or "python")."""
    return BACKEND_NAME
