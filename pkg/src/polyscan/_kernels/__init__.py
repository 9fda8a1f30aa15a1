"""Ray-casting kernels: compiled extension with a pure-NumPy fallback.

The compiled module is preferred when it was built; set POLYSCAN_PURE_PYTHON=1
to force the NumPy implementation. Both backends implement the same functions
with identical arithmetic, so results match bit for bit.
"""

import os

from . import _raycast_np

if os.environ.get("POLYSCAN_PURE_PYTHON") == "1":
    _impl = _raycast_np
    BACKEND = "numpy"
else:
    try:
        from . import _raycast as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _raycast_np
        BACKEND = "numpy"

first_hits = _impl.first_hits
segment_hits = _impl.segment_hits

__all__ = ["BACKEND", "first_hits", "segment_hits", "backend_name"]


def backend_name() -> str:
    """Name of the active kernel backend ("compiled" or "numpy")."""
    return BACKEND
