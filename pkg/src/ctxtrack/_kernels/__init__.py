"""Hot numeric kernels with a compiled core and a pure numpy fallback.

The compiled extension is preferred when importable; set CTXTRACK_PURE=1 to
force the fallback. ``BACKEND`` names the implementation in use.
"""

import os

from . import pure as _pure

if os.environ.get("CTXTRACK_PURE"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

match_count = _impl.match_count
hist_intersection = _impl.hist_intersection
cov_log_distance = _impl.cov_log_distance
cov_log_distance_paired = _impl.cov_log_distance_paired
best_stump = _impl.best_stump


def backend_name() -> str:
    return BACKEND
