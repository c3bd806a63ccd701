"""Kernel backend selection.

The compiled Cython core is preferred when it imports cleanly; otherwise the
pure-Python twin is used.  Setting the environment variable SIPDYN_PURE=1
forces the fallback (useful for benchmarking and debugging).
"""

import os

from . import _pure as pure

if os.environ.get("SIPDYN_PURE", "") not in ("", "0"):
    impl = pure
else:
    try:
        from . import _core as impl  # type: ignore[no-redef]
    except ImportError:
        impl = pure

BACKEND = impl.BACKEND

REASON_T_END = pure.REASON_T_END
REASON_ALL_EXTINCT = pure.REASON_ALL_EXTINCT
REASON_CONVERGED = pure.REASON_CONVERGED
REASON_UNDERFLOW = pure.REASON_UNDERFLOW
REASON_STEP_LIMIT = pure.REASON_STEP_LIMIT

integrate = impl.integrate
nullcline_root_scan = impl.nullcline_root_scan
nullcline_residual = impl.nullcline_residual
