"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
behaviorally identical. Set ``MONOSUM_PURE_PYTHON=1`` to force the fallback
(used by the parity tests and the benchmark).
"""

import os

from monosum._kernels import fallback as _fallback

if os.environ.get("MONOSUM_PURE_PYTHON", "0") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from monosum._kernels import _speedups as _impl
    except ImportError:
        _impl = _fallback

BACKEND = _impl.BACKEND_NAME
KIND_ODD_POLY = _fallback.KIND_ODD_POLY
KIND_SATURATING = _fallback.KIND_SATURATING

smooth_resolvent_core = _impl.smooth_resolvent_core
pl_resolvent_core = _impl.pl_resolvent_core
