"""Backend selection: compiled Cython kernels with a pure-python fallback.

Set DIRAC_GAP_PURE=1 to skip the extension even when it is built. The
active choice is exposed as BACKEND ("compiled" or "python").
"""

from __future__ import annotations

import os

if os.environ.get("DIRAC_GAP_PURE", "").strip() not in ("", "0"):
    from . import _fallback as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _fallback as _impl

BACKEND: str = _impl.BACKEND_NAME
negcount = _impl.negcount
weighted_tridiag = _impl.weighted_tridiag
shoot = _impl.shoot
