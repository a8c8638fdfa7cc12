"""Split-scan backend selection, decided once at import time.

The compiled kernel is used when its extension module importing works;
otherwise the numpy fallback takes over silently (both produce bit-identical
results). Set SLAMAUDIT_PURE_PYTHON=1 before import to force the fallback,
e.g. for benchmarking or debugging.
"""

from __future__ import annotations

import os

if os.environ.get("SLAMAUDIT_PURE_PYTHON") == "1":
    from ._scan_python import scan_splits

    _BACKEND = "python"
else:
    try:
        from ._scan_cython import scan_splits  # type: ignore[no-redef]

        _BACKEND = "cython"
    except ImportError:
        from ._scan_python import scan_splits  # type: ignore[no-redef]

        _BACKEND = "python"

__all__ = ["scan_splits", "active_backend"]


def active_backend() -> str:
    """Name of the split-scan implementation in use: 'cython' or 'python'."""
    return _BACKEND
