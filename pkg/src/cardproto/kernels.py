"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``CARDPROTO_PURE=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("CARDPROTO_PURE"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
scan_guesses = _impl.scan_guesses
