"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set QBOLTZ_KERNELS=py to force the fallback or =c to insist on the extension
(raising if it never got built).  ACTIVE_IMPL reports which one won.
"""

from __future__ import annotations

import os

from . import _kernels_py

_choice = os.environ.get("QBOLTZ_KERNELS", "auto").lower()
if _choice not in ("auto", "c", "py"):
    raise ImportError(f"QBOLTZ_KERNELS must be auto, c, or py (got {_choice!r})")

_impl = None
if _choice in ("auto", "c"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _choice == "c":
            raise ImportError("QBOLTZ_KERNELS=c but the compiled kernel module is missing")
if _impl is None:
    _impl = _kernels_py

ACTIVE_IMPL: str = _impl.IMPL

apply_flip = _impl.apply_flip
apply_phase = _impl.apply_phase
apply_h = _impl.apply_h
apply_swap = _impl.apply_swap
