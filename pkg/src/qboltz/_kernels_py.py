"""Vectorized numpy implementations of the dense statevector hot loops.

Same call signatures as the compiled extension; `kernels` picks whichever
imports.  All functions mutate `amps` in place.  Masks are plain ints over
basis indices (qubit q contributes bit 1 << q).
"""

from __future__ import annotations

import numpy as np

IMPL = "py"

_SQRT_HALF = 1.0 / np.sqrt(2.0)

_IDX_CACHE: dict[int, np.ndarray] = {}


def _indices(n: int) -> np.ndarray:
    arr = _IDX_CACHE.get(n)
    if arr is None:
        arr = np.arange(n, dtype=np.int64)
        _IDX_CACHE[n] = arr
    return arr


def apply_flip(amps: np.ndarray, flip_bit: int, ctrl_mask: int, ctrl_val: int) -> None:
    idx = _indices(amps.shape[0])
    low = np.flatnonzero((idx & (ctrl_mask | flip_bit)) == ctrl_val)
    high = low | flip_bit
    tmp = amps[low].copy()
    amps[low] = amps[high]
    amps[high] = tmp


def apply_phase(amps: np.ndarray, target_bit: int, ctrl_mask: int, ctrl_val: int,
                factor: complex) -> None:
    idx = _indices(amps.shape[0])
    sel = (idx & (ctrl_mask | target_bit)) == (ctrl_val | target_bit)
    amps[sel] *= factor


def apply_h(amps: np.ndarray, target_bit: int, ctrl_mask: int, ctrl_val: int) -> None:
    idx = _indices(amps.shape[0])
    low = np.flatnonzero((idx & (ctrl_mask | target_bit)) == ctrl_val)
    high = low | target_bit
    a0 = amps[low]
    a1 = amps[high]
    amps[low] = (a0 + a1) * _SQRT_HALF
    amps[high] = (a0 - a1) * _SQRT_HALF


def apply_swap(amps: np.ndarray, bit_a: int, bit_b: int, ctrl_mask: int, ctrl_val: int) -> None:
    idx = _indices(amps.shape[0])
    low = np.flatnonzero((idx & (ctrl_mask | bit_a | bit_b)) == (ctrl_val | bit_a))
    high = low ^ (bit_a | bit_b)
    tmp = amps[low].copy()
    amps[low] = amps[high]
    amps[high] = tmp
