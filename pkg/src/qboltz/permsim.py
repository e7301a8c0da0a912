"""Sparse permutation backend.

The circuits built here never create superposition outside state prep: every
primitive permutes basis states.  This backend therefore tracks only the
occupied basis indices and their amplitudes, and consumes declared semantic
operations (controlled bit flips, controlled modular adds on a bit field,
comparator flag flips) instead of gate matrices.  A primitive that declares
no semantics and has no children must consist purely of X-like gates, which
convert directly; anything else (a Hadamard mid-circuit) is a hard error,
because it would falsify the sparse representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SimulationError
from .gates import Gate, Primitive


@dataclass(frozen=True)
class BitFlip:
    """index ^= flip_mask wherever (index & ctrl_mask) == ctrl_val."""

    flip_mask: int
    ctrl_mask: int = 0
    ctrl_val: int = 0

    def inverse(self) -> "BitFlip":
        return self


@dataclass(frozen=True)
class FieldAdd:
    """Add delta (mod 2^width) to the bit field at [shift, shift+width), controlled."""

    shift: int
    width: int
    delta: int
    ctrl_mask: int = 0
    ctrl_val: int = 0

    def inverse(self) -> "FieldAdd":
        return FieldAdd(self.shift, self.width, -self.delta, self.ctrl_mask, self.ctrl_val)


@dataclass(frozen=True)
class CompareFlip:
    """Flip flag_bit wherever the field at [shift, shift+width) is < threshold."""

    shift: int
    width: int
    threshold: int
    flag_bit: int

    def inverse(self) -> "CompareFlip":
        return self


PermOp = BitFlip | FieldAdd | CompareFlip


def gate_as_bitflip(gate: Gate) -> BitFlip:
    if gate.kind != "x":
        raise SimulationError(
            f"gate kind {gate.kind!r} has no permutation semantics; "
            "only X-like gates convert implicitly"
        )
    ctrl_mask = 0
    ctrl_val = 0
    for qubit, value in gate.controls:
        ctrl_mask |= 1 << qubit
        ctrl_val |= value << qubit
    return BitFlip(1 << gate.targets[0], ctrl_mask, ctrl_val)


class SparseState:
    """Occupied basis indices with their (complex) amplitudes."""

    __slots__ = ("num_qubits", "indices", "amps")

    def __init__(self, num_qubits: int, indices: np.ndarray, amps: np.ndarray):
        self.num_qubits = num_qubits
        self.indices = np.asarray(indices, dtype=np.int64)
        self.amps = np.asarray(amps, dtype=np.complex128)
        if self.indices.shape != self.amps.shape:
            raise SimulationError("index and amplitude arrays must match")
        if len(np.unique(self.indices)) != len(self.indices):
            raise SimulationError("duplicate basis indices in sparse state")

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "SparseState":
        return cls(num_qubits, np.array([index]), np.array([1.0 + 0.0j]))

    @classmethod
    def from_pairs(cls, num_qubits: int, pairs: dict[int, complex]) -> "SparseState":
        items = sorted(pairs.items())
        idx = np.array([k for k, _ in items], dtype=np.int64)
        amp = np.array([v for _, v in items], dtype=np.complex128)
        return cls(num_qubits, idx, amp)

    @classmethod
    def from_prep(cls, num_qubits: int, x_qubits: tuple[int, ...],
                  h_qubits: tuple[int, ...]) -> "SparseState":
        """Uniform superposition over h_qubits with x_qubits set: the only
        state preparation the sparse backend supports."""
        base = 0
        for q in x_qubits:
            base |= 1 << q
        h_bits = sorted(h_qubits)
        count = 1 << len(h_bits)
        spread = np.zeros(count, dtype=np.int64)
        for rank, q in enumerate(h_bits):
            spread |= ((np.arange(count, dtype=np.int64) >> rank) & 1) << q
        indices = base | spread
        amps = np.full(count, 1.0 / np.sqrt(count), dtype=np.complex128)
        return cls(num_qubits, indices, amps)

    def copy(self) -> "SparseState":
        return SparseState(self.num_qubits, self.indices.copy(), self.amps.copy())

    def _apply_op(self, op: PermOp) -> None:
        idx = self.indices
        if isinstance(op, BitFlip):
            sel = (idx & op.ctrl_mask) == op.ctrl_val
            idx[sel] ^= op.flip_mask
        elif isinstance(op, FieldAdd):
            sel = (idx & op.ctrl_mask) == op.ctrl_val
            modulus = 1 << op.width
            field_mask = (modulus - 1) << op.shift
            sub = idx[sel]
            field = (sub >> op.shift) & (modulus - 1)
            field = (field + op.delta) % modulus
            idx[sel] = (sub & ~field_mask) | (field << op.shift)
        elif isinstance(op, CompareFlip):
            field = (idx >> op.shift) & ((1 << op.width) - 1)
            idx[field < op.threshold] ^= op.flag_bit
        else:
            raise SimulationError(f"unknown permutation op {op!r}")

    def apply(self, primitive: Primitive) -> None:
        if primitive.perm_ops is not None:
            for op in primitive.perm_ops:
                self._apply_op(op)
        elif primitive.children:
            for child in primitive.children:
                self.apply(child)
        else:
            for gate in primitive.gates:
                self._apply_op(gate_as_bitflip(gate))
        if len(np.unique(self.indices)) != len(self.indices):
            raise SimulationError(
                f"primitive {primitive.label!r} is not a permutation on this support"
            )

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(1 << self.num_qubits, dtype=np.complex128)
        out[self.indices] = self.amps
        return out

    def probabilities(self) -> dict[int, float]:
        return {int(i): float(abs(a) ** 2) for i, a in zip(self.indices, self.amps)}
