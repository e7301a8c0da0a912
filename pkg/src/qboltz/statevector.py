"""Dense statevector backend.

Holds all 2^n complex amplitudes and applies every gate of a primitive;
this is the route that exercises the circuits as circuits.  Capped at 24
qubits; larger registers must use the sparse permutation backend.
"""

from __future__ import annotations

import cmath

import numpy as np

from . import kernels
from .errors import SimulationError
from .gates import Gate, Primitive

MAX_DENSE_QUBITS = 24

NORM_TOLERANCE = 1e-8


def _masks(gate: Gate) -> tuple[int, int]:
    ctrl_mask = 0
    ctrl_val = 0
    for qubit, value in gate.controls:
        ctrl_mask |= 1 << qubit
        ctrl_val |= value << qubit
    return ctrl_mask, ctrl_val


class StateVector:
    __slots__ = ("num_qubits", "amps")

    def __init__(self, num_qubits: int, amps: np.ndarray | None = None):
        if num_qubits > MAX_DENSE_QUBITS:
            raise SimulationError(
                f"dense backend is capped at {MAX_DENSE_QUBITS} qubits "
                f"(asked for {num_qubits}); use the permutation backend"
            )
        self.num_qubits = num_qubits
        size = 1 << num_qubits
        if amps is None:
            self.amps = np.zeros(size, dtype=np.complex128)
            self.amps[0] = 1.0
        else:
            amps = np.asarray(amps, dtype=np.complex128)
            if amps.shape != (size,):
                raise SimulationError(f"amplitude array must have length {size}")
            self.amps = amps.copy()

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        state = cls(num_qubits)
        state.amps[0] = 0.0
        state.amps[index] = 1.0
        return state

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amps)

    def apply_gate(self, gate: Gate) -> None:
        ctrl_mask, ctrl_val = _masks(gate)
        if gate.kind == "x":
            kernels.apply_flip(self.amps, 1 << gate.targets[0], ctrl_mask, ctrl_val)
        elif gate.kind == "phase":
            kernels.apply_phase(
                self.amps, 1 << gate.targets[0], ctrl_mask, ctrl_val,
                cmath.exp(1j * gate.theta),
            )
        elif gate.kind == "h":
            kernels.apply_h(self.amps, 1 << gate.targets[0], ctrl_mask, ctrl_val)
        else:
            kernels.apply_swap(
                self.amps, 1 << gate.targets[0], 1 << gate.targets[1],
                ctrl_mask, ctrl_val,
            )

    def apply(self, primitive: Primitive, check_norm: bool = True) -> None:
        for gate in primitive.iter_gates():
            self.apply_gate(gate)
        if check_norm:
            drift = abs(self.norm() - 1.0)
            if drift > NORM_TOLERANCE:
                raise SimulationError(
                    f"norm drifted by {drift:.3e} after {primitive.label!r}; "
                    "refusing to renormalize"
                )

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def probability_of(self, index: int) -> float:
        return float(abs(self.amps[index]) ** 2)
