"""Dense backend semantics: gate action, the qubit cap, and the norm policy."""

from __future__ import annotations

import numpy as np
import pytest

from qboltz.errors import SimulationError
from qboltz.gates import Primitive, cnot, h, phase, swap, x
from qboltz.statevector import MAX_DENSE_QUBITS, StateVector


def test_default_state_is_all_zeros():
    s = StateVector(3)
    assert s.probability_of(0) == 1.0
    assert s.norm() == pytest.approx(1.0)


def test_basis_state():
    s = StateVector.basis(4, 0b1010)
    assert s.probability_of(0b1010) == 1.0


def test_x_flips_target():
    s = StateVector(2)
    s.apply_gate(x(1))
    assert s.probability_of(0b10) == 1.0


def test_controlled_x_respects_control_value():
    s = StateVector.basis(2, 0b00)
    s.apply_gate(x(1, ((0, 1),)))
    assert s.probability_of(0b00) == 1.0
    s.apply_gate(x(1, ((0, 0),)))
    assert s.probability_of(0b10) == 1.0


def test_h_makes_uniform_pair():
    s = StateVector(1)
    s.apply_gate(h(0))
    np.testing.assert_allclose(s.probabilities(), [0.5, 0.5])


def test_phase_only_hits_target_one():
    s = StateVector(1)
    s.apply_gate(h(0))
    s.apply_gate(phase(0, np.pi))
    s.apply_gate(h(0))
    assert s.probability_of(1) == pytest.approx(1.0)


def test_swap_exchanges_qubits():
    s = StateVector.basis(2, 0b01)
    s.apply_gate(swap(0, 1))
    assert s.probability_of(0b10) == 1.0


def test_cnot_entangles():
    s = StateVector(2)
    s.apply_gate(h(0))
    s.apply_gate(cnot(0, 1))
    probs = s.probabilities()
    assert probs[0b00] == pytest.approx(0.5)
    assert probs[0b11] == pytest.approx(0.5)


def test_apply_primitive_walks_children():
    p = Primitive(
        label="outer",
        children=(
            Primitive(label="a", gates=(x(0),)),
            Primitive(label="b", gates=(x(1),)),
        ),
    )
    s = StateVector(2)
    s.apply(p)
    assert s.probability_of(0b11) == 1.0


def test_qubit_cap_enforced():
    with pytest.raises(SimulationError, match="permutation backend"):
        StateVector(MAX_DENSE_QUBITS + 1)


def test_norm_policy_refuses_renormalize():
    s = StateVector(1)
    s.amps[0] = 2.0
    with pytest.raises(SimulationError, match="refusing to renormalize"):
        s.apply(Primitive(label="noop", gates=(x(0),)))


def test_amps_are_copied_in():
    arr = np.zeros(4, dtype=np.complex128)
    arr[1] = 1.0
    s = StateVector(2, arr)
    arr[1] = 0.0
    assert s.probability_of(1) == 1.0


def test_wrong_length_rejected():
    with pytest.raises(SimulationError):
        StateVector(2, np.ones(3, dtype=np.complex128))


def test_primitive_then_inverse_is_identity():
    rng = np.random.default_rng(3)
    amps = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    amps /= np.linalg.norm(amps)
    p = Primitive(label="mix", gates=(h(0), phase(1, 0.4, ((0, 1),)), swap(1, 2), x(2, ((0, 1),))))
    s = StateVector(3, amps)
    s.apply(p)
    s.apply(p.inverse())
    np.testing.assert_allclose(s.amps, amps, atol=1e-12)
