"""Sparse permutation backend: op semantics and equivalence to the dense
backend on circuits that permute basis states."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from qboltz.errors import SimulationError
from qboltz.gates import Primitive, h, x
from qboltz.layout import GridSpec, VelocityTable, build_layout
from qboltz.permsim import BitFlip, CompareFlip, FieldAdd, SparseState, gate_as_bitflip
from qboltz.qarith import add_const, compare_lt, fourier_move
from qboltz.reflection import Box
from qboltz.sim import build_substep
from qboltz.statevector import StateVector

F = Fraction


def test_basis_and_norm():
    s = SparseState.basis(4, 0b1001)
    assert s.norm() == pytest.approx(1.0)
    assert s.probabilities() == {0b1001: pytest.approx(1.0)}


def test_from_pairs_sorted_support():
    s = SparseState.from_pairs(3, {5: 0.6, 1: 0.8})
    assert list(s.indices) == [1, 5]
    assert s.norm() == pytest.approx(1.0)


def test_duplicate_indices_rejected():
    with pytest.raises(SimulationError):
        SparseState(3, np.array([1, 1], dtype=np.int64),
                    np.array([0.5, 0.5], dtype=np.complex128))


def test_from_prep_matches_dense_prep():
    xs, hs = (0, 3), (1, 2)
    sparse = SparseState.from_prep(5, xs, hs)
    dense = StateVector(5)
    for q in xs:
        dense.apply_gate(x(q))
    for q in hs:
        dense.apply_gate(h(q))
    np.testing.assert_allclose(sparse.to_dense(), dense.amps, atol=1e-12)
    assert len(sparse.indices) == 4


def test_bitflip_op():
    s = SparseState.basis(3, 0b001)
    s._apply_op(BitFlip(0b100, 0b001, 0b001))
    assert s.probabilities() == {0b101: pytest.approx(1.0)}
    s._apply_op(BitFlip(0b100, 0b010, 0b010))  # control off
    assert s.probabilities() == {0b101: pytest.approx(1.0)}


def test_fieldadd_op_wraps():
    s = SparseState.basis(4, 0b0111)
    s._apply_op(FieldAdd(0, 3, 1, 0, 0))
    assert s.probabilities() == {0b0000: pytest.approx(1.0)}


def test_fieldadd_respects_controls():
    s = SparseState.basis(4, 0b0001)
    s._apply_op(FieldAdd(0, 3, 1, 0b1000, 0b1000))
    assert s.probabilities() == {0b0001: pytest.approx(1.0)}


def test_compareflip_op():
    s = SparseState.basis(4, 0b0010)
    s._apply_op(CompareFlip(0, 3, 5, 0b1000))
    assert s.probabilities() == {0b1010: pytest.approx(1.0)}
    s2 = SparseState.basis(4, 0b0110)
    s2._apply_op(CompareFlip(0, 3, 5, 0b1000))
    assert s2.probabilities() == {0b0110: pytest.approx(1.0)}


def test_op_inverses():
    ops = [
        BitFlip(0b10, 0b01, 0b01),
        FieldAdd(1, 3, 5, 0b10000, 0b10000),
        CompareFlip(0, 2, 2, 0b1000),
    ]
    for op in ops:
        s = SparseState.from_pairs(5, {3: 0.5, 9: 0.5, 17: 0.5, 21: 0.5})
        before = dict(s.probabilities())
        s._apply_op(op)
        s._apply_op(op.inverse())
        assert s.probabilities() == pytest.approx(before)


def test_gate_as_bitflip():
    op = gate_as_bitflip(x(2, ((0, 1), (3, 0))))
    assert op.flip_mask == 0b0100
    assert op.ctrl_mask == 0b1001
    assert op.ctrl_val == 0b0001
    with pytest.raises(SimulationError):
        gate_as_bitflip(h(0))


def test_apply_prefers_perm_ops():
    p = add_const((0, 1, 2), 3)
    assert p.perm_ops is not None
    s = SparseState.basis(3, 2)
    s.apply(p)
    assert s.probabilities() == {5: pytest.approx(1.0)}


def test_apply_walks_children_when_no_ops():
    inner = add_const((0, 2, 4), 1)  # non-contiguous: no perm ops
    assert inner.perm_ops is None
    with pytest.raises(SimulationError, match="X-like"):
        SparseState.basis(5, 0).apply(inner)


def test_apply_handles_x_only_leaves():
    p = Primitive("flips", gates=(x(0), x(2, ((0, 1),))))
    s = SparseState.basis(3, 0)
    s.apply(p)
    assert s.probabilities() == {0b101: pytest.approx(1.0)}


def test_nonpermutation_support_collision_detected():
    # a declared op that merges two support points must be caught
    s = SparseState.from_pairs(2, {0b00: 0.7, 0b01: 0.7})
    bad = Primitive("merge", perm_ops=(BitFlip(0b01, 0b01, 0b00),),
                    gates=(x(0),))
    with pytest.raises(SimulationError, match="not a permutation"):
        s.apply(bad)


def test_perm_matches_dense_on_arithmetic():
    p = Primitive("seq", children=(
        add_const((0, 1, 2), 5),
        compare_lt((0, 1, 2), 4, 3),
        fourier_move((0, 1, 2), ((3, 1), (4, 1)), ((3, 1), (4, 0))),
    ))
    for start in (0, 3, 7, 0b11010):
        sparse = SparseState.basis(5, start)
        sparse.apply(p)
        dense = StateVector.basis(5, start)
        dense.apply(p)
        np.testing.assert_allclose(sparse.to_dense(), dense.amps, atol=1e-9)


def test_perm_matches_dense_on_full_substep():
    from qboltz.reference import ReferenceMap

    layout = build_layout(GridSpec((8, 8)), VelocityTable.from_lists([[1], [1]]))
    boxes = (Box((3, 3), (4, 4)),)
    sub = build_substep(layout, boxes, frozenset({F(1)}))
    ref = ReferenceMap(layout.grid, layout.velocity, boxes)
    pool = np.array(
        [layout.encode_fields(*key) for key in ref.admissible_states()],
        dtype=np.int64,
    )
    rng = np.random.default_rng(8)
    keys = rng.choice(pool, size=24, replace=False)
    amps = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    amps /= np.linalg.norm(amps)
    sparse = SparseState.from_pairs(
        layout.num_qubits, {int(k): a for k, a in zip(keys, amps)}
    )
    dense = StateVector(layout.num_qubits, sparse.to_dense())
    sparse.apply(sub)
    dense.apply(sub)
    np.testing.assert_allclose(sparse.to_dense(), dense.amps, atol=1e-9)
