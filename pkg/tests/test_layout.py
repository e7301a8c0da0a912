"""Register layout: qubit assignment, speed encoding, validation rules."""

from __future__ import annotations

from fractions import Fraction

import pytest

from qboltz.errors import ConstructionError
from qboltz.layout import GridSpec, VelocityTable, build_layout


def test_grid_validation():
    GridSpec((4, 8))
    GridSpec((2, 2, 2))
    with pytest.raises(ConstructionError):
        GridSpec((8,))
    with pytest.raises(ConstructionError):
        GridSpec((8, 8, 8, 8))
    with pytest.raises(ConstructionError):
        GridSpec((6, 8))
    with pytest.raises(ConstructionError):
        GridSpec((8, 1))


def test_velocity_table_validation():
    VelocityTable.from_lists([[1, 2], [2]])
    with pytest.raises(ConstructionError):
        # the raw constructor does not sort for you
        VelocityTable(((Fraction(2), Fraction(1)), (Fraction(1), Fraction(2))))
    with pytest.raises(ConstructionError):
        VelocityTable.from_lists([[1, 1], [1]])
    with pytest.raises(ConstructionError):
        VelocityTable.from_lists([[0], [1]])
    with pytest.raises(ConstructionError):
        VelocityTable.from_lists([[-1], [1]])


def test_relative_speed_limit():
    with pytest.raises(ConstructionError, match="relative speed limit"):
        VelocityTable.from_lists([[1, 2], [1]])
    with pytest.raises(ConstructionError, match="relative speed limit"):
        VelocityTable.from_lists([[1], [1, 3]])
    # equal per-dimension maxima pass, even with unequal table sizes
    VelocityTable.from_lists([[1, 2], [2]])
    VelocityTable.from_lists([["1/2"], ["1/2"]])


def test_desk_scale_register_map():
    layout = build_layout(GridSpec((64, 64)), VelocityTable.from_lists([[1], [1]]))
    assert layout.num_qubits == 22
    roles = layout.qubit_roles()
    assert roles[0] == "vel-x-mag0"
    assert roles[1] == "vel-x-dir"
    assert roles[2] == "vel-y-mag0"
    assert roles[3] == "vel-y-dir"
    assert roles[4:10] == tuple(f"grid-x-{b}" for b in range(6))
    assert roles[10:16] == tuple(f"grid-y-{b}" for b in range(6))
    assert roles[16] == "flag-step-x"
    assert roles[17] == "flag-step-y"
    assert roles[18] == "flag-obstacle-x"
    assert roles[19] == "flag-obstacle-y"
    assert roles[20] == "cmp-lower-0"
    assert roles[21] == "cmp-upper-0"


def test_qubit_counts():
    lay16 = build_layout(GridSpec((8, 8)), VelocityTable.from_lists([[1], [1]]))
    assert lay16.num_qubits == 16
    assert len(lay16.ancilla_qubits) == 6
    lay16b = build_layout(GridSpec((8, 8)), VelocityTable.from_lists([[1, 2], [1, 2]]))
    assert lay16b.num_qubits == 16
    lay3d = build_layout(GridSpec((8, 8, 8)), VelocityTable.from_lists([[1], [1], [1]]))
    assert lay3d.num_qubits == 25
    assert len(lay3d.ancilla_qubits) == 10


def test_ancilla_count_rule(layout_8x8_m1):
    d = layout_8x8_m1.ndim
    assert len(layout_8x8_m1.ancilla_qubits) == 4 * d - 2


def test_speed_encoding_round_trip():
    vt = VelocityTable.from_lists([[1, 2], [1, 2]])
    assert vt.mag_bits(0) == 1
    assert vt.field_bits(0) == 2
    # direction bit set means positive; all-zero field is minus the smallest magnitude
    assert vt.encode_speed(0, 1) == 0b10
    assert vt.encode_speed(0, 2) == 0b11
    assert vt.encode_speed(0, -1) == 0b00
    assert vt.encode_speed(0, -2) == 0b01
    assert vt.decode_field(0, 0b00) == Fraction(-1)
    assert vt.decode_field(0, 0b01) == Fraction(-2)
    assert vt.decode_field(0, 0b10) == Fraction(1)
    assert vt.decode_field(0, 0b11) == Fraction(2)


def test_encode_speed_sign_bit():
    vt = VelocityTable.from_lists([[1, 2], [1, 2]])
    assert vt.encode_speed(0, 1) == vt.encode_speed(0, -1) | 0b10
    assert vt.encode_speed(1, "2") & 0b10


def test_encode_speed_rejects_unknown():
    vt = VelocityTable.from_lists([[1], [1]])
    with pytest.raises(ConstructionError):
        vt.encode_speed(0, 3)
    with pytest.raises(ConstructionError):
        vt.encode_speed(0, 0)


def test_padding_fields_decode_to_none():
    vt = VelocityTable.from_lists([[1, 2, 3], [1, 2, 3]])
    assert vt.mag_bits(0) == 2
    assert vt.decode_field(0, 3) is None
    assert vt.decode_field(0, 0b111) is None
    assert vt.decode_field(0, 2) == Fraction(-3)


def test_state_encode_decode_round_trip(layout_8x8_m12):
    lay = layout_8x8_m12
    index = lay.encode_state((5, 2), (-2, 1))
    dec = lay.decode(index)
    assert dec.positions == (5, 2)
    assert dec.speeds == (Fraction(-2), Fraction(1))
    assert dec.directions == (0, 1)
    assert dec.clean
    dirty = index | (1 << lay.flag_step[0])
    assert not lay.decode(dirty).clean


def test_role_qubit_inverse_of_roles(layout_8x8_m1):
    for q, role in enumerate(layout_8x8_m1.qubit_roles()):
        assert layout_8x8_m1.role_qubit(role) == q
    with pytest.raises(ConstructionError):
        layout_8x8_m1.role_qubit("vel-w-dir")


def test_describe_mentions_every_qubit(layout_8x8_m1):
    text = layout_8x8_m1.describe()
    for q in range(layout_8x8_m1.num_qubits):
        assert f"q{q}" in text


def test_dimension_mismatch_rejected():
    with pytest.raises(ConstructionError):
        build_layout(GridSpec((8, 8)), VelocityTable.from_lists([[1], [1], [1]]))


def test_registers_are_disjoint_and_complete(layout_8x8_m12):
    lay = layout_8x8_m12
    seen: list[int] = []
    for dim in range(lay.ndim):
        seen.extend(lay.vel_mag[dim])
        seen.append(lay.vel_dir[dim])
        seen.extend(lay.grid_regs[dim])
    seen.extend(lay.ancilla_qubits)
    assert sorted(seen) == list(range(lay.num_qubits))
