"""Obstacle handling: wall derivation, flag-clearing rules, and the four
reflection stages wired into a substep."""

from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from qboltz.errors import ConstructionError
from qboltz.layout import GridSpec, VelocityTable, build_layout
from qboltz.reflection import (
    Box,
    build_eject,
    build_flip,
    build_reflection,
    build_reset,
    build_wall_mark,
    derive_reset_rules,
    derive_walls,
    interior_cells,
    validate_obstacles,
)
from qboltz.sim import build_substep
from qboltz.statevector import StateVector

F = Fraction


@pytest.fixture(scope="module")
def lay88():
    return build_layout(GridSpec((8, 8)), VelocityTable.from_lists([[1], [1]]))


def run_basis(primitive, layout, index: int) -> int:
    s = StateVector.basis(layout.num_qubits, index)
    s.apply(primitive)
    hits = np.flatnonzero(np.abs(s.amps) > 1e-6)
    assert hits.size == 1
    assert abs(s.amps[hits[0]] - 1.0) <= 1e-9
    return int(hits[0])


def test_box_validation():
    Box((1, 1), (2, 3))
    with pytest.raises(ConstructionError):
        Box((2, 1), (1, 3))
    with pytest.raises(ConstructionError):
        Box((1, 1), (2, 2, 2))


def test_box_cells_and_contains():
    b = Box((3, 3), (4, 4))
    assert sorted(b.cells()) == [(3, 3), (3, 4), (4, 3), (4, 4)]
    assert b.contains((4, 3))
    assert not b.contains((2, 3))
    assert interior_cells((b,)) == frozenset(b.cells())


def test_obstacle_validation(grid8):
    validate_obstacles((Box((3, 3), (4, 4)),), grid8)
    with pytest.raises(ConstructionError, match="shell would wrap"):
        validate_obstacles((Box((0, 3), (2, 4)),), grid8)
    with pytest.raises(ConstructionError, match="shell would wrap"):
        validate_obstacles((Box((3, 3), (4, 7)),), grid8)
    with pytest.raises(ConstructionError, match="thinner"):
        validate_obstacles((Box((3, 3), (3, 4)),), grid8)
    with pytest.raises(ConstructionError, match="closer than two"):
        validate_obstacles((Box((1, 1), (2, 2)), Box((4, 1), (5, 2))), grid8)
    # two free cells between boxes is enough
    validate_obstacles(
        (Box((1, 1), (2, 2)), Box((5, 1), (6, 2))), GridSpec((16, 8))
    )


def test_wall_derivation_channel_obstacle():
    walls = derive_walls((Box((34, 11), (36, 49)),))
    as_tuples = {(w.normal_dim, w.side, w.face_coord, w.into_bit) for w in walls}
    assert as_tuples == {
        (0, -1, 34, 1),
        (0, +1, 36, 0),
        (1, -1, 11, 1),
        (1, +1, 49, 0),
    }
    for w in walls:
        tangential = 1 - w.normal_dim
        assert w.spans == ((tangential,) + ((11, 49) if w.normal_dim == 0 else (34, 36)),)


def test_reset_rule_census():
    census = Counter(r.kind for r in derive_reset_rules((Box((34, 11), (36, 49)),)))
    assert census == {"face": 4, "face-end": 8, "re-reset": 8, "corner": 4}
    census2 = Counter(r.kind for r in derive_reset_rules((Box((3, 3), (4, 4)),)))
    assert census2 == {"face-end": 8, "re-reset": 8, "corner": 4}
    census3 = Counter(r.kind for r in derive_reset_rules((Box((1, 1, 1), (2, 2, 2)),)))
    assert census3 == {"face-corner": 24, "re-reset": 96, "edge-end": 24, "corner-3d": 8}
    census3b = Counter(r.kind for r in derive_reset_rules((Box((2, 2, 2), (5, 4, 3)),)))
    assert set(census3b) == {
        "face", "face-end", "face-corner", "edge", "edge-end", "corner-3d", "re-reset",
    }


def test_reset_rules_deterministic():
    boxes = (Box((3, 3), (4, 4)),)
    assert derive_reset_rules(boxes) == derive_reset_rules(boxes)


def test_corrective_flag_matches_kind():
    for rule in derive_reset_rules((Box((1, 1, 1), (3, 3, 3)),)):
        assert rule.corrective == (rule.kind == "re-reset")
        assert rule.targets
        assert all(bit in (0, 1) for _, bit in rule.dirs)
        assert all(any(dim == t for dim, _ in rule.exact) for t in rule.targets)


def rule_matches(rule, pos, dirs, steps) -> bool:
    for dim, coord in rule.exact:
        if pos[dim] != coord:
            return False
    for dim, lo, hi in rule.spans:
        if not lo <= pos[dim] <= hi:
            return False
    for dim, bit in rule.dirs:
        if dirs[dim] != bit:
            return False
    for dim, bit in rule.steps:
        if steps[dim] != bit:
            return False
    return True


def check_rule_overlap_structure(box, positions, ndim):
    """At any concrete (position, directions, steps): at most one base rule
    fires, at most one corrective fires, and a corrective only ever fires
    together with the base rule it cancels (same location class and targets).
    Net flips per flag are therefore 0 or 1, never an accumulation."""
    rules = derive_reset_rules((box,))
    for pos in positions:
        if box.contains(pos):
            continue
        for dirs in itertools.product((0, 1), repeat=ndim):
            for steps in itertools.product((0, 1), repeat=ndim):
                matched = [r for r in rules if rule_matches(r, pos, dirs, steps)]
                bases = [r for r in matched if not r.corrective]
                corrs = [r for r in matched if r.corrective]
                assert len(bases) <= 1, (pos, dirs, steps, bases)
                assert len(corrs) <= 1, (pos, dirs, steps, corrs)
                if corrs:
                    assert bases, (pos, dirs, steps, corrs)
                    b, c = bases[0], corrs[0]
                    assert (b.exact, b.spans, b.targets) == (c.exact, c.spans, c.targets)


def test_rule_overlap_structure_2d():
    check_rule_overlap_structure(
        Box((3, 3), (4, 4)), itertools.product(range(8), repeat=2), 2
    )


def test_rule_overlap_structure_2d_wide():
    check_rule_overlap_structure(
        Box((2, 3), (5, 4)), itertools.product(range(8), repeat=2), 2
    )


def test_rule_overlap_structure_3d_shell():
    shell = itertools.product(range(1, 6), range(1, 5), range(1, 5))
    check_rule_overlap_structure(Box((2, 2, 2), (4, 3, 3)), shell, 3)


def test_wall_mark_flags_entering_states(lay88):
    box = Box((3, 3), (4, 4))
    mark = build_wall_mark(lay88, (box,), (0, 1))
    step_x = 1 << lay88.flag_step[0]
    obs_x = 1 << lay88.flag_obstacle[0]

    # entered the low x wall layer while stepping: flagged
    entering = lay88.encode_state((3, 4), (1, 1)) | step_x
    assert run_basis(mark, lay88, entering) == entering | obs_x
    # same cell, outgoing direction: untouched
    leaving = lay88.encode_state((3, 4), (-1, 1)) | step_x
    assert run_basis(mark, lay88, leaving) == leaving
    # same cell and direction but this dim did not step: untouched
    parked = lay88.encode_state((3, 4), (1, 1))
    assert run_basis(mark, lay88, parked) == parked
    # outside the tangential span: untouched
    outside = lay88.encode_state((3, 5), (1, 1)) | step_x
    assert run_basis(mark, lay88, outside) == outside
    # high x wall needs the negative direction
    high = lay88.encode_state((4, 3), (-1, 1)) | step_x
    assert run_basis(mark, lay88, high) == high | obs_x


def test_wall_mark_restores_comparator_ancillae(lay88):
    box = Box((3, 3), (4, 4))
    mark = build_wall_mark(lay88, (box,), (0, 1))
    cmp_mask = 0
    for lo, up in lay88.cmp_pairs:
        cmp_mask |= (1 << lo) | (1 << up)
    step_x = 1 << lay88.flag_step[0]
    index = lay88.encode_state((3, 3), (1, -1)) | step_x
    out = run_basis(mark, lay88, index)
    assert out & cmp_mask == 0


def test_flip_is_one_cnot_per_dimension(lay88):
    flip = build_flip(lay88, (0, 1))
    assert flip.gate_count() == 2
    for gate, dim in zip(flip.gates, (0, 1)):
        assert gate.kind == "x"
        assert gate.targets == (lay88.vel_dir[dim],)
        assert gate.controls == ((lay88.flag_obstacle[dim], 1),)
    assert build_flip(lay88, (1,)).gate_count() == 1


def test_eject_moves_flagged_coordinate(lay88):
    eject = build_eject(lay88, (0, 1))
    obs_x = 1 << lay88.flag_obstacle[0]
    flagged = lay88.encode_state((3, 4), (-1, 1)) | obs_x
    out = run_basis(eject, lay88, flagged)
    dec = lay88.decode(out)
    assert dec.positions == (2, 4)   # moved along the flipped (negative) direction
    clean = lay88.encode_state((3, 4), (-1, 1))
    assert run_basis(eject, lay88, clean) == clean


def test_reset_drops_rules_for_idle_dimensions():
    lay = build_layout(GridSpec((8, 8)), VelocityTable.from_lists([[1, 2], [2]]))
    reset = build_reset(lay, (Box((3, 3), (4, 4)),), (0,))
    step_y = lay.flag_step[1]
    for gate in reset.iter_gates():
        assert (step_y, 1) not in gate.controls
    full = build_reset(lay, (Box((3, 3), (4, 4)),), (0, 1))
    assert full.gate_count() > reset.gate_count()


def test_reflection_absent_when_trivial(lay88):
    assert build_reflection(lay88, (), (0, 1)) is None
    assert build_reflection(lay88, (Box((3, 3), (4, 4)),), ()) is None


def substep_result(layout, boxes, stepping, positions, speeds):
    sub = build_substep(layout, boxes, stepping)
    index = layout.encode_state(positions, speeds)
    return layout.decode(run_basis(sub, layout, index))


def test_head_on_bounce(lay88):
    boxes = (Box((3, 3), (4, 4)),)
    dec = substep_result(lay88, boxes, frozenset({F(1)}), (2, 3), (1, 1))
    assert dec.positions == (2, 4)
    assert dec.speeds == (F(-1), F(1))
    assert dec.clean


def test_corner_bounce(lay88):
    boxes = (Box((3, 3), (4, 4)),)
    dec = substep_result(lay88, boxes, frozenset({F(1)}), (2, 2), (1, 1))
    assert dec.positions == (2, 2)
    assert dec.speeds == (F(-1), F(-1))
    assert dec.clean


def test_graze_past_the_corner(lay88):
    # slides diagonally across the box corner without entering: no reflection
    boxes = (Box((3, 3), (4, 4)),)
    dec = substep_result(lay88, boxes, frozenset({F(1)}), (2, 4), (1, 1))
    assert dec.positions == (3, 5)
    assert dec.speeds == (F(1), F(1))
    assert dec.clean


def test_pass_by_lands_on_reset_cell(lay88):
    # arrives at a face-end reset location from outside; the corrective rule
    # must cancel the base rule so the state stays unflagged
    boxes = (Box((3, 3), (4, 4)),)
    dec = substep_result(lay88, boxes, frozenset({F(1)}), (3, 5), (-1, -1))
    assert dec.positions == (2, 4)
    assert dec.speeds == (F(-1), F(-1))
    assert dec.clean


def test_wall_layer_exit_is_free(lay88):
    # sitting in the wall layer moving outward: streams out, nothing flags
    boxes = (Box((3, 3), (4, 4)),)
    dec = substep_result(lay88, boxes, frozenset({F(1)}), (2, 3), (-1, 1))
    assert dec.positions == (1, 4)
    assert dec.speeds == (F(-1), F(1))
    assert dec.clean
