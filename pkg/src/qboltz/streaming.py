"""Streaming substep: mark the speeds that hop this substep, move coordinates.

Marking writes, per dimension, a stepping flag that is 1 exactly when the
magnitude index matches one of the substep's hopping speeds.  The flag stays
set through reflection (whose rules condition on it) and is cleared by an
identical mark block at the end of the timestep.

The coordinate move is one shared QFT pair per dimension: transform, +1
phase ladder controlled on (flag=1, direction=+), -1 ladder controlled on
(flag=1, direction=-), transform back.  Dimensions with no hopping speed
this substep are skipped entirely.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .errors import ConstructionError
from .gates import Gate, Primitive, x
from .layout import DIM_NAMES, RegisterLayout
from .qarith import fourier_move


def stepping_patterns(layout: RegisterLayout, dim: int,
                      stepping: frozenset[Fraction]) -> tuple[int, ...]:
    """Magnitude-index patterns of this dimension's speeds hopping now."""
    return tuple(
        i for i, m in enumerate(layout.velocity.magnitudes[dim]) if m in stepping
    )


def stepping_dims(layout: RegisterLayout, stepping: frozenset[Fraction]) -> tuple[int, ...]:
    return tuple(
        d for d in range(layout.ndim) if stepping_patterns(layout, d, stepping)
    )


def mark_gates(layout: RegisterLayout, dim: int,
               patterns: Iterable[int]) -> tuple[Gate, ...]:
    """X-merged multi-controlled flips onto the stepping flag.

    Each pattern is framed by X gates on its zero bits so the flip controls
    on all-ones; consecutive patterns re-flip only the bits whose framing
    differs, and the last frame is undone at the end.
    """
    mag = layout.vel_mag[dim]
    target = layout.flag_step[dim]
    full = (1 << len(mag)) - 1
    gates: list[Gate] = []
    frame = 0
    for pattern in patterns:
        if not 0 <= pattern <= full:
            raise ConstructionError(f"magnitude pattern {pattern} exceeds {len(mag)} bits")
        want = ~pattern & full
        delta = want ^ frame
        for b, q in enumerate(mag):
            if (delta >> b) & 1:
                gates.append(x(q))
        frame = want
        gates.append(x(target, tuple((q, 1) for q in mag)))
    for b, q in enumerate(mag):
        if (frame >> b) & 1:
            gates.append(x(q))
    return tuple(gates)


def build_mark(layout: RegisterLayout, dim: int, stepping: frozenset[Fraction],
               label: str | None = None) -> Primitive | None:
    patterns = stepping_patterns(layout, dim, stepping)
    if not patterns:
        return None
    return Primitive(
        label if label is not None else f"mark-{DIM_NAMES[dim]}",
        gates=mark_gates(layout, dim, patterns),
    )


def build_streaming(layout: RegisterLayout, stepping: frozenset[Fraction]) -> Primitive:
    children: list[Primitive] = []
    for dim in range(layout.ndim):
        mark = build_mark(layout, dim, stepping)
        if mark is None:
            continue
        name = DIM_NAMES[dim]
        move = fourier_move(
            layout.grid_regs[dim],
            plus_controls=((layout.flag_step[dim], 1), (layout.vel_dir[dim], 1)),
            minus_controls=((layout.flag_step[dim], 1), (layout.vel_dir[dim], 0)),
            label=f"move-{name}",
        )
        children.append(Primitive(f"stream-{name}", children=(mark, move)))
    if not children:
        raise ConstructionError("substep moves nothing; scheduler should not emit it")
    return Primitive("streaming", children=tuple(children))


def build_unmark(layout: RegisterLayout, stepping: frozenset[Fraction]) -> Primitive:
    """Clear the stepping flags: the mark block is its own inverse."""
    children = []
    for dim in range(layout.ndim):
        mark = build_mark(layout, dim, stepping, label=f"unmark-{DIM_NAMES[dim]}")
        if mark is not None:
            children.append(mark)
    return Primitive("cleanup", children=tuple(children))
