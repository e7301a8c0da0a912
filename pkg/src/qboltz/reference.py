"""Classical reference dynamics: the exact transport-and-bounce map.

Implemented straight from the physics, with no knowledge of the circuit
construction: move every state one cell along each of its stepping
components, and if that lands inside a box, identify the components that
crossed a wall, reverse exactly those, and put the state back at its old
coordinates in the crossed dimensions.  Both simulation backends are checked
against this map state-for-state.

Keys are (positions, velocity_fields) tuples with fields encoded exactly as
the register layout encodes them, so a key plus a layout pins down a basis
index.  Padding fields are rejected: the reference refuses to evolve a state
the velocity table cannot decode.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import SimulationError
from .layout import GridSpec, VelocityTable
from .reflection import Box

StateKey = tuple[tuple[int, ...], tuple[int, ...]]


class ReferenceMap:
    def __init__(self, grid: GridSpec, velocity: VelocityTable, boxes: Sequence[Box]):
        if grid.ndim != velocity.ndim:
            raise SimulationError("grid and velocity table dimensionalities differ")
        self.grid = grid
        self.velocity = velocity
        self.boxes = tuple(boxes)
        self.cell_owner: dict[tuple[int, ...], int] = {}
        for bi, box in enumerate(self.boxes):
            for cell in box.cells():
                self.cell_owner[cell] = bi

    def step_key(self, key: StateKey, stepping: frozenset[Fraction]) -> StateKey:
        positions, fields = key
        if positions in self.cell_owner:
            raise SimulationError(f"state at {positions} starts inside an obstacle")
        speeds = []
        for dim, field in enumerate(fields):
            speed = self.velocity.decode_field(dim, field)
            if speed is None:
                raise SimulationError(
                    f"velocity field {field} in dimension {dim} is padding"
                )
            speeds.append(speed)
        moved = [abs(s) in stepping for s in speeds]
        post = tuple(
            (p + (1 if speeds[d] > 0 else -1)) % self.grid.shape[d] if moved[d] else p
            for d, p in enumerate(positions)
        )
        owner = self.cell_owner.get(post)
        if owner is None:
            return post, fields
        box = self.boxes[owner]
        crossed = tuple(
            d for d in range(self.grid.ndim)
            if moved[d] and not box.lo[d] <= positions[d] <= box.hi[d]
        )
        if not crossed:
            raise SimulationError(
                f"state at {positions} reached {post} inside a box without "
                "crossing a wall; it must have started inside"
            )
        new_pos = tuple(
            positions[d] if d in crossed else post[d] for d in range(self.grid.ndim)
        )
        new_fields = tuple(
            f ^ (1 << self.velocity.mag_bits(d)) if d in crossed else f
            for d, f in enumerate(fields)
        )
        return new_pos, new_fields

    def step_distribution(self, dist: dict[StateKey, float],
                          stepping: frozenset[Fraction]) -> dict[StateKey, float]:
        out: dict[StateKey, float] = {}
        for key, mass in dist.items():
            new_key = self.step_key(key, stepping)
            if new_key in out:
                raise SimulationError(
                    f"two states map onto {new_key}; the reference map must be a bijection"
                )
            out[new_key] = mass
        return out

    def admissible_states(self) -> Iterator[StateKey]:
        """Every exterior position combined with every non-padding velocity."""
        field_choices = [
            self.velocity.field_values(d) for d in range(self.grid.ndim)
        ]
        for positions in itertools.product(*(range(n) for n in self.grid.shape)):
            if positions in self.cell_owner:
                continue
            for fields in itertools.product(*field_choices):
                yield positions, fields

    def density(self, dist: dict[StateKey, float]) -> np.ndarray:
        out = np.zeros(self.grid.shape, dtype=np.float64)
        for (positions, _), mass in dist.items():
            out[positions] += mass
        return out
