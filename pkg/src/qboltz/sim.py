"""Timestep assembly and end-to-end runs.

A substep is: streaming (mark + conditional moves), reflection (wall mark,
flip, eject, reset) when obstacles exist, then cleanup (unmark).  Runs audit
every substep: ancilla mass and obstacle-cell mass must stay below tolerance
and the norm must hold, otherwise the run aborts; these are correctness
invariants, not warnings.  With check_oracle=True the classical reference
distribution is evolved alongside and the worst per-state probability
deviation is recorded per substep.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cfl import Schedule, build_cycle
from .errors import ConstructionError, SimulationError
from .gates import Primitive, cost_breakdown, h as h_gate, x as x_gate
from .layout import GridSpec, RegisterLayout, VelocityTable, build_layout
from .permsim import SparseState
from .reference import ReferenceMap, StateKey
from .reflection import Box, build_reflection, interior_cells, validate_obstacles
from .sampling import sample_counts
from .statevector import StateVector
from .streaming import build_streaming, build_unmark, stepping_dims

LEAK_TOLERANCE = 1e-9

_IDX_CACHE: dict[int, np.ndarray] = {}


def _indices(n: int) -> np.ndarray:
    arr = _IDX_CACHE.get(n)
    if arr is None:
        arr = np.arange(n, dtype=np.int64)
        _IDX_CACHE[n] = arr
    return arr


def build_substep(layout: RegisterLayout, boxes: Sequence[Box],
                  stepping: frozenset[Fraction]) -> Primitive:
    children = [build_streaming(layout, stepping)]
    reflection = build_reflection(layout, boxes, stepping_dims(layout, stepping))
    if reflection is not None:
        children.append(reflection)
    children.append(build_unmark(layout, stepping))
    return Primitive("substep", children=tuple(children))


@dataclass(frozen=True)
class PrepSpec:
    """State preparation: X gates then Hadamards, addressed by qubit role."""

    x_roles: tuple[str, ...] = ()
    h_roles: tuple[str, ...] = ()

    def resolve(self, layout: RegisterLayout) -> tuple[tuple[int, ...], tuple[int, ...]]:
        xs = tuple(layout.role_qubit(r) for r in self.x_roles)
        hs = tuple(layout.role_qubit(r) for r in self.h_roles)
        combined = xs + hs
        if len(set(combined)) != len(combined):
            raise ConstructionError("prep touches a qubit twice")
        ancillae = set(layout.ancilla_qubits)
        if any(q in ancillae for q in combined):
            raise ConstructionError("prep must leave the ancillae at zero")
        return xs, hs


def initial_state(layout: RegisterLayout, prep: PrepSpec, backend: str):
    xs, hs = prep.resolve(layout)
    if backend == "dense":
        state = StateVector(layout.num_qubits)
        for q in xs:
            state.apply_gate(x_gate(q))
        for q in hs:
            state.apply_gate(h_gate(q))
        return state
    if backend == "perm":
        return SparseState.from_prep(layout.num_qubits, xs, hs)
    raise ConstructionError(f"unknown backend {backend!r}; use dense or perm")


def _grid_block(layout: RegisterLayout) -> tuple[int, int]:
    shift = layout.grid_regs[0][0]
    width = sum(layout.grid_width(d) for d in range(layout.ndim))
    return shift, width


def _cell_flat(layout: RegisterLayout, cell: tuple[int, ...]) -> int:
    shift, _ = _grid_block(layout)
    flat = 0
    for dim, pos in enumerate(cell):
        flat |= pos << (layout.grid_shift(dim) - shift)
    return flat


def _support(state) -> tuple[np.ndarray, np.ndarray]:
    """(indices, probabilities) of the state's support."""
    if isinstance(state, SparseState):
        return state.indices, np.abs(state.amps) ** 2
    probs = state.probabilities()
    return _indices(probs.shape[0]), probs


def audit_state(state, layout: RegisterLayout,
                obstacle_flats: np.ndarray) -> tuple[float, float, float]:
    """(ancilla mass, obstacle-cell mass, norm error)."""
    idx, probs = _support(state)
    anc_mask = layout.ancilla_mask
    ancilla_mass = float(probs[(idx & anc_mask) != 0].sum())
    shift, width = _grid_block(layout)
    flats = (idx >> shift) & ((1 << width) - 1)
    if obstacle_flats.size:
        obstacle_mass = float(probs[np.isin(flats, obstacle_flats)].sum())
    else:
        obstacle_mass = 0.0
    return ancilla_mass, obstacle_mass, abs(state.norm() - 1.0)


def grid_marginal(state, layout: RegisterLayout) -> np.ndarray:
    """Probability mass per grid cell, axes ordered x, y[, z]."""
    shift, width = _grid_block(layout)
    flat = np.zeros(1 << width, dtype=np.float64)
    idx, probs = _support(state)
    np.add.at(flat, (idx >> shift) & ((1 << width) - 1), probs)
    packed_shape = tuple(reversed(layout.grid.shape))
    return flat.reshape(packed_shape).transpose(tuple(reversed(range(layout.ndim))))


def _distribution_from_state(state, layout: RegisterLayout) -> dict[StateKey, float]:
    idx, probs = _support(state)
    live = np.flatnonzero(probs > 0)
    out: dict[StateKey, float] = {}
    for i in live:
        decoded = layout.decode(int(idx[i]))
        if not decoded.clean:
            raise SimulationError("initial state has nonzero ancillae")
        out[(decoded.positions, decoded.vel_fields)] = float(probs[i])
    return out


def _oracle_deviation(state, layout: RegisterLayout,
                      dist: dict[StateKey, float]) -> float:
    if isinstance(state, SparseState):
        got = {int(i): float(abs(a) ** 2) for i, a in zip(state.indices, state.amps)}
        want = {layout.encode_fields(*key): mass for key, mass in dist.items()}
        dev = 0.0
        for key in set(got) | set(want):
            dev = max(dev, abs(got.get(key, 0.0) - want.get(key, 0.0)))
        return dev
    expected = np.zeros_like(state.amps, dtype=np.float64)
    for key, mass in dist.items():
        expected[layout.encode_fields(*key)] = mass
    return float(np.max(np.abs(state.probabilities() - expected)))


@dataclass
class SubstepReport:
    index: int
    cycle: int
    time: Fraction
    stepping: tuple[Fraction, ...]
    cnots: int
    ancilla_mass: float
    obstacle_mass: float
    norm_error: float
    oracle_dev: float | None = None


@dataclass
class RunResult:
    layout: RegisterLayout
    boxes: tuple[Box, ...]
    schedule: Schedule
    cycles: int
    backend: str
    reports: list[SubstepReport]
    snapshots: dict[int, np.ndarray]
    cost_paths: dict[str, int]
    total_cnots: int
    final_state: object
    obstacle_cells: tuple[tuple[int, ...], ...]

    def sample_snapshot(self, cycle: int, shots: int, seed: int,
                        exclude_obstacle: bool = True) -> dict[tuple[int, ...], int]:
        """Histogram of a grid-register measurement at a snapshot time."""
        density = self.snapshots[cycle]
        shape = density.shape
        keys = np.arange(density.size, dtype=np.int64)
        excluded = frozenset(
            int(np.ravel_multi_index(cell, shape)) for cell in self.obstacle_cells
        ) if exclude_obstacle else frozenset()
        counts = sample_counts(keys, density.ravel(), shots, seed, excluded)
        return {
            tuple(int(v) for v in np.unravel_index(k, shape)): c
            for k, c in counts.items()
        }


def run_simulation(grid: GridSpec, velocity: VelocityTable, boxes: Sequence[Box],
                   prep: PrepSpec, cycles: int, backend: str = "perm",
                   check_oracle: bool = False,
                   snapshot_cycles: Sequence[int] = ()) -> RunResult:
    layout = build_layout(grid, velocity)
    boxes = tuple(boxes)
    validate_obstacles(boxes, grid)
    schedule = build_cycle(velocity.all_magnitudes())
    if cycles < 1:
        raise ConstructionError("need at least one cycle")

    prims: dict[frozenset, Primitive] = {}
    breakdowns: dict[frozenset, dict[str, int]] = {}
    for sub in schedule.substeps:
        if sub.stepping not in prims:
            prim = build_substep(layout, boxes, sub.stepping)
            prims[sub.stepping] = prim
            breakdowns[sub.stepping] = cost_breakdown(prim)

    state = initial_state(layout, prep, backend)
    obstacle_cells = tuple(sorted(interior_cells(boxes)))
    obstacle_flats = np.array(
        sorted(_cell_flat(layout, c) for c in obstacle_cells), dtype=np.int64
    )

    oracle = None
    dist: dict[StateKey, float] = {}
    if check_oracle:
        oracle = ReferenceMap(grid, velocity, boxes)
        dist = _distribution_from_state(state, layout)

    snapshot_set = set(snapshot_cycles)
    snapshots: dict[int, np.ndarray] = {}
    if 0 in snapshot_set:
        snapshots[0] = grid_marginal(state, layout)

    reports: list[SubstepReport] = []
    cost_paths: dict[str, int] = {}
    total_cnots = 0
    clock = Fraction(0)
    index = 0
    for cycle in range(1, cycles + 1):
        for sub in schedule.substeps:
            prim = prims[sub.stepping]
            state.apply(prim)
            clock += sub.dt
            index += 1
            total_cnots += prim.cnot_cost
            for path, cost in breakdowns[sub.stepping].items():
                cost_paths[path] = cost_paths.get(path, 0) + cost
            ancilla_mass, obstacle_mass, norm_error = audit_state(
                state, layout, obstacle_flats
            )
            report = SubstepReport(
                index=index, cycle=cycle, time=clock,
                stepping=tuple(sorted(sub.stepping)), cnots=prim.cnot_cost,
                ancilla_mass=ancilla_mass, obstacle_mass=obstacle_mass,
                norm_error=norm_error,
            )
            if oracle is not None:
                dist = oracle.step_distribution(dist, sub.stepping)
                report.oracle_dev = _oracle_deviation(state, layout, dist)
            reports.append(report)
            if ancilla_mass > LEAK_TOLERANCE:
                raise SimulationError(
                    f"ancillae hold mass {ancilla_mass:.3e} after substep {index}"
                )
            if obstacle_mass > LEAK_TOLERANCE:
                raise SimulationError(
                    f"obstacle cells hold mass {obstacle_mass:.3e} after substep {index}"
                )
        if cycle in snapshot_set:
            snapshots[cycle] = grid_marginal(state, layout)

    return RunResult(
        layout=layout, boxes=boxes, schedule=schedule, cycles=cycles,
        backend=backend, reports=reports, snapshots=snapshots,
        cost_paths=cost_paths, total_cnots=total_cnots, final_state=state,
        obstacle_cells=obstacle_cells,
    )
