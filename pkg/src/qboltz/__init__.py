"""Quantum circuit construction and simulation of collisionless lattice
transport: discrete-velocity streaming on a periodic grid with specular
reflection off axis-aligned box obstacles, all compiled to reversible
arithmetic so a statevector (or permutation) backend can execute it."""

from __future__ import annotations

from .cfl import (
    Schedule,
    Substep,
    build_cycle,
    build_schedule,
    next_timestep,
    schedule_table,
)
from .errors import (
    ConfigError,
    ConstructionError,
    QBoltzError,
    ScheduleError,
    SimulationError,
)
from .gates import Gate, Primitive, cost_breakdown
from .kernels import ACTIVE_IMPL
from .layout import GridSpec, RegisterLayout, VelocityTable, build_layout
from .permsim import SparseState
from .reference import ReferenceMap
from .reflection import Box, derive_reset_rules, derive_walls, validate_obstacles
from .sampling import sample_counts
from .sim import PrepSpec, RunResult, SubstepReport, build_substep, run_simulation
from .statevector import StateVector

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_IMPL",
    "Box",
    "ConfigError",
    "ConstructionError",
    "Gate",
    "GridSpec",
    "PrepSpec",
    "Primitive",
    "QBoltzError",
    "ReferenceMap",
    "RegisterLayout",
    "RunResult",
    "Schedule",
    "ScheduleError",
    "SimulationError",
    "SparseState",
    "StateVector",
    "Substep",
    "SubstepReport",
    "VelocityTable",
    "build_cycle",
    "build_layout",
    "build_schedule",
    "build_substep",
    "cost_breakdown",
    "next_timestep",
    "derive_reset_rules",
    "derive_walls",
    "run_simulation",
    "sample_counts",
    "schedule_table",
    "validate_obstacles",
    "__version__",
]
