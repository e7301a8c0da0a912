"""Exception types shared across the package."""


class QBoltzError(Exception):
    """Base class for all package errors."""


class ConstructionError(QBoltzError):
    """A circuit, layout, or obstacle request violates a precondition."""


class ScheduleError(QBoltzError):
    """The substep scheduler cannot produce a valid cycle."""


class SimulationError(QBoltzError):
    """A backend detected an inconsistency while evolving a state."""


class ConfigError(QBoltzError):
    """A run configuration file is malformed."""
