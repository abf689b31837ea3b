"""Exception types raised across the package."""


class RmabfError(Exception):
    """Base class for all package errors."""


class ChainError(RmabfError):
    """A Markov chain has no unique stationary distribution."""


class CyclingError(RmabfError):
    """The simplex solver hit its iteration cap."""


class SolverInconsistencyError(RmabfError):
    """A solver returned a point that violates occupancy invariants."""


class InfeasiblePlanError(RmabfError):
    """An episode's extended LP had no feasible point."""


class ScheduleError(RmabfError):
    """Fairness quotas cannot fit inside one episode."""


class ConfigError(RmabfError):
    """A configuration file is malformed or fails validation."""
