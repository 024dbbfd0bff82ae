"""Exception hierarchy shared by the solvers and the command line.

Each class carries the process exit status used by the CLI.
"""


class CondQPTError(Exception):
    exit_code = 1


class ConfigError(CondQPTError, ValueError):
    """Invalid model or run configuration."""

    exit_code = 2

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class SectorError(ConfigError):
    """Configuration outside its sector, or a sector that cannot be built."""


class DimensionError(ConfigError):
    """Requested space is too large for the chosen representation."""


class CapabilityError(CondQPTError):
    """The requested solver cannot handle this model or size."""

    exit_code = 3


class SignProblemError(CapabilityError):
    """Projector Monte Carlo requested on a non-stoquastic Hamiltonian."""

    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class EmptySubspaceError(CapabilityError):
    """The selected restriction contains no configuration."""


class ConvergenceError(CondQPTError, ArithmeticError):
    """Iterative eigensolver did not reach its tolerance."""

    exit_code = 4
