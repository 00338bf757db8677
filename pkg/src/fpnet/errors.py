"""Exception types shared across the toolkit."""


class FpnetError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameterError(FpnetError, ValueError):
    """A numeric argument is outside its documented domain."""


class ConnectivityError(FpnetError, ValueError):
    """The communication graph is not connected (or could not be sampled connected)."""


class ContractViolation(FpnetError, ValueError):
    """An input violates a documented precondition (e.g. non-stochastic mixing matrix)."""


class InfeasibleParametersError(FpnetError, ValueError):
    """Consensus/step parameters fall outside the feasibility region of the theory."""


class DivergenceError(FpnetError, RuntimeError):
    """A run produced non-finite or blown-up states; carries the last finite trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NoFixedPointError(FpnetError, RuntimeError):
    """Fixed-point search hit its iteration cutoff; carries the last residual."""

    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class ConfigError(FpnetError, ValueError):
    """Malformed run configuration file or override."""


class StaleArtifactError(FpnetError, RuntimeError):
    """A manifest checksum does not match the file on disk."""
