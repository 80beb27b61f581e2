"""Exception hierarchy shared across the package."""


class BanditRecError(Exception):
    """Base class for all package errors."""


class ConfigurationError(BanditRecError):
    """Invalid configuration value (bad hyperparameter, unknown key, ...)."""


class ContractError(BanditRecError):
    """A caller violated a documented precondition."""


class NumericalStateError(BanditRecError):
    """Model state lost a numerical invariant (SPD violation, Cholesky failure)."""


class IngestionError(BanditRecError):
    """A raw input file failed to parse or validate."""


class ReferentialIntegrityError(IngestionError):
    """A record references an id that does not exist."""


class StateError(BanditRecError):
    """An operation was invoked before its prerequisites were established."""


class GenerationError(BanditRecError):
    """Synthetic data generation failed (e.g. calibration did not converge)."""
