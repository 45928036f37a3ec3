"""Exception types raised across the package."""


class LdtError(Exception):
    """Base class for all package errors."""


class ConfigError(LdtError, ValueError):
    """Invalid parameter or configuration value."""


class SimulationDiverged(LdtError):
    """The rotor integrator produced non-finite values."""

    def __init__(self, message, index=None):
        self.index = index
        if index is not None:
            message = f"experiment {index}: {message}"
        super().__init__(message)


class IdentificationError(LdtError):
    """Linear model identification failed (degenerate excitation)."""


class FitError(LdtError):
    """Gaussian-process fit failed."""


class RolloutDiverged(LdtError):
    """A digital-model rollout produced non-finite predictions."""


class CampaignError(LdtError):
    """A campaign aborted; ``index`` names the offending experiment."""

    def __init__(self, message, index):
        self.index = index
        super().__init__(f"experiment {index}: {message}")
