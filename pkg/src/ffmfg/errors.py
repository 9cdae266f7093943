"""Exception types raised across the package."""


class FfmfgError(Exception):
    """Base class for all errors raised by ffmfg."""


class DomainError(FfmfgError, ValueError):
    """Argument outside the domain of a model function (e.g. m <= 0)."""


class RangeError(FfmfgError, ValueError):
    """Inverse coupling applied outside the range of g."""


class WindowError(FfmfgError, RuntimeError):
    """An optimizer's minimizer/maximizer touched the search window edge."""


class CflError(FfmfgError, ValueError):
    """Time step violates the CFL condition."""


class PositivityError(FfmfgError, RuntimeError):
    """Density fell below the positivity floor."""


class HyperbolicityError(FfmfgError, ValueError):
    """The first-order system is not hyperbolic for the requested model."""


class StabilityError(FfmfgError, RuntimeError):
    """Time-step constraint cannot be met."""


class IntegrationError(FfmfgError, RuntimeError):
    """Adaptive quadrature failed to converge."""


class FitError(FfmfgError, ValueError):
    """Not enough usable data for a decay fit."""


class ConfigError(FfmfgError, ValueError):
    """Invalid scenario configuration."""
