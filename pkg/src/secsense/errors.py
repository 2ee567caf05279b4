"""Exception hierarchy shared across the package."""


class SecsenseError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SecsenseError):
    """Invalid, unknown, or inconsistent configuration."""


class UnknownConstellationError(SecsenseError, ValueError):
    """Requested constellation name is not supported."""


class DivisibilityError(SecsenseError, ValueError):
    """Comb spacing does not divide the subcarrier count."""


class FloorError(SecsenseError, ValueError):
    """A subcarrier power entry breaches the minimum power floor."""


class InfeasibleAcfError(SecsenseError, ValueError):
    """Requested autocorrelation shape maps to negative subcarrier powers."""


class StructureError(SecsenseError, ValueError):
    """Operation requires a structured (p, q, kappa) power allocation."""


class IsiRegionError(SecsenseError, ValueError):
    """Reflector delay falls outside the ISI-free region set by the CP."""


class EstimationError(SecsenseError, RuntimeError):
    """Subspace estimator could not produce the requested estimates."""


class InfeasibleSecurityError(SecsenseError, ValueError):
    """Security constraints cannot be met for the given grid/constellation."""


class SolverError(SecsenseError, RuntimeError):
    """Numerical optimizer failed to converge."""
