"""Exception types shared across the package."""


class CaclabError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(CaclabError, ValueError):
    """A system configuration violates one or more invariants.

    Carries the full list of violations so callers can report all of
    them at once instead of failing on the first.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class StateSpaceLimitError(CaclabError):
    """State enumeration exceeded the configured safety limit."""


class ModePreconditionError(CaclabError, ValueError):
    """The requested solver mode does not apply to this configuration."""


class DegenerateChainError(CaclabError):
    """The generator has no unique stationary distribution."""


class ConvergenceError(CaclabError):
    """An iterative solve stopped before reaching its tolerance."""


class ScenarioError(CaclabError, ValueError):
    """A scenario document could not be parsed into domain objects."""


class SimulationError(CaclabError):
    """An internal consistency check failed during simulation."""
