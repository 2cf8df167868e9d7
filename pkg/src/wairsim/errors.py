"""Exception types raised across the simulator."""


class WairsimError(Exception):
    """Base class for all simulator errors."""


class GimbalProximity(WairsimError):
    """Pitch too close to +/- pi/2 for the Euler-rate map to be invertible."""


class SingularKKT(WairsimError):
    """Contact KKT system is rank-deficient beyond the structural squeeze mode."""


class PreconditionDrift(WairsimError):
    """A stance foot violates the position/velocity pinning tolerance."""


class UnreachableFoothold(WairsimError):
    """No lattice anchor keeps the leg within its length limits."""


class GridMisaligned(WairsimError):
    """A collocation window straddles a contact-set switch."""


class PhaseSolveFailed(WairsimError):
    """The per-phase trajectory optimization did not reach feasibility."""


class IntegrationDiverged(WairsimError):
    """State left the valid envelope (NaN or exploding magnitudes)."""


class ScenarioError(WairsimError):
    """Scenario configuration is malformed or violates the schema."""
