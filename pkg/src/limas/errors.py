"""Exception hierarchy shared by all limas modules."""


class LimasError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(LimasError):
    """Operands have incompatible shapes."""


class NotALaplacian(LimasError):
    """Matrix violates Laplacian structure (negative eigenvalue or nonzero row sums)."""


class NotCommuting(LimasError):
    """The physical and cyber Laplacians do not commute within tolerance."""


class CyberGraphDisconnected(LimasError):
    """The communication graph has more than one connected component."""


class NotSimultaneouslyDiagonalizable(LimasError):
    """No common eigenbasis found after the retry budget was exhausted."""


class SingularControllability(LimasError):
    """Controllability matrix is rank deficient at the working tolerance."""


class SigmaTooSmall(LimasError):
    """Riccati discount factor is at or below the critical value."""


class NoConvergence(LimasError):
    """Iterative solver exhausted its budget or broke down numerically."""


class OrderTooLarge(LimasError):
    """System order exceeds the cap on sign-pattern enumeration."""


class BlockInversionFailure(LimasError):
    """A per-system basis block could not be inverted reliably."""


class SolverFailure(LimasError):
    """The LP backend reported a numerical failure."""


class NonFiniteState(LimasError):
    """Simulation state diverged or became non-finite."""


class UnknownParameter(LimasError):
    """Sweep parameter name is not supported."""


class ConfigError(LimasError):
    """Run configuration file is missing, malformed, or inconsistent."""
