"""Exception types raised across the library."""


class UosdiffError(Exception):
    """Base class for all library-specific errors."""


class AllZeroInput(UosdiffError):
    """Every input vector is numerically zero."""


class DimensionMismatch(UosdiffError):
    """Vector dimension does not match the ambient dimension."""


class InvalidDims(UosdiffError):
    """Requested subspace dimensions are out of range."""


class NonpositiveTime(UosdiffError):
    """Diffusion time must be strictly positive."""


class InvalidRange(UosdiffError):
    """Invalid (tau, T) time range."""


class BudgetExceeded(UosdiffError):
    """Subset search exceeded the configured combination cap."""


class EmptyRecovery(UosdiffError):
    """Recovery result contains no subspaces."""


class EmptyComponent(UosdiffError):
    """Component has no training samples."""


class NonFiniteState(UosdiffError):
    """Sampler state became non-finite (score blow-up or too-coarse grid)."""


class SizeMismatch(UosdiffError):
    """Sample sets must have equal size."""


class SizeCap(UosdiffError):
    """Sample set exceeds the exact-assignment size cap."""


class InsufficientPoints(UosdiffError):
    """Not enough points for a slope fit."""


class RecoveryFailed(UosdiffError):
    """Subspace recovery did not produce a usable model for a replicate."""
