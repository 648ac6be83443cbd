"""Typed errors shared across the package."""


class SpincatError(Exception):
    """Base class for all package errors."""


class NonHermitianInput(SpincatError):
    """An operation requiring a Hermitian operator received a non-Hermitian one."""


class OrthogonalSelection(SpincatError):
    """Post-selection probability too small for a meaningful weak value."""


class DegenerateFit(SpincatError):
    """Least-squares fit is underdetermined (too few points or no t spread)."""


class DomainError(SpincatError):
    """Argument outside the mathematical domain of the map."""


class ProbabilityOverflow(SpincatError):
    """A per-trial acceptance probability exceeded 1; indicates a rescaling bug."""


class GridMismatch(SpincatError):
    """Two sweeps that must share a time grid (and observable) do not."""
