"""Exception types raised across the package."""
from __future__ import annotations


class QuoherenceError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(QuoherenceError):
    """Operands describe systems with different slit counts."""


class NotHermitianError(QuoherenceError):
    """Matrix is not Hermitian within tolerance."""


class DiagonalNotUnitError(QuoherenceError):
    """Overlap matrix diagonal deviates from 1."""


class NotPSDError(QuoherenceError):
    """Matrix has an eigenvalue below the accepted floor."""


class PriorsNotNormalizedError(QuoherenceError):
    """Slit probabilities are negative or do not sum to 1."""


class EmptyWindowError(QuoherenceError):
    """Requested screen window selects too little of the pattern."""


class ZeroIntensityError(QuoherenceError):
    """Pattern is identically zero where a ratio is required."""


class ZeroMassError(QuoherenceError):
    """Pattern integrates to zero over the sampling window."""


class EmptyBinError(QuoherenceError):
    """No photon hits landed in the requested bin."""


class InvalidMaximumIndexError(QuoherenceError):
    """Primary-maximum index is negative or out of the sampled range."""


class SchemaError(QuoherenceError):
    """Scenario document is structurally malformed.

    ``path`` locates the offending field, dotted from the document root.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ScenarioValidationError(QuoherenceError):
    """Scenario document is well-formed but violates an invariant."""

    def __init__(self, path: str, invariant: str):
        self.path = path
        self.invariant = invariant
        super().__init__(f"{path}: {invariant}")
