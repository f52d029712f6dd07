"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class QuditError(ValueError):
    """Base class for all domain errors raised by quditlogic."""


class DimensionError(QuditError):
    """Shapes, indices or dimensions are inconsistent."""


class NonUnitaryError(QuditError):
    """A matrix that must be unitary is not, within tolerance."""

    def __init__(self, deviation: float, tol: float):
        self.deviation = deviation
        self.tol = tol
        super().__init__(
            f"matrix is not unitary: max|M^dag M - I| = {deviation:.3e} > tol = {tol:.1e}"
        )


class NotHermitianError(QuditError):
    """A Hamiltonian is not Hermitian within tolerance."""


class NormalizationError(QuditError):
    """Coefficient vector is not normalized."""


class UnsupportedConfigurationError(QuditError):
    """The requested (d, n, lowering) combination has no construction."""


class CapacityError(QuditError):
    """Not enough ancilla qudits were declared for a lowering."""


class DegenerateCoefficientsError(QuditError):
    """Closed-form pulse solution divides by a vanishing amplitude.

    Callers are expected to fall back to the numerical solver.
    """


class PhononLeakageError(QuditError):
    """Population reached the phonon cutoff of a truncated trap mode."""


class FormatError(QuditError):
    """A serialized document could not be parsed."""


class ConvergenceError(QuditError):
    """A numerical control solve missed its fidelity target."""
