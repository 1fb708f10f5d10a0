"""Exception types raised by the library."""

from __future__ import annotations


class RiccatiError(Exception):
    """Base class for all library errors."""


class SingularDenominator(RiccatiError, ZeroDivisionError):
    """The Lagrangian denominator vanishes (or a phase function is undefined)."""

    def __init__(self, message: str = "Lagrangian denominator is singular", axis: int | None = None):
        if axis is not None:
            message = f"{message} (axis {axis})"
        super().__init__(message)
        self.axis = axis


class SingularTime(RiccatiError, ZeroDivisionError):
    """A closed-form solution is evaluated at (or too close to) its blow-up time."""


class OutsideAllowedRegion(RiccatiError, ValueError):
    """The energy level does not reach this position (1 + k E U < 0)."""


class ZeroEnergy(RiccatiError, ValueError):
    """The velocity-branch formula degenerates for E = 0."""


class SingularIntegrand(RiccatiError, ValueError):
    """A turning point or singular point lies strictly inside a quadrature interval."""


class ZeroCrossing(RiccatiError, ValueError):
    """The linear third-order solution u vanishes inside the evaluation window."""


class NonFiniteStage(RiccatiError, FloatingPointError):
    """A Runge-Kutta stage produced a non-finite value."""


class OutOfRange(RiccatiError, ValueError):
    """Dense output was requested outside the trajectory's time span."""


class PositiveMomentum(RiccatiError, ValueError):
    """The Hamiltonian needs p < 0 (the momentum sits under a square root)."""


class RootDomain(RiccatiError, ValueError):
    """The oscillator Hamiltonian / canonical map needs -k p > 0."""


class WrongBranch(RiccatiError, ValueError):
    """The Legendre identity only holds on the D > 0 branch."""
