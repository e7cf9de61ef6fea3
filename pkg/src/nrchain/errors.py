"""Exception hierarchy shared by all modules.

Every error carries an ``exit_code`` used by the command line front end:
2 for parameter/usage problems, 3 for numerical singularities and failed
searches, 4 for I/O trouble.
"""

from __future__ import annotations


class ChainError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ParameterDomainError(ChainError):
    """A parameter violates its domain (non-positive rate, bad index, ...)."""

    exit_code = 2


class UnsupportedRegimeError(ParameterDomainError):
    """The operation is only defined in a regime the inputs are not in."""


class StepSizeError(ParameterDomainError):
    """Requested integration step exceeds the stability bound."""


class UnstableSystemError(ChainError):
    """Time integration refused because fluctuations grow without bound.

    The triggering stability report is attached as ``report``.
    """

    exit_code = 2

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SingularMatrixError(ChainError):
    """The dynamic matrix (or a closed-form denominator) is singular."""

    exit_code = 3


class AtTransitionError(ChainError):
    """Winding number requested at (or unresolvably close to) a gap closing."""

    exit_code = 3


class TransitionNotFoundError(ChainError):
    """No invariant change inside the supplied search bracket."""

    exit_code = 3


class NoEdgeStateError(ChainError):
    """Analytic edge-state formulas requested outside the zero-mode regime."""

    exit_code = 3


class ConvergenceError(ChainError):
    """A time trajectory did not settle within the integrated window."""

    exit_code = 3

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class FitDegenerateError(ChainError):
    """Too few usable points to fit a localization length."""

    exit_code = 3
