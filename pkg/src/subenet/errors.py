"""Exception types shared across the package.

The CLI maps these onto exit codes: invalid input and malformed data
exit with 2, numerical failures (including degenerate sampling plans
and pilot non-convergence) exit with 3.
"""

from __future__ import annotations


class SubenetError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(SubenetError, ValueError):
    """An argument violates a documented precondition."""


class CsvFormatError(SubenetError, ValueError):
    """A CSV file could not be parsed; the message names line and column."""


class NumericalError(SubenetError, RuntimeError):
    """A numerical operation failed (singular factorization, failed line search, ...)."""


class DegeneratePlanError(NumericalError):
    """A sampling plan could not be formed, e.g. all residuals are zero."""


class PilotFailureError(NumericalError):
    """The pilot stage of the two-step estimator did not converge.

    Carries the pilot solver report in ``report`` so callers can inspect
    the partial state before deciding on a fallback.
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
