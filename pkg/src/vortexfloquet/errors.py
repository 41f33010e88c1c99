"""Exception hierarchy.

Every error carries an ``error_class`` string that the CLI writes to its
diagnostic JSON, and a flag telling whether it stems from bad input (exit
code 2) or a numerical failure (exit code 3).
"""

from __future__ import annotations


class VortexError(Exception):
    error_class = "vortex_error"
    invalid_input = False


class InvalidInputError(VortexError, ValueError):
    error_class = "invalid_input"
    invalid_input = True


class ConfigError(InvalidInputError):
    error_class = "invalid_config"


class CollisionError(VortexError):
    error_class = "collision"


class DomainError(VortexError):
    """A point lies outside the domain or on its boundary."""

    error_class = "outside_domain"


class InversionError(VortexError):
    error_class = "conformal_inversion"


class IntegrationError(VortexError):
    error_class = "integration_failure"


class NotPeriodicError(VortexError):
    error_class = "not_periodic"


class SectionMissError(VortexError):
    error_class = "section_miss"


class ContinuationError(VortexError):
    error_class = "continuation_failure"


class PreconditionError(InvalidInputError):
    error_class = "precondition_failed"


class NotApproximatelySimpleError(VortexError):
    error_class = "not_approximately_simple"


class EigenSolverError(VortexError):
    error_class = "eigensolver_failure"
