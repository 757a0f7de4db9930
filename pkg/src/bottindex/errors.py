"""Exception hierarchy.

Every error carries a distinct process exit code so the command line can map
failures one-to-one (see ``EXIT_CODES``).
"""

from __future__ import annotations


class BottError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InvalidMatrix(BottError, ValueError):
    """Input violates a matrix invariant (shape, finiteness, hermiticity, unitarity)."""

    exit_code = 10


class DimensionMismatch(BottError, ValueError):
    exit_code = 11


class ConvergenceFailure(BottError):
    """A LAPACK eigen/singular value routine did not converge."""

    exit_code = 12


class BranchCutViolation(BottError):
    """An eigenvalue lies on, or too close to, the branch cut of the principal log."""

    exit_code = 13


class CommutatorTooLarge(BranchCutViolation):
    """The commutator product has an eigenphase within tolerance of pi."""

    exit_code = 14


class RoundingAmbiguous(BottError):
    exit_code = 15


class SingularMatrix(BottError):
    exit_code = 16


class NonDiagonalizable(BottError):
    exit_code = 17


class TraceNotImaginary(BottError):
    """The log-trace of a commutator product has a non-negligible real part."""

    exit_code = 18


class ContourTooTight(BottError):
    exit_code = 19


class NotAProjection(BottError, ValueError):
    exit_code = 20


class HypothesisViolated(BottError):
    """A commutator-norm hypothesis failed at some sampled time."""

    exit_code = 21

    def __init__(self, message: str, t: float | None = None, norm: float | None = None):
        super().__init__(message)
        self.t = t
        self.norm = norm


class GaugeInconsistent(BottError, ValueError):
    exit_code = 22


class DimensionGuard(BottError, ValueError):
    exit_code = 23


class GaplessAtMu(BottError):
    exit_code = 24


class ThresholdOutOfRange(BottError, ValueError):
    exit_code = 25


class NotTranslationInvariant(BottError, ValueError):
    exit_code = 26


class UnknownSuite(BottError, KeyError):
    exit_code = 2

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class ConfigError(BottError, ValueError):
    exit_code = 3


def _all_error_types() -> list[type[BottError]]:
    seen: list[type[BottError]] = []
    stack = [BottError]
    while stack:
        cls = stack.pop()
        seen.append(cls)
        stack.extend(cls.__subclasses__())
    return seen


EXIT_CODES: dict[str, int] = {cls.__name__: cls.exit_code for cls in _all_error_types()}
