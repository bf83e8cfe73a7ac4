"""Exception hierarchy shared across the assessment engine."""

from __future__ import annotations


class QaError(Exception):
    """Base class for all engine errors."""


class ModelError(QaError):
    """A quality-model document could not be parsed or is invalid."""


class ModelSyntaxError(ModelError):
    """Malformed model document (bad JSON or wrong shape)."""


class ModelIntegrityError(ModelError):
    """Model violates structural invariants (dangling ids, cycles, ...).

    Carries the full violation list so callers can report every problem.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        first = self.issues[0] if self.issues else None
        detail = str(first) if first is not None else "invalid model"
        if len(self.issues) > 1:
            detail += f" (+{len(self.issues) - 1} more)"
        super().__init__(detail)


class UnknownIdError(QaError, KeyError):
    """Lookup of a model element or net node id that does not exist."""

    def __str__(self) -> str:  # KeyError quotes its args; keep plain text
        return self.args[0] if self.args else ""


class NptError(QaError):
    """Invalid parameters for node-probability-table generation."""


class NetError(QaError):
    """Bayesian net construction failure (cycle, NPT dimension mismatch)."""


class InconsistentEvidenceError(QaError):
    """Evidence assignment has zero joint probability under the net."""


class StateSpaceError(QaError):
    """Joint state space exceeds the enumeration guard."""


class DeriveError(QaError):
    """Quality model plus plan cannot be turned into a net."""


class FindingsError(QaError):
    """Findings report, taxonomy, or vote input is invalid."""


class BundleError(QaError):
    """System descriptor or assessment input bundle is invalid."""


class PipelineError(QaError):
    """Failure inside a named assessment pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")
