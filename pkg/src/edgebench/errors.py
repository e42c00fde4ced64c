"""Domain error hierarchy.

Every failure mode that callers are expected to handle gets its own class so
the CLI can surface a stable machine-readable name (the class name) on stderr
and exit 1. Programming errors (bad argument types, violated call contracts)
stay plain ValueError/TypeError.
"""

from __future__ import annotations


class EdgeBenchError(Exception):
    """Base class for all domain errors raised by this package."""

    @property
    def name(self) -> str:
        return type(self).__name__


# --- power-log parsing and phase segmentation ---

class MalformedLog(EdgeBenchError):
    """Power log has a bad header, a non-numeric field, or a negative value."""


class EmptyLog(EdgeBenchError):
    """Power log contains a header but no data rows."""


class NonMonotonicTimestamps(EdgeBenchError):
    """Power-log timestamps are not strictly increasing."""


class SegmentationFailure(EdgeBenchError):
    """Phase segmentation could not match the expected experiment structure.

    ``detected`` carries the number of inference plateaus found when the
    failure is a count mismatch, else None.
    """

    def __init__(self, message: str, detected: int | None = None):
        super().__init__(message)
        self.detected = detected


class WindowTooShort(EdgeBenchError):
    """Trimming left no samples inside an inference window."""


# --- timing reduction ---

class TooFewRepetitions(EdgeBenchError):
    """Whole-dataset run needs at least two repetitions (warm-up + one)."""


class TooFewBatches(EdgeBenchError):
    """Batched run needs at least two batch times (warm-up + one)."""


class TooFewElements(EdgeBenchError):
    """Element-wise run needs at least two element times (warm-up + one)."""


# --- analysis ---

class EmptyInput(EdgeBenchError):
    """An aggregate was asked for over an empty sequence."""


class DegenerateInput(EdgeBenchError):
    """Curve fit needs at least two distinct dataset sizes."""


class NoCommonSizes(EdgeBenchError):
    """Speed-up comparison found no dataset size present in both series."""


class NonPositiveIT(EdgeBenchError):
    """Asymptotic speed-up is undefined for a non-positive independent term."""


# --- quality metrics ---

class DimensionMismatch(EdgeBenchError):
    """Masks being compared do not share width and height."""


class LengthMismatch(EdgeBenchError):
    """Paired sequences have different lengths or mismatched identifiers."""


class ZeroRow(EdgeBenchError):
    """Confusion matrix row sums to zero and cannot be normalized."""


# --- harness and fixtures ---

class RunnerLaunchFailure(EdgeBenchError):
    """Runner process could not be started or died before replying."""


class ProtocolViolation(EdgeBenchError):
    """Runner emitted a line that is not a valid protocol message."""


class RunnerReportedError(EdgeBenchError):
    """Runner replied ok=false; normally captured as an anomalous run."""


class FixtureNotFound(EdgeBenchError):
    """Named fixture is neither a bundled alias nor an existing file."""


class NoMatchingRows(EdgeBenchError):
    """Fixture filter matched nothing."""


class CountMismatch(EdgeBenchError):
    """Number of detected inference phases differs from the plan's datasets."""

    def __init__(self, message: str, expected: int, detected: int):
        super().__init__(message)
        self.expected = expected
        self.detected = detected


# --- reporting / CLI ---

class EmptyBundle(EdgeBenchError):
    """Report bundle holds no tables at all."""


class UsageError(EdgeBenchError):
    """Bad command-line or config-file usage; CLI exits 2."""
