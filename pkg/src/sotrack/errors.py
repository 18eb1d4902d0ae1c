"""Exception hierarchy shared by every module."""

from __future__ import annotations


class TrackingError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateBox(TrackingError, ValueError):
    """A box has (or collapses to) too little area to be sampled."""


class DegeneratePatch(TrackingError, ValueError):
    """A patch carries no usable signal (zero variance or too small)."""


class FlatResponse(TrackingError):
    """A correlation response has no sidelobe variation, so PSR is undefined."""


class ZeroNorm(TrackingError, ValueError):
    """An embedding has zero L2 norm."""


class BinMismatch(TrackingError, ValueError):
    """Two histograms have a different number of bins."""


class SourceMismatch(TrackingError, ValueError):
    """Frames and per-frame detections are not aligned."""


class LengthMismatch(TrackingError, ValueError):
    """Tracker outputs and ground truth have different lengths."""


class InvalidScript(TrackingError, ValueError):
    """A simulator scenario violates its invariants."""


class ConfigError(TrackingError, ValueError):
    """A tracker configuration value violates its invariants."""


class ParseError(TrackingError, ValueError):
    """Malformed input file, with the location of the offending token."""

    def __init__(self, message: str, path=None, line: int | None = None, column: int | None = None):
        self.message = message
        self.path = None if path is None else str(path)
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.path or "<input>"
        if self.line is not None:
            where += f":{self.line}"
            if self.column is not None:
                where += f":{self.column}"
        return f"{where}: {self.message}"


class NegativeDimension(ParseError):
    pass


class ScoreOutOfRange(ParseError):
    pass


class UnknownKey(ParseError):
    pass
