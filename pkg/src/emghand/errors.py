"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all engine errors."""


class ValidationError(EngineError):
    """A parameter violates its invariant. Carries the offending field name."""

    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field
        self.msg = msg


class StateError(EngineError):
    """Command issued in a phase that cannot accept it."""


class CalibrationRequiredError(StateError):
    """Control requested (or normalization attempted) without a valid profile."""

    def __init__(self, msg: str = "calibration required"):
        super().__init__(msg)


class InsufficientDataError(EngineError):
    """Capture window shorter than the configured minimum."""


class InvalidCalibrationError(EngineError):
    """Captured levels cannot form a usable profile (mvc <= rest)."""


class RecordError(EngineError):
    """Base class for session-file problems."""


class RecordParseError(RecordError):
    """Malformed content in a session file. Carries the 1-based line number."""

    def __init__(self, line_no: int, msg: str):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


class RecordSchemaError(RecordError):
    """Session file is missing required columns or preamble keys."""


class UnsupportedVersionError(RecordError):
    """Session file declares a format version this build does not read."""
