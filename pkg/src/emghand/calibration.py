"""Per-session normalization profile: rest / MVC capture and the initial threshold.

The rest estimator is the window mean; the MVC estimator is the 95th
percentile rather than the absolute maximum, so one artifact spike cannot
collapse the dynamic range. Both are configurable. Thresholds live in the
normalized percent domain, so a recalibration (profile swap between ticks)
never invalidates them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidCalibrationError
from .pipeline import ADC_MAX, round_half_up

MIN_WINDOW_SAMPLES = 1000  # 1 s at 1 kHz
MVC_PERCENTILE = 95.0
INITIAL_THRESHOLD_PERCENT = 50.0  # half the dynamic range


@dataclass(frozen=True)
class CalibrationProfile:
    """Rest and MVC anchor counts defining the normalization map."""

    rest_raw: int
    mvc_raw: int
    captured_at: Optional[str] = None  # ISO-8601, None for config-loaded profiles
    rest_window_ms: int = MIN_WINDOW_SAMPLES
    mvc_window_ms: int = MIN_WINDOW_SAMPLES

    def __post_init__(self):
        if not 0 <= self.rest_raw < self.mvc_raw <= ADC_MAX:
            raise InvalidCalibrationError(
                f"requires 0 <= rest_raw < mvc_raw <= {ADC_MAX}, "
                f"got rest={self.rest_raw} mvc={self.mvc_raw}"
            )

    def to_dict(self) -> dict:
        return {
            "rest_raw": self.rest_raw,
            "mvc_raw": self.mvc_raw,
            "captured_at": self.captured_at,
            "rest_window_ms": self.rest_window_ms,
            "mvc_window_ms": self.mvc_window_ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationProfile":
        return cls(
            rest_raw=int(d["rest_raw"]),
            mvc_raw=int(d["mvc_raw"]),
            captured_at=d.get("captured_at"),
            rest_window_ms=int(d.get("rest_window_ms", MIN_WINDOW_SAMPLES)),
            mvc_window_ms=int(d.get("mvc_window_ms", MIN_WINDOW_SAMPLES)),
        )


def capture_rest(samples: Sequence[int], min_samples: int = MIN_WINDOW_SAMPLES) -> int:
    """Rest anchor: mean of the relaxed-arm window, rounded to a count."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size < min_samples:
        raise InsufficientDataError(
            f"rest window has {arr.size} samples, need >= {min_samples}"
        )
    return round_half_up(float(arr.mean()))


def capture_mvc(
    samples: Sequence[int],
    min_samples: int = MIN_WINDOW_SAMPLES,
    percentile: float = MVC_PERCENTILE,
) -> int:
    """MVC anchor: robust maximum (95th percentile) of the extension window."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size < min_samples:
        raise InsufficientDataError(
            f"mvc window has {arr.size} samples, need >= {min_samples}"
        )
    return round_half_up(float(np.percentile(arr, percentile)))


def build_profile(
    rest_raw: int,
    mvc_raw: int,
    captured_at: Optional[str] = None,
    rest_window_ms: int = MIN_WINDOW_SAMPLES,
    mvc_window_ms: int = MIN_WINDOW_SAMPLES,
) -> CalibrationProfile:
    """Validated profile; raises InvalidCalibrationError when mvc <= rest."""
    return CalibrationProfile(
        rest_raw=rest_raw,
        mvc_raw=mvc_raw,
        captured_at=captured_at,
        rest_window_ms=rest_window_ms,
        mvc_window_ms=mvc_window_ms,
    )


def initial_threshold(profile: CalibrationProfile) -> float:
    """Session-start activation threshold: half the normalized dynamic range."""
    assert profile is not None
    return INITIAL_THRESHOLD_PERCENT
