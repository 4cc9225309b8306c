"""Envelope-to-control-input conditioning: quantize, normalize, smooth.

Stage order is fixed: the 0-5 V envelope is quantized to a 12-bit count,
mapped to percent of the calibrated dynamic range, then smoothed by a
50-sample moving average. Everything here is a pure, state-carrying step
function driven by the tick thread; the block kernels mirror this arithmetic
operation for operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import CalibrationRequiredError, ValidationError

if TYPE_CHECKING:
    from .calibration import CalibrationProfile

FULL_SCALE_VOLTS = 5.0
ADC_MAX = 4095  # 12-bit
DEFAULT_WINDOW = 50


def round_half_up(x: float) -> int:
    """Ties away from zero for non-negative x; fixed so replays are bit-exact."""
    return int(math.floor(x + 0.5))


def quantize(volts: float) -> int:
    """12-bit ADC count for an envelope voltage. Caller must pre-clamp to [0, 5]."""
    if not 0.0 <= volts <= FULL_SCALE_VOLTS:
        raise ValidationError("volts", f"outside [0, {FULL_SCALE_VOLTS}]: {volts!r}")
    return round_half_up(volts / FULL_SCALE_VOLTS * ADC_MAX)


def dequantize(raw: int) -> float:
    """Center-of-code voltage for a count; |quantize round trip| <= 1/2 LSB."""
    return raw / ADC_MAX * FULL_SCALE_VOLTS


def normalize(raw: int, profile: "CalibrationProfile") -> float:
    """Percent of the calibrated dynamic range, clamped to [0, 100].

    Counts above MVC clamp to 100: the reference can never ask for more
    than full aperture.
    """
    if profile is None:
        raise CalibrationRequiredError()
    rest = profile.rest_raw
    mvc = profile.mvc_raw
    if not rest < mvc:
        raise CalibrationRequiredError("profile invalid: mvc_raw <= rest_raw")
    p = (raw - rest) / (mvc - rest)
    if p < 0.0:
        p = 0.0
    elif p > 1.0:
        p = 1.0
    return p * 100.0


@dataclass(frozen=True)
class EmgSample:
    """One electrode reading: timestamp, envelope volts, quantized count."""

    t_ms: int
    volts: float
    raw: int

    @classmethod
    def from_volts(cls, t_ms: int, volts: float) -> "EmgSample":
        return cls(t_ms, volts, quantize(volts))


@dataclass(frozen=True)
class SmoothedSignal:
    t_ms: int
    value: float  # percent of dynamic range, [0, 100]


class MovingAverage:
    """Fixed-length smoother over the normalized percent stream.

    The window starts zero-filled and the output is always sum/window_len,
    so a session ramps up from zero over the first window instead of opening
    with a dead zone or a jump. Sums run oldest to newest; the block kernels
    reproduce the exact same addition order.
    """

    def __init__(self, window: int = DEFAULT_WINDOW):
        if window < 1:
            raise ValidationError("ma_window", "must be >= 1")
        self.window = window
        self.buf = np.zeros(window, dtype=np.float64)
        self.idx = 0  # position of the oldest slot

    def step(self, value: float) -> float:
        buf = self.buf
        n = self.window
        buf[self.idx] = value
        self.idx += 1
        if self.idx == n:
            self.idx = 0
        s = 0.0
        j = self.idx
        for _ in range(n):
            s += buf[j]
            j += 1
            if j == n:
                j = 0
        return s / n

    def chronological(self) -> np.ndarray:
        """Window contents oldest-first (kernel handoff format)."""
        return np.concatenate([self.buf[self.idx :], self.buf[: self.idx]])

    def load(self, values: np.ndarray) -> None:
        """Replace window contents with oldest-first values."""
        if len(values) != self.window:
            raise ValueError("window size mismatch")
        self.buf = np.asarray(values, dtype=np.float64).copy()
        self.idx = 0

    def resize(self, window: int) -> None:
        """Change window length, keeping the newest min(old, new) samples."""
        if window == self.window:
            return
        if window < 1:
            raise ValidationError("ma_window", "must be >= 1")
        chrono = self.chronological()
        fresh = np.zeros(window, dtype=np.float64)
        keep = min(window, self.window)
        fresh[window - keep :] = chrono[self.window - keep :]
        self.window = window
        self.buf = fresh
        self.idx = 0

    def reset(self) -> None:
        self.buf[:] = 0.0
        self.idx = 0
