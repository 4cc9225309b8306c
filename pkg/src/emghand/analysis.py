"""Stability metrics computed from session records.

Used to compare the control strategies offline: how often the commanded
reference jumps (jerk episodes), how much it ripples, how long the hand
stayed open, and whether commanded holds were kept. All thresholds are
analysis conventions, configurable per call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .record import SessionRecord

TRANSITION_THRESHOLD = 0.5  # |delta reference| that counts as a jump
OPEN_THRESHOLD = 0.5  # aperture fraction counted as "open"
HOLD_DROP_FACTOR = 0.8  # hold fails when position dips below this x peak


@dataclass(frozen=True)
class SessionMetrics:
    reference_transition_count: int
    aperture_ripple_rms: float
    time_open_ms: int
    hold_failures: int
    mean_emg_during_hold: float

    def to_dict(self) -> dict:
        return {
            "reference_transition_count": self.reference_transition_count,
            "aperture_ripple_rms": self.aperture_ripple_rms,
            "time_open_ms": self.time_open_ms,
            "hold_failures": self.hold_failures,
            "mean_emg_during_hold": self.mean_emg_during_hold,
        }


def count_transitions(values: np.ndarray, threshold: float = TRANSITION_THRESHOLD) -> int:
    """Steps where the signal jumps by more than threshold in one tick."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return 0
    return int(np.count_nonzero(np.abs(np.diff(v)) > threshold))


def ripple_rms(values: np.ndarray) -> float:
    """RMS of first differences: per-tick movement energy of the signal."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return 0.0
    d = np.diff(v)
    return float(np.sqrt(np.mean(d * d)))


def compute_metrics(
    record: SessionRecord,
    hold_segments: Sequence[Sequence[int]] = (),
    transition_threshold: float = TRANSITION_THRESHOLD,
    open_threshold: float = OPEN_THRESHOLD,
    hold_drop_factor: float = HOLD_DROP_FACTOR,
) -> SessionMetrics:
    """Deterministic metrics for one record.

    hold_segments are (start_ms, end_ms) spans where the intent was a steady
    grasp (supplied from the session script, not auto-detected); they must
    lie within the record.
    """
    n = record.n_rows
    if n == 0:
        return SessionMetrics(0, 0.0, 0, 0, 0.0)

    ref = record.columns["reference"]
    pos = record.columns["position"]
    emg = record.columns["emg_percent"]

    transitions = count_transitions(ref, transition_threshold)
    rms = ripple_rms(ref)
    time_open = int(np.count_nonzero(pos >= open_threshold))  # 1 ms per tick

    failures = 0
    emg_chunks = []
    for i, seg in enumerate(hold_segments):
        a, b = int(seg[0]), int(seg[1])
        if not (0 <= a < b <= n):
            raise ValidationError(f"hold_segments[{i}]", "outside the record span")
        window = pos[a:b]
        peak_idx = int(np.argmax(window))
        peak = float(window[peak_idx])
        if peak > 0.0 and np.any(window[peak_idx:] < hold_drop_factor * peak):
            failures += 1
        emg_chunks.append(emg[a:b])

    mean_emg = float(np.concatenate(emg_chunks).mean()) if emg_chunks else 0.0
    return SessionMetrics(
        reference_transition_count=transitions,
        aperture_ripple_rms=rms,
        time_open_ms=time_open,
        hold_failures=failures,
        mean_emg_during_hold=mean_emg,
    )
