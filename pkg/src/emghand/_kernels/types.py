"""Parameter/state containers shared by the compiled and pure kernels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STRATEGY_ONOFF = 0
STRATEGY_PROPORTIONAL = 1


@dataclass
class TickParams:
    """Per-block constants. A block never spans a config change."""

    calibrated: bool = False
    running: bool = False
    rest: float = 0.0
    mvc: float = 1.0
    window: int = 50
    strategy: int = STRATEGY_ONOFF
    th: float = 50.0
    th1: float = 20.0
    th2: float = 80.0
    delta: float = 5.0
    gap: float = 0.0
    literal: bool = False
    dt_ms: float = 1.0
    tau_ms: float = 80.0
    max_rate: float = 1.0


@dataclass
class TickState:
    """Mutable cross-block state owned by the tick thread."""

    ma_buf: np.ndarray = field(default_factory=lambda: np.zeros(50, dtype=np.float64))
    ma_idx: int = 0  # ring position of the oldest sample
    hyst_prev: float = 0.0
    db_r: float = 0.0
    db_x: float = 0.0
    pos: float = 0.0
    vel: float = 0.0

    def ma_chronological(self) -> np.ndarray:
        """Window contents oldest-first."""
        return np.concatenate([self.ma_buf[self.ma_idx :], self.ma_buf[: self.ma_idx]])

    def resize_window(self, window: int) -> None:
        """Keep the newest min(old, new) samples, zero-pad the rest."""
        old_w = len(self.ma_buf)
        if window == old_w:
            return
        chrono = self.ma_chronological()
        fresh = np.zeros(window, dtype=np.float64)
        keep = min(window, old_w)
        fresh[window - keep :] = chrono[old_w - keep :]
        self.ma_buf = fresh
        self.ma_idx = 0
