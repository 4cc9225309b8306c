"""Reference generation: on-off (with optional hysteresis) and proportional
control with a friction-analogy deadband corrector.

The deadband treats the mapped input x as a point dragging a follower r
through a slack band of half-width delta: r only moves once x escapes the
band, and then only far enough to restore |x - r| = delta. Fluctuations
smaller than delta therefore never reach the hand, at the cost of a small
response lag. The follower output is rescaled so its settled span
[delta, 100 - delta] covers the full aperture.

All steps are pure functions of (state, input, config) in the percent
domain; the final Reference is an aperture fraction in [0, 1], 0 = fully
closed (the rest position), 1 = fully open.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import ValidationError

DEFAULT_WINDOW = 50


class Strategy(str, Enum):
    ONOFF = "onoff"
    PROPORTIONAL = "proportional"


@dataclass(frozen=True)
class ControlConfig:
    """Strategy selector plus every runtime-tunable parameter."""

    strategy: Strategy = Strategy.ONOFF
    th: float = 50.0  # on-off activation threshold, percent
    th1: float = 20.0  # proportional lower threshold, percent
    th2: float = 80.0  # proportional full-aperture threshold, percent
    delta: float = 5.0  # deadband half-width, percent
    hysteresis_gap: float = 0.0  # total band width around th; 0 disables
    literal_eq2: bool = False  # quadratic x = p*emg variant, fidelity runs only
    ma_window: int = DEFAULT_WINDOW

    def validate(self) -> None:
        if not isinstance(self.strategy, Strategy):
            raise ValidationError("strategy", f"unknown strategy {self.strategy!r}")
        if not 0.0 <= self.th <= 100.0:
            raise ValidationError("th", "must be in [0, 100]")
        if not 0.0 <= self.th1:
            raise ValidationError("th1", "must be >= 0")
        if not self.th1 < self.th2:
            raise ValidationError("th2", "requires th1 < th2")
        if not self.th2 <= 100.0:
            raise ValidationError("th2", "must be <= 100")
        if not 0.0 <= self.delta < 50.0:
            raise ValidationError("delta", "must be in [0, 50)")
        if self.hysteresis_gap < 0.0:
            raise ValidationError("hysteresis_gap", "must be >= 0")
        if self.hysteresis_gap > 0.0:
            if not self.th - self.hysteresis_gap / 2.0 > 0.0:
                raise ValidationError("hysteresis_gap", "lower band edge must stay > 0")
            if not self.th + self.hysteresis_gap / 2.0 < 100.0:
                raise ValidationError("hysteresis_gap", "upper band edge must stay < 100")
        if not (isinstance(self.ma_window, int) and self.ma_window >= 1):
            raise ValidationError("ma_window", "must be an integer >= 1")

    def with_patch(self, patch: dict) -> "ControlConfig":
        """New validated config with the given fields replaced."""
        fields = dict(patch)
        if "strategy" in fields:
            fields["strategy"] = parse_strategy(fields["strategy"])
        known = set(self.__dataclass_fields__)
        for k in fields:
            if k not in known:
                raise ValidationError(k, "unknown config field")
        cfg = replace(self, **fields)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "th": self.th,
            "th1": self.th1,
            "th2": self.th2,
            "delta": self.delta,
            "hysteresis_gap": self.hysteresis_gap,
            "literal_eq2": self.literal_eq2,
            "ma_window": self.ma_window,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ControlConfig":
        cfg = cls().with_patch(d)
        return cfg


def parse_strategy(value) -> Strategy:
    if isinstance(value, Strategy):
        return value
    try:
        return Strategy(str(value).lower())
    except ValueError:
        raise ValidationError("strategy", f"unknown strategy {value!r}") from None


@dataclass
class DeadbandState:
    """Follower point r and the last driven point x; |last_x - r| <= delta."""

    r: float = 0.0  # hand fully closed at rest
    last_x: float = 0.0


def onoff_step(emg: float, th: float) -> float:
    """Full open as soon as the input strictly exceeds the threshold."""
    return 1.0 if emg > th else 0.0


def onoff_hysteresis_step(emg: float, th: float, gap: float, prev: float) -> float:
    """On-off with a dead band of width gap centered on th.

    Opens above th + gap/2, closes at or below th - gap/2; inside the band
    the previous reference holds. gap = 0 reduces exactly to onoff_step.
    """
    if prev == 0.0:
        return 1.0 if emg > th + gap * 0.5 else 0.0
    return 0.0 if emg <= th - gap * 0.5 else 1.0


def proportional_map(emg: float, th1: float, th2: float, literal: bool = False) -> float:
    """Percent-domain driven point x for the proportional strategy.

    Canonical form is a clamped linear ramp hitting 100 at th2, so the
    configured upper threshold really does produce full aperture. The
    literal form x = p * emg (p the ramp gain) is quadratic in emg and
    tops out below 100 whenever th2 < 100; it is kept behind a flag for
    fidelity experiments only.
    """
    p = (emg - th1) / (th2 - th1)
    if literal:
        x = p * emg
    else:
        if p < 0.0:
            p = 0.0
        elif p > 1.0:
            p = 1.0
        x = p * 100.0
    if x < 0.0:
        x = 0.0
    elif x > 100.0:
        x = 100.0
    return x


def deadband_step(state: DeadbandState, x: float, delta: float) -> DeadbandState:
    """Advance the follower one tick; returns the new state.

    r' = x + delta  when x - r < -delta
    r' = r          when |x - r| <= delta
    r' = x - delta  when x - r > delta
    """
    r = state.r
    d = x - r
    if d < -delta:
        r = x + delta
    elif d > delta:
        r = x - delta
    return DeadbandState(r=r, last_x=x)


def rescale(r: float, delta: float) -> float:
    """Map the follower's settled span [delta, 100 - delta] onto [0, 1].

    Transients outside the span (possible right after a delta change)
    clamp to the endpoints.
    """
    out = (r - delta) / (100.0 - 2.0 * delta)
    if out < 0.0:
        out = 0.0
    elif out > 1.0:
        out = 1.0
    return out


@dataclass
class ControllerState:
    """Mutable per-session controller memory, preserved across config changes."""

    hyst_prev: float = 0.0
    deadband: DeadbandState = field(default_factory=DeadbandState)


def control_step(cfg: ControlConfig, state: ControllerState, emg: float) -> tuple[float, float]:
    """One tick of the active strategy.

    Returns (x_percent, reference): the percent-domain driven value and the
    [0, 1] aperture command. Mutates state.
    """
    if cfg.strategy is Strategy.ONOFF:
        r = onoff_hysteresis_step(emg, cfg.th, cfg.hysteresis_gap, state.hyst_prev)
        state.hyst_prev = r
        return 100.0 * r, r
    x = proportional_map(emg, cfg.th1, cfg.th2, cfg.literal_eq2)
    state.deadband = deadband_step(state.deadband, x, cfg.delta)
    return x, rescale(state.deadband.r, cfg.delta)
