"""Conditioned-electrode signal sources.

Produces the 0-5 V rectified envelope a surface electrode would hand to the
ADC, either from a parametric post-stroke patient model or by replaying the
volts column of a recorded session file. The synthetic model is built from
closed-form terms evaluated per tick (no sequential RNG state), so any slice
of the stream can be regenerated bit-exactly from (model, script, seed).

Signal model per tick t (milliseconds):

    volts(t) = clamp(baseline(t) + effort(t) * mvc_effective(t) + ripple(t), 0, 5)

    baseline(t)      clipped Gaussian floor noise, never below 0 V
    effort(t)        scripted intent filtered by a first-order lag
    mvc_effective(t) linear fatigue decay of the contraction ceiling
    ripple(t)        slow sinusoid plus seeded band-limited jitter

Preset models ("severe", "moderate", "mild") are simulator defaults for
desk testing, not clinical parameter claims.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import noise
from .errors import ValidationError

FULL_SCALE_VOLTS = 5.0

_MS_PER_MINUTE = 60000.0

# Relative amplitudes of the jitter partials layered on the main ripple tone.
_JITTER_WEIGHTS = (0.25, 0.15, 0.10)


@dataclass(frozen=True)
class PatientModel:
    """Parametric description of one simulated patient's electrode output."""

    rest_noise_mean: float = 0.04  # volts
    rest_noise_sd: float = 0.01  # volts
    mvc_level: float = 2.5  # volts
    ripple_amplitude: float = 0.0  # volts
    ripple_period_ms: float = 500.0
    fatigue_rate: float = 0.0  # fraction of MVC lost per minute
    contraction_rise_ms: float = 200.0

    def __post_init__(self):
        if not 0.0 <= self.rest_noise_mean < self.mvc_level <= FULL_SCALE_VOLTS:
            raise ValidationError(
                "mvc_level", "requires 0 <= rest_noise_mean < mvc_level <= 5.0"
            )
        if self.rest_noise_sd < 0.0:
            raise ValidationError("rest_noise_sd", "must be >= 0")
        if self.ripple_amplitude < 0.0:
            raise ValidationError("ripple_amplitude", "must be >= 0")
        if self.fatigue_rate < 0.0:
            raise ValidationError("fatigue_rate", "must be >= 0")
        if self.ripple_period_ms <= 0.0:
            raise ValidationError("ripple_period_ms", "must be > 0")
        if self.contraction_rise_ms <= 0.0:
            raise ValidationError("contraction_rise_ms", "must be > 0")

    def mvc_effective(self, t_ms: float) -> float:
        """Contraction ceiling after t milliseconds of fatigue decay."""
        factor = 1.0 - self.fatigue_rate * (t_ms / _MS_PER_MINUTE)
        if factor < 0.0:
            factor = 0.0
        return self.mvc_level * factor

    def to_dict(self) -> dict:
        return {
            "rest_noise_mean": self.rest_noise_mean,
            "rest_noise_sd": self.rest_noise_sd,
            "mvc_level": self.mvc_level,
            "ripple_amplitude": self.ripple_amplitude,
            "ripple_period_ms": self.ripple_period_ms,
            "fatigue_rate": self.fatigue_rate,
            "contraction_rise_ms": self.contraction_rise_ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PatientModel":
        return cls(**d)


PRESETS = {
    # Very weak signal, large relative ripple, noticeable fatigue.
    "severe": PatientModel(
        rest_noise_mean=0.05,
        rest_noise_sd=0.02,
        mvc_level=0.5,
        ripple_amplitude=0.08,
        ripple_period_ms=400.0,
        fatigue_rate=0.03,
        contraction_rise_ms=400.0,
    ),
    "moderate": PatientModel(
        rest_noise_mean=0.05,
        rest_noise_sd=0.015,
        mvc_level=1.2,
        ripple_amplitude=0.10,
        ripple_period_ms=500.0,
        fatigue_rate=0.02,
        contraction_rise_ms=300.0,
    ),
    "mild": PatientModel(
        rest_noise_mean=0.04,
        rest_noise_sd=0.01,
        mvc_level=2.5,
        ripple_amplitude=0.12,
        ripple_period_ms=600.0,
        fatigue_rate=0.01,
        contraction_rise_ms=200.0,
    ),
}


@dataclass(frozen=True)
class IntentSegment:
    start_ms: int
    end_ms: int
    effort: float  # fraction of MVC in [0, 1]


class IntentScript:
    """Ordered, non-overlapping effort segments; effort 0 between segments."""

    def __init__(self, segments: Iterable[IntentSegment] = ()):
        segs = tuple(segments)
        prev_end = 0
        for i, s in enumerate(segs):
            if s.start_ms < 0 or s.end_ms <= s.start_ms:
                raise ValidationError(f"segments[{i}]", "requires 0 <= start < end")
            if s.start_ms < prev_end:
                raise ValidationError(f"segments[{i}]", "segments overlap or out of order")
            if not 0.0 <= s.effort <= 1.0:
                raise ValidationError(f"segments[{i}].effort", "must be in [0, 1]")
            prev_end = s.end_ms
        self.segments = segs

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence]) -> "IntentScript":
        return cls(IntentSegment(int(a), int(b), float(e)) for a, b, e in pairs)

    def to_list(self) -> list:
        return [[s.start_ms, s.end_ms, s.effort] for s in self.segments]

    def target_level(self, t_ms: float) -> float:
        """Raw scripted effort at time t, before the contraction lag."""
        for s in self.segments:
            if s.start_ms <= t_ms < s.end_ms:
                return s.effort
        return 0.0

    def pieces(self) -> list[tuple[int, float]]:
        """Piecewise-constant target timeline as (start_ms, target) knots."""
        knots: list[tuple[int, float]] = [(0, 0.0)]
        for s in self.segments:
            if s.start_ms > knots[-1][0]:
                knots.append((s.start_ms, s.effort))
            else:  # segment starts at 0 or flush against the previous one
                knots[-1] = (knots[-1][0], s.effort)
            knots.append((s.end_ms, 0.0))
        return knots


class _EffortLag:
    """First-order response of the effort level to the scripted targets.

    Within each constant-target piece the lag has the closed form
    e(t) = T + (e0 - T) * exp(-(t - t0) / tau), evaluated directly at each
    tick. Values depend only on (script, tau, t), never on chunk boundaries.
    """

    def __init__(self, script: IntentScript, tau_ms: float):
        self.tau = tau_ms
        knots = script.pieces()
        starts = [k[0] for k in knots]
        targets = [k[1] for k in knots]
        levels = [0.0]  # effort at each piece start, chained in closed form
        for i in range(1, len(knots)):
            dt = starts[i] - starts[i - 1]
            t_prev = targets[i - 1]
            levels.append(t_prev + (levels[i - 1] - t_prev) * math.exp(-dt / self.tau))
        self.starts = np.asarray(starts, dtype=np.float64)
        self.targets = np.asarray(targets, dtype=np.float64)
        self.levels = np.asarray(levels, dtype=np.float64)

    def at(self, t_ms: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.starts, t_ms, side="right") - 1
        t0 = self.starts[idx]
        target = self.targets[idx]
        e0 = self.levels[idx]
        return target + (e0 - target) * np.exp(-(t_ms - t0) / self.tau)


class SimSource:
    """Synthetic patient stream: sequential pulls at 1 ms spacing.

    Never exhausts. Safe to construct on any thread and hand to the tick
    thread; pulls themselves are single-consumer.
    """

    def __init__(self, model: PatientModel, script: IntentScript, seed: int = 0):
        self.model = model
        self.script = script
        self.seed = seed
        self._lag = _EffortLag(script, model.contraction_rise_ms)
        self._t = 0
        # Jitter partials: seeded periods inside [0.5, 2.0] x ripple period,
        # seeded phases; fixed for the whole session.
        u = noise.uniforms(seed, noise.STREAM_MODEL_CONST, 0, 2 * len(_JITTER_WEIGHTS))
        self._jitter_periods = model.ripple_period_ms * (0.5 + 1.5 * u[0::2])
        self._jitter_phases = 2.0 * np.pi * u[1::2]

    def describe(self) -> dict:
        return {
            "kind": "sim",
            "model": self.model.to_dict(),
            "script": self.script.to_list(),
        }

    def volts_at(self, t0: int, n: int) -> np.ndarray:
        """Envelope volts for ticks t0 .. t0+n-1, independent of pull history."""
        m = self.model
        t = np.arange(t0, t0 + n, dtype=np.float64)

        effort = self._lag.at(t)
        fatigue = 1.0 - m.fatigue_rate * (t / _MS_PER_MINUTE)
        np.maximum(fatigue, 0.0, out=fatigue)
        v = effort * (m.mvc_level * fatigue)

        if m.rest_noise_sd > 0.0 or m.rest_noise_mean > 0.0:
            g = noise.gaussians(self.seed, noise.STREAM_BASELINE, t0, n)
            baseline = m.rest_noise_mean + m.rest_noise_sd * g
            np.maximum(baseline, 0.0, out=baseline)
            v = baseline + v

        if m.ripple_amplitude > 0.0:
            ripple = m.ripple_amplitude * np.sin(2.0 * np.pi * t / m.ripple_period_ms)
            for w, period, phase in zip(
                _JITTER_WEIGHTS, self._jitter_periods, self._jitter_phases
            ):
                ripple += (m.ripple_amplitude * w) * np.sin(
                    2.0 * np.pi * t / period + phase
                )
            v = v + ripple

        return np.clip(v, 0.0, FULL_SCALE_VOLTS)

    def take(self, n: int) -> np.ndarray:
        out = self.volts_at(self._t, n)
        self._t += n
        return out


def synth_next(
    model: PatientModel, script: IntentScript, t_ms: int, seed: int = 0
) -> float:
    """Single envelope sample at tick t; bit-identical to block generation."""
    if t_ms < 0:
        raise ValidationError("t_ms", "must be >= 0")
    return float(SimSource(model, script, seed).volts_at(t_ms, 1)[0])


class ReplaySource:
    """Replays the volts column of a recorded session file at 1 ms spacing."""

    def __init__(self, volts: np.ndarray, path: str = ""):
        self.volts = np.asarray(volts, dtype=np.float64)
        self.path = path
        self._t = 0

    def describe(self) -> dict:
        return {"kind": "replay", "path": self.path}

    def __len__(self) -> int:
        return len(self.volts)

    def take(self, n: int) -> np.ndarray:
        """Up to n samples; a short (possibly empty) block signals exhaustion."""
        out = self.volts[self._t : self._t + n]
        self._t += len(out)
        return out


def open_replay(path) -> ReplaySource:
    """Open a session CSV and expose its volts column as a sample stream.

    Raises RecordParseError (with the offending line number) on malformed
    content and RecordSchemaError when the volts column is missing.
    """
    from .record import import_csv  # session CSV format is owned by record

    rec = import_csv(path)
    return ReplaySource(rec.columns["volts"], path=str(path))
