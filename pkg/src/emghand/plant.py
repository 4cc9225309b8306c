"""Single-actuator hand model: first-order lag with a slew limit.

The motor tracks the aperture reference with time constant time_constant_ms,
rate-limited to max_rate (full stroke per second by default), clamped to
[0, 1]. A simulated magnetic encoder reports the reached position, optionally
with seeded Gaussian noise. Defaults are simulator choices, not measured
hardware values.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import noise
from .errors import ValidationError


@dataclass(frozen=True)
class PlantParams:
    max_rate: float = 1.0  # aperture fraction per second
    time_constant_ms: float = 80.0
    encoder_noise_sd: float = 0.0  # aperture fraction

    def __post_init__(self):
        if self.max_rate <= 0.0:
            raise ValidationError("max_rate", "must be > 0")
        if self.time_constant_ms <= 0.0:
            raise ValidationError("time_constant_ms", "must be > 0")
        if self.encoder_noise_sd < 0.0:
            raise ValidationError("encoder_noise_sd", "must be >= 0")

    def to_dict(self) -> dict:
        return {
            "max_rate": self.max_rate,
            "time_constant_ms": self.time_constant_ms,
            "encoder_noise_sd": self.encoder_noise_sd,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PlantParams":
        return cls(**d)


@dataclass
class HandState:
    position: float = 0.0  # aperture fraction, 0 = fully closed
    velocity: float = 0.0  # aperture fraction per second
    reference: float = 0.0


def plant_step(state: HandState, reference: float, dt_ms: float, params: PlantParams) -> HandState:
    """Advance the position loop by dt_ms toward the reference.

    Euler update of the lag, capped by the slew limit; the position can
    approach the reference but never overshoot it, matching an encoder
    trace that trails the command.
    """
    if dt_ms <= 0.0:
        raise ValidationError("dt_ms", "must be > 0")
    pos = state.position
    step = (reference - pos) * (dt_ms / params.time_constant_ms)
    cap = params.max_rate * (dt_ms * 0.001)
    if step > cap:
        step = cap
    elif step < -cap:
        step = -cap
    new_pos = pos + step
    if new_pos < 0.0:
        new_pos = 0.0
    elif new_pos > 1.0:
        new_pos = 1.0
    vel = (new_pos - pos) * (1000.0 / dt_ms)
    return HandState(position=new_pos, velocity=vel, reference=reference)


def encoder_read(state: HandState, params: PlantParams, seed: int, t_ms: int = 0) -> float:
    """Reported aperture: position plus seeded Gaussian noise, clamped to [0, 1]."""
    pos = state.position
    if params.encoder_noise_sd > 0.0:
        pos = pos + params.encoder_noise_sd * noise.gaussian_at(
            seed, noise.STREAM_ENCODER, t_ms
        )
    if pos < 0.0:
        pos = 0.0
    elif pos > 1.0:
        pos = 1.0
    return pos
