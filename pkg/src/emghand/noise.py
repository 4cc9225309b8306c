"""Deterministic counter-based random streams.

Every stochastic component (electrode baseline, ripple jitter constants,
encoder noise) draws from ``(seed, stream, tick)`` through a splitmix64-style
integer hash, never from a sequential generator. A sample therefore depends
only on its coordinates: chunked and per-sample generation are bit-identical,
which is what makes paced and batch sessions interchangeable and replays
exact.

All heavy generation goes through numpy so the same code path serves both
kernel backends.
"""

from __future__ import annotations

import numpy as np

# Stream ids, mixed into the per-stream key.
STREAM_BASELINE = 1
STREAM_ENCODER = 2
STREAM_MODEL_CONST = 3

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STREAM_SALT = np.uint64(0xA3EC647659359ACD)

_U53_INV = 2.0 ** -53
_TWO_PI = 2.0 * np.pi


def _mix(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer over a uint64 array."""
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= _MIX1
    x ^= x >> np.uint64(27)
    x *= _MIX2
    x ^= x >> np.uint64(31)
    return x


def _stream_key(seed: int, stream: int) -> np.uint64:
    # Length-1 arrays: numpy array ops wrap uint64 silently, scalar ops warn.
    base = np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    salt = np.array([stream], dtype=np.uint64) * _STREAM_SALT
    return _mix(base ^ salt)[0]


def words(seed: int, stream: int, start: int, n: int) -> np.ndarray:
    """Raw uint64 hash words at counters start .. start+n-1."""
    key = _stream_key(seed, stream)
    ctr = np.arange(start, start + n, dtype=np.uint64)
    return _mix(key + ctr * _GOLDEN)


def uniforms(seed: int, stream: int, start: int, n: int) -> np.ndarray:
    """Uniform float64 samples in [0, 1)."""
    return (words(seed, stream, start, n) >> np.uint64(11)).astype(np.float64) * _U53_INV


def gaussians(seed: int, stream: int, start: int, n: int) -> np.ndarray:
    """Standard-normal float64 samples, one per counter, via Box-Muller.

    Each sample consumes the two hash words at counters 2t and 2t+1, so
    the value at tick t is independent of chunking.
    """
    w = words(seed, stream, 2 * start, 2 * n)
    w1 = w[0::2]
    w2 = w[1::2]
    u1 = ((w1 >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _U53_INV  # (0, 1]
    u2 = (w2 >> np.uint64(11)).astype(np.float64) * _U53_INV  # [0, 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def gaussian_at(seed: int, stream: int, t: int) -> float:
    """Single sample; bit-identical to gaussians(...)[t - start]."""
    return float(gaussians(seed, stream, t, 1)[0])
