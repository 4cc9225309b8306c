"""Session orchestration: the 1 kHz tick loop and everything around it.

One tick thread owns all pipeline/controller/plant state and drives
source -> pipeline -> controller -> plant through the block kernels
(block length 1 when paced). Commands arrive from any thread, are validated
synchronously against the queued-target state, and latch at the next block
boundary; every latched command lands in the event log at its effective
tick, so the initial config plus the event log fully determine the config
at every tick. Telemetry fans out through bounded drop-oldest queues and
never blocks the loop. Batch (unpaced) runs process large blocks and a
20-minute session takes seconds; paced runs sleep-and-spin to a 1 ms
cadence for live operation.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Iterable, Optional

import numpy as np

from . import noise
from ._kernels import (
    STRATEGY_ONOFF,
    STRATEGY_PROPORTIONAL,
    TickParams,
    TickState,
    run_ticks,
)
from .calibration import (
    CalibrationProfile,
    capture_mvc,
    capture_rest,
    initial_threshold,
)
from .control import ControlConfig, Strategy, parse_strategy
from .errors import (
    CalibrationRequiredError,
    InsufficientDataError,
    InvalidCalibrationError,
    StateError,
    ValidationError,
)
from .plant import PlantParams
from .record import SessionEvent, SessionHeader, SessionRecord

PHASE_IDLE = "idle"
PHASE_CALIBRATING_REST = "calibrating_rest"
PHASE_CALIBRATING_MVC = "calibrating_mvc"
PHASE_RUNNING = "running"

DEFAULT_DECIMATION = 20  # 50 Hz telemetry at the 1 kHz tick rate

_BATCH_BLOCK = 65536
_LISTEN_BLOCK = 1024  # command latency cap (simulated ms) for unpaced live runs

# Event types a replay re-applies; the rest are informational markers.
REPLAYABLE_EVENTS = ("start", "stop", "set_config", "set_strategy", "calibration")

COMMAND_TYPES = (
    "set_config",
    "calibrate_rest",
    "calibrate_mvc",
    "start",
    "stop",
    "set_strategy",
)


@dataclass
class EngineConfig:
    control: ControlConfig = field(default_factory=ControlConfig)
    plant: PlantParams = field(default_factory=PlantParams)
    profile: Optional[CalibrationProfile] = None
    decimation: int = DEFAULT_DECIMATION
    seed: int = 0
    rest_window_ms: int = 1000
    mvc_window_ms: int = 1000

    def validate(self) -> None:
        self.control.validate()
        if self.decimation < 1:
            raise ValidationError("decimation", "must be >= 1")
        if self.rest_window_ms < 1000:
            raise ValidationError("rest_window_ms", "must be >= 1000 (1 s at 1 kHz)")
        if self.mvc_window_ms < 1000:
            raise ValidationError("mvc_window_ms", "must be >= 1000 (1 s at 1 kHz)")

    def snapshot(self) -> dict:
        """Header-facing config dict (everything but profile/seed)."""
        return {
            "control": self.control.to_dict(),
            "plant": self.plant.to_dict(),
            "decimation": self.decimation,
            "rest_window_ms": self.rest_window_ms,
            "mvc_window_ms": self.mvc_window_ms,
        }

    @classmethod
    def from_snapshot(cls, snap: dict, profile: Optional[dict], seed: int) -> "EngineConfig":
        return cls(
            control=ControlConfig.from_dict(snap["control"]),
            plant=PlantParams.from_dict(snap["plant"]),
            profile=CalibrationProfile.from_dict(profile) if profile else None,
            decimation=int(snap.get("decimation", DEFAULT_DECIMATION)),
            seed=seed,
            rest_window_ms=int(snap.get("rest_window_ms", 1000)),
            mvc_window_ms=int(snap.get("mvc_window_ms", 1000)),
        )


class TelemetrySubscription:
    """Bounded drop-oldest frame queue; reading never back-pressures the loop."""

    def __init__(self, decimation: int, maxlen: int = 256):
        self.decimation = decimation
        self.frames: deque = deque(maxlen=maxlen)
        self.drops = 0
        self._event = threading.Event()
        self.closed = False

    def _push(self, frame: dict) -> None:
        if len(self.frames) == self.frames.maxlen:
            self.drops += 1
        self.frames.append(frame)
        self._event.set()

    def get(self, timeout: Optional[float] = None) -> Optional[dict]:
        """Oldest pending frame, or None on timeout."""
        deadline = None if timeout is None else time.monotonic() + timeout
        while True:
            try:
                return self.frames.popleft()
            except IndexError:
                pass
            if self.closed:
                return None
            remaining = None if deadline is None else deadline - time.monotonic()
            if remaining is not None and remaining <= 0:
                return None
            self._event.wait(0.05 if remaining is None else min(0.05, remaining))
            self._event.clear()

    def drain(self) -> list:
        out = []
        while True:
            try:
                out.append(self.frames.popleft())
            except IndexError:
                return out

    def close(self) -> None:
        self.closed = True
        self._event.set()


class _ColumnBuffer:
    """Append-only column store: bulk arrays plus a scalar spill list."""

    def __init__(self, dtype):
        self.dtype = dtype
        self.chunks: list = []
        self.scalars: list = []

    def _flush_scalars(self) -> None:
        if self.scalars:
            self.chunks.append(np.asarray(self.scalars, dtype=self.dtype))
            self.scalars = []

    def append_block(self, arr: np.ndarray) -> None:
        if len(arr) == 1:
            self.scalars.append(arr[0])
            if len(self.scalars) >= 4096:
                self._flush_scalars()
            return
        self._flush_scalars()
        self.chunks.append(arr)

    def finalize(self) -> np.ndarray:
        self._flush_scalars()
        if not self.chunks:
            return np.zeros(0, dtype=self.dtype)
        return np.concatenate(self.chunks)


class Engine:
    """Owns one session: source, pipeline/control/plant state, record, telemetry."""

    def __init__(self, config: EngineConfig, source):
        config.validate()
        self.config = config
        self.source = source
        self.seed = config.seed

        self._lock = threading.Lock()  # guards command/target state + listeners
        self._pending: deque = deque()
        self._active_config = config.control
        self._target_config = config.control
        self._profile = config.profile
        self._phase = PHASE_IDLE
        # Queued-target mirrors used for synchronous command validation.
        self._vphase = PHASE_IDLE
        self._vhas_profile = config.profile is not None
        self._vpending_rest = False

        self._pending_rest: Optional[int] = None
        self._capture_kind: Optional[str] = None
        self._capture_end = 0
        self._capture_buf: list = []

        self._state = TickState(ma_buf=np.zeros(config.control.ma_window, dtype=np.float64))
        self._t = 0
        self._events: list[SessionEvent] = []
        self._subs: list[TelemetrySubscription] = []
        self._listeners: list[Callable[[dict], None]] = []
        self._stop_flag = threading.Event()

        self._config_snapshot = self._active_config.to_dict()
        self._zeros = np.zeros(0, dtype=np.float64)

        self.late_max_ms = 0.0  # worst tick lateness over the whole run
        self.late_over_2ms = 0
        # Rolling per-1000-tick window, so cadence during a given stretch
        # (e.g. console load) is observable despite startup hiccups.
        self._late_window_start = 0
        self._late_window_max = 0.0
        self.late_prev_window_max_ms = 0.0

        self._cols = None  # created in run()

    # ------------------------------------------------------------------ state

    @property
    def t_ms(self) -> int:
        return self._t

    @property
    def phase(self) -> str:
        return self._phase

    @property
    def active_config(self) -> ControlConfig:
        return self._active_config

    @property
    def profile(self) -> Optional[CalibrationProfile]:
        return self._profile

    def state_message(self) -> dict:
        return {
            "type": "state",
            "phase": self._phase,
            "profile": self._profile.to_dict() if self._profile else None,
            "config": self._config_snapshot,
            "t_ms": self._t,
        }

    def add_listener(self, fn: Callable[[dict], None]) -> None:
        """fn receives state/error dicts; must not block (called on tick thread)."""
        with self._lock:
            self._listeners.append(fn)

    def remove_listener(self, fn) -> None:
        with self._lock:
            if fn in self._listeners:
                self._listeners.remove(fn)

    def _broadcast(self, msg: dict) -> None:
        with self._lock:
            listeners = list(self._listeners)
        for fn in listeners:
            fn(msg)

    # --------------------------------------------------------------- commands

    def handle_command(self, cmd: dict) -> dict:
        """Validate and queue a command; the tick thread latches it.

        Returns the ack carrying the resulting active config. Raises
        ValidationError / StateError; the caller maps those to error
        messages. Thread-safe.
        """
        typ = cmd.get("type")
        if typ not in COMMAND_TYPES:
            raise ValidationError("type", f"unknown command type {typ!r}")
        with self._lock:
            if typ == "set_config":
                patch = cmd.get("patch")
                if not isinstance(patch, dict):
                    raise ValidationError("patch", "set_config needs a patch object")
                self._target_config = self._target_config.with_patch(patch)
                self._pending.append(("set_config", {"patch": dict(patch)}))
            elif typ == "set_strategy":
                strategy = parse_strategy(cmd.get("strategy"))
                self._target_config = self._target_config.with_patch(
                    {"strategy": strategy}
                )
                self._pending.append(("set_strategy", {"strategy": strategy.value}))
            elif typ == "calibrate_rest":
                if self._vphase != PHASE_IDLE:
                    raise StateError(f"cannot calibrate while {self._vphase}")
                self._vphase = PHASE_CALIBRATING_REST
                self._pending.append(("calibrate_rest", {}))
            elif typ == "calibrate_mvc":
                if self._vphase != PHASE_IDLE:
                    raise StateError(f"cannot calibrate while {self._vphase}")
                if not self._vpending_rest:
                    raise StateError("rest capture required before mvc capture")
                self._vphase = PHASE_CALIBRATING_MVC
                self._pending.append(("calibrate_mvc", {}))
            elif typ == "start":
                if self._vphase == PHASE_RUNNING:
                    raise StateError("already running")
                if self._vphase != PHASE_IDLE:
                    raise StateError(f"cannot start while {self._vphase}")
                if not self._vhas_profile:
                    raise CalibrationRequiredError()
                self._vphase = PHASE_RUNNING
                self._pending.append(("start", {}))
            elif typ == "stop":
                self._vphase = PHASE_IDLE
                self._pending.append(("stop", {}))
            return {
                "type": "ack",
                "cmd": typ,
                "config": self._target_config.to_dict(),
            }

    def request_stop(self) -> None:
        """End the run loop (record is flushed); not the same as a stop command."""
        self._stop_flag.set()

    # -------------------------------------------------------------- telemetry

    def telemetry_stream(self, decimation: Optional[int] = None) -> TelemetrySubscription:
        d = self.config.decimation if decimation is None else int(decimation)
        if d < 1:
            raise ValidationError("decimation", "must be >= 1")
        sub = TelemetrySubscription(d)
        with self._lock:
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: TelemetrySubscription) -> None:
        sub.close()
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)

    # ------------------------------------------------------------- tick loop

    def _apply_event(self, etype: str, payload: dict) -> None:
        """Mutate engine state for one latched event (tick thread only)."""
        if etype == "set_config" or etype == "set_strategy":
            if etype == "set_strategy":
                patch = {"strategy": payload["strategy"]}
            else:
                patch = payload["patch"]
            new_cfg = self._active_config.with_patch(patch)
            if new_cfg.ma_window != self._active_config.ma_window:
                self._state.resize_window(new_cfg.ma_window)
            self._active_config = new_cfg
            self._config_snapshot = new_cfg.to_dict()
        elif etype == "start":
            self._phase = PHASE_RUNNING
        elif etype == "stop":
            self._phase = PHASE_IDLE
        elif etype == "calibrate_rest":
            self._phase = PHASE_CALIBRATING_REST
            self._capture_kind = "rest"
            self._capture_end = self._t + self.config.rest_window_ms
            self._capture_buf = []
        elif etype == "calibrate_mvc":
            self._phase = PHASE_CALIBRATING_MVC
            self._capture_kind = "mvc"
            self._capture_end = self._t + self.config.mvc_window_ms
            self._capture_buf = []
        elif etype == "calibration":
            self._profile = CalibrationProfile.from_dict(payload)
            with self._lock:
                self._vhas_profile = True

    def _log_and_apply(self, etype: str, payload: dict) -> None:
        self._events.append(SessionEvent(self._t, etype, payload))
        self._apply_event(etype, payload)

    def _latch_pending(self) -> None:
        while True:
            with self._lock:
                if not self._pending:
                    return
                etype, payload = self._pending.popleft()
            self._log_and_apply(etype, payload)
            if etype in ("start", "stop", "calibrate_rest", "calibrate_mvc"):
                self._broadcast(self.state_message())

    def _finish_capture(self) -> None:
        kind = self._capture_kind
        window = np.concatenate(self._capture_buf) if self._capture_buf else np.zeros(0)
        self._capture_kind = None
        self._capture_buf = []
        try:
            if kind == "rest":
                value = capture_rest(window)
                self._pending_rest = value
                self._events.append(SessionEvent(self._t, "rest_captured", {"rest_raw": value}))
                with self._lock:
                    self._vpending_rest = True
            else:
                mvc_value = capture_mvc(window)
                stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
                profile = CalibrationProfile(
                    rest_raw=self._pending_rest,
                    mvc_raw=mvc_value,
                    captured_at=stamp,
                    rest_window_ms=self.config.rest_window_ms,
                    mvc_window_ms=self.config.mvc_window_ms,
                )
                self._pending_rest = None
                with self._lock:
                    self._vpending_rest = False
                self._log_and_apply("calibration", profile.to_dict())
                # Fresh session anchor: threshold back to half the range.
                self._log_and_apply(
                    "set_config", {"patch": {"th": initial_threshold(profile)}}
                )
                with self._lock:
                    self._target_config = self._target_config.with_patch(
                        {"th": initial_threshold(profile)}
                    )
        except (InsufficientDataError, InvalidCalibrationError) as e:
            self._pending_rest = None
            with self._lock:
                self._vpending_rest = False
            self._events.append(
                SessionEvent(self._t, "calibration_failed", {"reason": str(e)})
            )
            self._broadcast({"type": "error", "field": "calibration", "msg": str(e)})
        self._phase = PHASE_IDLE
        with self._lock:
            self._vphase = PHASE_IDLE
        self._broadcast(self.state_message())

    def _tick_params(self) -> TickParams:
        cfg = self._active_config
        plant = self.config.plant
        calibrated = self._profile is not None
        return TickParams(
            calibrated=calibrated,
            running=self._phase == PHASE_RUNNING,
            rest=float(self._profile.rest_raw) if calibrated else 0.0,
            mvc=float(self._profile.mvc_raw) if calibrated else 1.0,
            window=cfg.ma_window,
            strategy=STRATEGY_ONOFF if cfg.strategy is Strategy.ONOFF else STRATEGY_PROPORTIONAL,
            th=cfg.th,
            th1=cfg.th1,
            th2=cfg.th2,
            delta=cfg.delta,
            gap=cfg.hysteresis_gap,
            literal=cfg.literal_eq2,
            dt_ms=1.0,
            tau_ms=plant.time_constant_ms,
            max_rate=plant.max_rate,
        )

    def _enc_noise(self, t0: int, n: int) -> np.ndarray:
        sd = self.config.plant.encoder_noise_sd
        if sd > 0.0:
            return sd * noise.gaussians(self.seed, noise.STREAM_ENCODER, t0, n)
        if len(self._zeros) < n:
            self._zeros = np.zeros(n, dtype=np.float64)
        return self._zeros[:n]

    def _publish_telemetry(self, t0: int, n: int, emg, ref, pos) -> None:
        with self._lock:
            subs = [s for s in self._subs if not s.closed]
        if not subs:
            return
        snapshot = self._config_snapshot
        for sub in subs:
            d = sub.decimation
            first = t0 if t0 % d == 0 else t0 + (d - t0 % d)
            for t in range(first, t0 + n, d):
                k = t - t0
                sub._push(
                    {
                        "type": "telemetry",
                        "t_ms": t,
                        "emg_percent": float(emg[k]),
                        "reference": float(ref[k]),
                        "position": float(pos[k]),
                        "config": snapshot,
                        "late_max_ms": self.late_max_ms,
                        "late_window_ms": max(
                            self._late_window_max, self.late_prev_window_max_ms
                        ),
                        "late_over_2ms": self.late_over_2ms,
                    }
                )

    def run(
        self,
        duration_ms: Optional[int] = None,
        paced: bool = False,
        scripted_events: Optional[Iterable[tuple[int, str, dict]]] = None,
        auto_start: bool = False,
        listening: bool = False,
    ) -> SessionRecord:
        """Execute the session and return the complete record.

        scripted_events are (t_ms, type, payload) tuples latched exactly at
        their tick (replay path and batch experiments). auto_start opens the
        control phase at tick 0 when a profile is already present.
        """
        if duration_ms is None and not hasattr(self.source, "__len__") and not listening:
            raise ValidationError(
                "duration_ms", "required for endless sources without a server"
            )
        script = sorted(scripted_events or [], key=lambda e: e[0])
        for t_ev, etype, _ in script:
            if etype not in REPLAYABLE_EVENTS:
                raise ValidationError("events", f"cannot script event type {etype!r}")
            if t_ev < 0:
                raise ValidationError("events", "event tick must be >= 0")

        if auto_start:
            if self._profile is None:
                raise CalibrationRequiredError()
            script.insert(0, (0, "start", {}))
            with self._lock:
                self._vphase = PHASE_RUNNING

        cols = {
            "t_ms": _ColumnBuffer(np.int64),
            "volts": _ColumnBuffer(np.float64),
            "raw": _ColumnBuffer(np.int32),
            "emg_percent": _ColumnBuffer(np.float64),
            "x_percent": _ColumnBuffer(np.float64),
            "reference": _ColumnBuffer(np.float64),
            "position": _ColumnBuffer(np.float64),
        }
        header = SessionHeader(
            seed=self.seed,
            profile=self._profile.to_dict() if self._profile else None,
            config=self.config.snapshot(),
            source=self.source.describe() if hasattr(self.source, "describe") else {},
        )

        max_block = 1 if paced else (_LISTEN_BLOCK if listening else _BATCH_BLOCK)
        script_i = 0
        wall_start = time.perf_counter()
        exhausted = False

        while not self._stop_flag.is_set():
            t = self._t
            if duration_ms is not None and t >= duration_ms:
                break

            # Latch everything scheduled for this boundary.
            while script_i < len(script) and script[script_i][0] <= t:
                _, etype, payload = script[script_i]
                self._log_and_apply(etype, payload)
                script_i += 1
            self._latch_pending()
            if self._capture_kind is not None and self._t >= self._capture_end:
                self._finish_capture()

            block_end = t + max_block
            if duration_ms is not None:
                block_end = min(block_end, duration_ms)
            if script_i < len(script):
                block_end = min(block_end, script[script_i][0])
            if self._capture_kind is not None:
                block_end = min(block_end, self._capture_end)
            n = block_end - t
            if n <= 0:
                continue

            volts = self.source.take(n)
            got = len(volts)
            if got < n:
                exhausted = True
                n = got
                if n == 0:
                    break
                volts = volts[:n]

            out_raw = np.empty(n, dtype=np.int32)
            out_emg = np.empty(n, dtype=np.float64)
            out_x = np.empty(n, dtype=np.float64)
            out_ref = np.empty(n, dtype=np.float64)
            out_pos = np.empty(n, dtype=np.float64)
            volts = np.ascontiguousarray(volts, dtype=np.float64)

            run_ticks(
                volts,
                self._enc_noise(t, n),
                self._tick_params(),
                self._state,
                out_raw,
                out_emg,
                out_x,
                out_ref,
                out_pos,
            )

            if self._capture_kind is not None:
                self._capture_buf.append(out_raw.copy())

            cols["t_ms"].append_block(np.arange(t, t + n, dtype=np.int64))
            cols["volts"].append_block(volts)
            cols["raw"].append_block(out_raw)
            cols["emg_percent"].append_block(out_emg)
            cols["x_percent"].append_block(out_x)
            cols["reference"].append_block(out_ref)
            cols["position"].append_block(out_pos)

            self._publish_telemetry(t, n, out_emg, out_ref, out_pos)
            self._t = t + n

            if paced:
                # Absolute-target sleep: no busy wait (a spinning tick thread
                # would hold the GIL and starve the console threads); Linux
                # timer overshoot is well under the 2 ms lateness budget.
                target = wall_start + self._t * 0.001
                remaining = target - time.perf_counter()
                if remaining > 0:
                    time.sleep(remaining)
                late = (time.perf_counter() - target) * 1000.0
                if late > self.late_max_ms:
                    self.late_max_ms = late
                if late > 2.0:
                    self.late_over_2ms += 1
                if self._t - self._late_window_start >= 1000:
                    self.late_prev_window_max_ms = self._late_window_max
                    self._late_window_max = 0.0
                    self._late_window_start = self._t
                if late > self._late_window_max:
                    self._late_window_max = late

            if exhausted:
                break

        columns = {name: buf.finalize() for name, buf in cols.items()}
        record = SessionRecord(header, columns, list(self._events))
        for sub in list(self._subs):
            sub.close()
        return record


def run_session(
    config: EngineConfig,
    source,
    duration_ms: Optional[int],
    scripted_events=None,
    paced: bool = False,
    auto_start: bool = True,
) -> SessionRecord:
    """One-shot session: build an engine, run it, return the record."""
    engine = Engine(config, source)
    return engine.run(
        duration_ms=duration_ms,
        paced=paced,
        scripted_events=scripted_events,
        auto_start=auto_start,
    )


def replay_session(record: SessionRecord, paced: bool = False) -> SessionRecord:
    """Re-run a recorded session from its own volts, seed, config and events.

    Capture-window markers are skipped (their resulting calibration events
    carry the profile), so the rebuilt reference and position columns are
    bit-identical to the original.
    """
    from .source import ReplaySource

    config = EngineConfig.from_snapshot(
        record.header.config, record.header.profile, record.header.seed
    )
    source = ReplaySource(record.columns["volts"], path="<record>")
    events = [
        (e.t_ms, e.type, e.payload)
        for e in record.events
        if e.type in REPLAYABLE_EVENTS
    ]
    engine = Engine(config, source)
    return engine.run(
        duration_ms=record.n_rows,
        paced=paced,
        scripted_events=events,
        auto_start=False,
    )
