"""emghand: single-electrode sEMG hand-control engine.

Signal path per 1 kHz tick: conditioned envelope (0-5 V) -> 12-bit count ->
percent of the calibrated rest/MVC range -> 50-sample moving average ->
on-off or deadband-corrected proportional reference -> simulated
single-actuator hand. Sessions are recorded to CSV and replay bit-exactly;
a WebSocket protocol exposes live telemetry and runtime threshold tuning.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .calibration import CalibrationProfile, capture_mvc, capture_rest, initial_threshold
from .control import (
    ControlConfig,
    DeadbandState,
    Strategy,
    deadband_step,
    onoff_hysteresis_step,
    onoff_step,
    proportional_map,
    rescale,
)
from .pipeline import EmgSample, MovingAverage, SmoothedSignal, dequantize, normalize, quantize
from .plant import HandState, PlantParams, encoder_read, plant_step
from .record import SessionRecord, export_csv, import_csv
from .session import Engine, EngineConfig, run_session, replay_session
from .source import IntentScript, PatientModel, PRESETS, SimSource, open_replay, synth_next

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "CalibrationProfile",
    "capture_mvc",
    "capture_rest",
    "initial_threshold",
    "ControlConfig",
    "DeadbandState",
    "Strategy",
    "deadband_step",
    "onoff_hysteresis_step",
    "onoff_step",
    "proportional_map",
    "rescale",
    "EmgSample",
    "MovingAverage",
    "SmoothedSignal",
    "dequantize",
    "normalize",
    "quantize",
    "HandState",
    "PlantParams",
    "encoder_read",
    "plant_step",
    "SessionRecord",
    "export_csv",
    "import_csv",
    "Engine",
    "EngineConfig",
    "run_session",
    "replay_session",
    "IntentScript",
    "PatientModel",
    "PRESETS",
    "SimSource",
    "open_replay",
    "synth_next",
]
