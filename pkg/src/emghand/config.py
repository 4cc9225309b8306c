"""Engine configuration file: YAML (JSON-compatible) key-value tree.

Covers the patient model (preset name, inline mapping, or file reference),
the intent script, control and plant parameters, an optional preloaded
calibration profile, telemetry decimation, capture windows, and the seed.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import yaml

from .calibration import CalibrationProfile
from .control import ControlConfig
from .errors import ValidationError
from .plant import PlantParams
from .session import DEFAULT_DECIMATION, EngineConfig
from .source import PRESETS, IntentScript, PatientModel


def _load_yaml(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValidationError("config", f"{path}: top level must be a mapping")
    return data


def build_model(spec) -> PatientModel:
    """Preset name, inline mapping, or path to a YAML mapping."""
    if isinstance(spec, PatientModel):
        return spec
    if isinstance(spec, str):
        if spec in PRESETS:
            return PRESETS[spec]
        p = Path(spec)
        if p.exists():
            return PatientModel.from_dict(_load_yaml(p))
        raise ValidationError(
            "model", f"unknown preset {spec!r} (have {', '.join(sorted(PRESETS))}) and no such file"
        )
    if isinstance(spec, dict):
        return PatientModel.from_dict(spec)
    raise ValidationError("model", f"cannot build a patient model from {type(spec).__name__}")


def build_script(spec) -> IntentScript:
    """Inline segment list, {"segments": [...]} mapping, or path to one."""
    if isinstance(spec, IntentScript):
        return spec
    if spec is None:
        return IntentScript()
    if isinstance(spec, str):
        data = _load_yaml(spec)
        return build_script(data)
    if isinstance(spec, dict):
        return IntentScript.from_pairs(spec.get("segments", []))
    if isinstance(spec, list):
        return IntentScript.from_pairs(spec)
    raise ValidationError("script", f"cannot build a script from {type(spec).__name__}")


def engine_config_from_dict(data: dict) -> EngineConfig:
    control = ControlConfig.from_dict(data.get("control", {}))
    plant = PlantParams.from_dict(data.get("plant", {}))
    profile: Optional[CalibrationProfile] = None
    calib = data.get("calibration")
    if calib:
        profile = CalibrationProfile.from_dict(calib)
    telemetry = data.get("telemetry", {}) or {}
    capture = data.get("capture", {}) or {}
    cfg = EngineConfig(
        control=control,
        plant=plant,
        profile=profile,
        decimation=int(telemetry.get("decimation", DEFAULT_DECIMATION)),
        seed=int(data.get("seed", 0)),
        rest_window_ms=int(capture.get("rest_window_ms", 1000)),
        mvc_window_ms=int(capture.get("mvc_window_ms", 1000)),
    )
    cfg.validate()
    return cfg


def load_config(path) -> tuple[EngineConfig, Optional[PatientModel], IntentScript]:
    """Parse a config file into (engine config, model or None, script)."""
    data = _load_yaml(path)
    cfg = engine_config_from_dict(data)
    model = build_model(data["model"]) if "model" in data else None
    script = build_script(data.get("script"))
    return cfg, model, script
