"""Wire protocol: one UTF-8 JSON object per frame, dispatched on "type".

Inbound commands: set_config {patch}, calibrate_rest, calibrate_mvc, start,
stop, set_strategy {strategy}. Outbound: telemetry, ack {config}, error
{field, msg}, state {phase, profile, config}. Frames ride WebSocket text
messages (length-delimited UTF-8 over a plain socket), so a browser console
can connect directly.
"""

from __future__ import annotations

import json

from .errors import EngineError, StateError, ValidationError
from .session import COMMAND_TYPES


def parse_inbound(text: str) -> dict:
    """Decode one inbound frame; structural validation only."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError("frame", f"not valid JSON: {e}") from None
    if not isinstance(obj, dict):
        raise ValidationError("frame", "frame must be a JSON object")
    typ = obj.get("type")
    if typ not in COMMAND_TYPES:
        raise ValidationError("type", f"unknown command type {typ!r}")
    return obj


def error_message(exc: Exception) -> dict:
    if isinstance(exc, ValidationError):
        return {"type": "error", "field": exc.field, "msg": exc.msg}
    if isinstance(exc, StateError):
        return {"type": "error", "field": None, "msg": str(exc)}
    if isinstance(exc, EngineError):
        return {"type": "error", "field": None, "msg": str(exc)}
    return {"type": "error", "field": None, "msg": f"internal: {exc}"}


def encode(msg: dict) -> str:
    return json.dumps(msg, separators=(",", ":"))
