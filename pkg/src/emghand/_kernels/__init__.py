"""Hot-loop kernels: compiled core with a pure fallback, selected at import.

Set EMGHAND_PURE=1 to force the pure backend (used by the equivalence tests
and the benchmark). Both backends are bit-identical; only speed differs.
"""

import os

from . import pure as _pure
from .types import STRATEGY_ONOFF, STRATEGY_PROPORTIONAL, TickParams, TickState

try:
    from . import _core as _compiled
except ImportError:
    _compiled = None

if os.environ.get("EMGHAND_PURE") == "1" or _compiled is None:
    _active = _pure
else:
    _active = _compiled

BACKEND = _active.BACKEND
run_ticks = _active.run_ticks
deadband_run = _active.deadband_run


def available_backends() -> dict:
    """Name -> module for every importable backend."""
    out = {"pure": _pure}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


__all__ = [
    "BACKEND",
    "STRATEGY_ONOFF",
    "STRATEGY_PROPORTIONAL",
    "TickParams",
    "TickState",
    "available_backends",
    "deadband_run",
    "run_ticks",
]
