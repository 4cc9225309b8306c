"""Session record structure and its CSV on-disk format.

Layout: commented `# key=value` preamble (version, seed, profile, initial
config, source descriptor), a fixed column header row, then one row per tick
with `#EVENT t_ms type payload` lines interleaved so every event precedes the
first row it affects. Floats are written with shortest round-trip formatting,
so export -> import -> export is byte-stable and replays are exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import RecordParseError, RecordSchemaError, UnsupportedVersionError

FORMAT_VERSION = 1

COLUMNS = ("t_ms", "volts", "raw", "emg_percent", "x_percent", "reference", "position")
_HEADER_ROW = ",".join(COLUMNS)

_PREAMBLE_KEYS = ("version", "seed", "profile", "config", "source")


@dataclass
class SessionEvent:
    t_ms: int
    type: str
    payload: dict = field(default_factory=dict)

    def __eq__(self, other):
        return (
            isinstance(other, SessionEvent)
            and (self.t_ms, self.type, self.payload)
            == (other.t_ms, other.type, other.payload)
        )


@dataclass
class SessionHeader:
    seed: int = 0
    profile: Optional[dict] = None
    config: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)
    version: int = FORMAT_VERSION


class SessionRecord:
    """Full per-tick trace plus the event log and header."""

    def __init__(self, header: SessionHeader, columns: dict, events: list):
        self.header = header
        self.columns = columns
        self.events = events

    @property
    def n_rows(self) -> int:
        return len(self.columns["t_ms"])

    def equals(self, other: "SessionRecord") -> bool:
        if self.header.__dict__ != other.header.__dict__:
            return False
        if len(self.events) != len(other.events) or any(
            a != b for a, b in zip(self.events, other.events)
        ):
            return False
        for c in COLUMNS:
            if not np.array_equal(self.columns[c], other.columns[c]):
                return False
        return True

    @classmethod
    def empty(cls, header: SessionHeader) -> "SessionRecord":
        cols = {
            "t_ms": np.zeros(0, dtype=np.int64),
            "raw": np.zeros(0, dtype=np.int32),
        }
        for c in ("volts", "emg_percent", "x_percent", "reference", "position"):
            cols[c] = np.zeros(0, dtype=np.float64)
        return cls(header, cols, [])


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def export_csv(record: SessionRecord, path) -> None:
    h = record.header
    cols = record.columns
    n = record.n_rows
    events = sorted(record.events, key=lambda e: e.t_ms)

    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# version={h.version}\n")
        f.write(f"# seed={h.seed}\n")
        f.write(f"# profile={_dump_json(h.profile)}\n")
        f.write(f"# config={_dump_json(h.config)}\n")
        f.write(f"# source={_dump_json(h.source)}\n")
        f.write(_HEADER_ROW + "\n")

        t_l = cols["t_ms"].tolist()
        v_l = cols["volts"].tolist()
        r_l = cols["raw"].tolist()
        e_l = cols["emg_percent"].tolist()
        x_l = cols["x_percent"].tolist()
        ref_l = cols["reference"].tolist()
        p_l = cols["position"].tolist()

        ev_i = 0
        n_ev = len(events)
        write = f.write
        for k in range(n):
            t = t_l[k]
            while ev_i < n_ev and events[ev_i].t_ms <= t:
                ev = events[ev_i]
                write(f"#EVENT {ev.t_ms} {ev.type} {_dump_json(ev.payload)}\n")
                ev_i += 1
            write(
                f"{t},{v_l[k]!r},{r_l[k]},{e_l[k]!r},{x_l[k]!r},{ref_l[k]!r},{p_l[k]!r}\n"
            )
        while ev_i < n_ev:
            ev = events[ev_i]
            write(f"#EVENT {ev.t_ms} {ev.type} {_dump_json(ev.payload)}\n")
            ev_i += 1


def _parse_preamble_value(key: str, text: str, line_no: int):
    if key in ("profile", "config", "source"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise RecordParseError(line_no, f"bad JSON in preamble key {key}: {e}") from None
    try:
        return int(text)
    except ValueError:
        raise RecordParseError(line_no, f"preamble key {key} is not an integer") from None


def import_csv(path) -> SessionRecord:
    """Parse a session file; lossless inverse of export_csv.

    Raises UnsupportedVersionError for unknown format versions,
    RecordSchemaError for missing preamble keys or a wrong column header,
    and RecordParseError (with the 1-based line number) for malformed rows.
    """
    preamble: dict = {}
    events: list[SessionEvent] = []
    t_l: list[int] = []
    v_l: list[float] = []
    r_l: list[int] = []
    e_l: list[float] = []
    x_l: list[float] = []
    ref_l: list[float] = []
    p_l: list[float] = []

    seen_header = False
    n_rows = 0
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#EVENT "):
                body = line[len("#EVENT ") :]
                parts = body.split(" ", 2)
                if len(parts) != 3:
                    raise RecordParseError(line_no, "event line needs t_ms, type, payload")
                try:
                    ev_t = int(parts[0])
                    payload = json.loads(parts[2])
                except (ValueError, json.JSONDecodeError) as e:
                    raise RecordParseError(line_no, f"bad event line: {e}") from None
                events.append(SessionEvent(ev_t, parts[1], payload))
                continue
            if line.startswith("#"):
                if not seen_header:
                    body = line.lstrip("#").strip()
                    if "=" in body:
                        key, _, raw_val = body.partition("=")
                        key = key.strip()
                        if key in _PREAMBLE_KEYS:
                            preamble[key] = _parse_preamble_value(key, raw_val, line_no)
                continue
            if not seen_header:
                if line != _HEADER_ROW:
                    raise RecordSchemaError(
                        f"column header mismatch: expected {_HEADER_ROW!r}, got {line!r}"
                    )
                if "version" not in preamble:
                    raise RecordSchemaError("preamble is missing the version key")
                if preamble["version"] != FORMAT_VERSION:
                    raise UnsupportedVersionError(
                        f"format version {preamble['version']} not supported "
                        f"(this build reads version {FORMAT_VERSION})"
                    )
                seen_header = True
                continue

            parts = line.split(",")
            if len(parts) != len(COLUMNS):
                raise RecordParseError(
                    line_no, f"expected {len(COLUMNS)} columns, found {len(parts)}"
                )
            try:
                t = int(parts[0])
            except ValueError:
                raise RecordParseError(line_no, f"non-numeric t_ms cell {parts[0]!r}") from None
            if t != n_rows:
                raise RecordParseError(
                    line_no, f"t_ms {t} breaks the 1 ms spacing (expected {n_rows})"
                )
            try:
                volts = float(parts[1])
            except ValueError:
                raise RecordParseError(line_no, f"non-numeric volts cell {parts[1]!r}") from None
            if not 0.0 <= volts <= 5.0:
                raise RecordParseError(line_no, f"volts {volts!r} outside [0, 5]")
            try:
                raw = int(parts[2])
                emg = float(parts[3])
                x = float(parts[4])
                ref = float(parts[5])
                pos = float(parts[6])
            except ValueError as e:
                raise RecordParseError(line_no, f"non-numeric cell: {e}") from None
            t_l.append(t)
            v_l.append(volts)
            r_l.append(raw)
            e_l.append(emg)
            x_l.append(x)
            ref_l.append(ref)
            p_l.append(pos)
            n_rows += 1

    if not seen_header:
        raise RecordSchemaError("file has no column header row")
    missing = [k for k in _PREAMBLE_KEYS if k not in preamble]
    if missing:
        raise RecordSchemaError(f"preamble is missing keys: {', '.join(missing)}")

    header = SessionHeader(
        seed=preamble["seed"],
        profile=preamble["profile"],
        config=preamble["config"],
        source=preamble["source"],
        version=preamble["version"],
    )
    columns = {
        "t_ms": np.asarray(t_l, dtype=np.int64),
        "volts": np.asarray(v_l, dtype=np.float64),
        "raw": np.asarray(r_l, dtype=np.int32),
        "emg_percent": np.asarray(e_l, dtype=np.float64),
        "x_percent": np.asarray(x_l, dtype=np.float64),
        "reference": np.asarray(ref_l, dtype=np.float64),
        "position": np.asarray(p_l, dtype=np.float64),
    }
    return SessionRecord(header, columns, events)
