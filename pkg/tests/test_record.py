import numpy as np
import pytest

from emghand.errors import RecordParseError, RecordSchemaError, UnsupportedVersionError
from emghand.record import (
    SessionEvent,
    SessionHeader,
    SessionRecord,
    export_csv,
    import_csv,
)


def make_record(n=20) -> SessionRecord:
    rng = np.random.default_rng(1)
    header = SessionHeader(
        seed=12,
        profile={"rest_raw": 80, "mvc_raw": 2500, "captured_at": None,
                 "rest_window_ms": 1000, "mvc_window_ms": 1000},
        config={"control": {"th": 50.0}, "plant": {"max_rate": 1.0}},
        source={"kind": "sim", "model": {"mvc_level": 2.0}},
    )
    columns = {
        "t_ms": np.arange(n, dtype=np.int64),
        "volts": rng.uniform(0, 5, n),
        "raw": rng.integers(0, 4096, n).astype(np.int32),
        "emg_percent": rng.uniform(0, 100, n),
        "x_percent": rng.uniform(0, 100, n),
        "reference": rng.uniform(0, 1, n),
        "position": rng.uniform(0, 1, n),
    }
    events = [
        SessionEvent(0, "start", {}),
        SessionEvent(5, "set_config", {"patch": {"th": 30.0}}),
        SessionEvent(n, "stop", {}),  # trailing event after the last row
    ]
    return SessionRecord(header, columns, events)


class TestRoundTrip:
    def test_structurally_equal_after_round_trip(self, tmp_path):
        rec = make_record()
        path = tmp_path / "r.csv"
        export_csv(rec, path)
        back = import_csv(path)
        assert back.equals(rec)

    def test_export_is_byte_stable(self, tmp_path):
        rec = make_record()
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        export_csv(rec, p1)
        export_csv(import_csv(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_only_record(self, tmp_path):
        rec = SessionRecord.empty(SessionHeader(seed=5))
        path = tmp_path / "empty.csv"
        export_csv(rec, path)
        back = import_csv(path)
        assert back.n_rows == 0
        assert back.header.seed == 5

    def test_events_precede_their_first_row(self, tmp_path):
        rec = make_record()
        path = tmp_path / "r.csv"
        export_csv(rec, path)
        lines = path.read_text().splitlines()
        idx_event = lines.index('#EVENT 5 set_config {"patch":{"th":30.0}}')
        idx_row5 = next(i for i, l in enumerate(lines) if l.startswith("5,"))
        assert idx_event < idx_row5
        row4 = next(i for i, l in enumerate(lines) if l.startswith("4,"))
        assert idx_event > row4


class TestErrors:
    def test_future_version_rejected(self, tmp_path):
        rec = make_record()
        path = tmp_path / "r.csv"
        export_csv(rec, path)
        text = path.read_text().replace("# version=1", "# version=2", 1)
        path.write_text(text)
        with pytest.raises(UnsupportedVersionError):
            import_csv(path)

    def test_truncated_final_row_names_line(self, tmp_path):
        rec = make_record()
        path = tmp_path / "r.csv"
        export_csv(rec, path)
        lines = path.read_text().splitlines()
        # Chop cells off the final data row (last line is the trailing event).
        last_data = len(lines) - 2
        lines[last_data] = ",".join(lines[last_data].split(",")[:3])
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(RecordParseError) as err:
            import_csv(path)
        assert err.value.line_no == last_data + 1

    def test_wrong_column_header_is_schema_error(self, tmp_path):
        rec = make_record()
        path = tmp_path / "r.csv"
        export_csv(rec, path)
        text = path.read_text().replace(",volts,", ",millivolts,", 1)
        path.write_text(text)
        with pytest.raises(RecordSchemaError):
            import_csv(path)

    def test_missing_preamble_key_is_schema_error(self, tmp_path):
        rec = make_record()
        path = tmp_path / "r.csv"
        export_csv(rec, path)
        lines = [l for l in path.read_text().splitlines() if not l.startswith("# seed=")]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(RecordSchemaError):
            import_csv(path)

    def test_broken_tick_spacing_rejected(self, tmp_path):
        rec = make_record()
        path = tmp_path / "r.csv"
        export_csv(rec, path)
        text = path.read_text().replace("\n7,", "\n9,", 1)
        path.write_text(text)
        with pytest.raises(RecordParseError):
            import_csv(path)

    def test_volts_out_of_range_rejected(self, tmp_path):
        rec = make_record()
        path = tmp_path / "r.csv"
        export_csv(rec, path)
        lines = path.read_text().splitlines()
        row = next(i for i, l in enumerate(lines) if l.startswith("3,"))
        parts = lines[row].split(",")
        parts[1] = "6.5"
        lines[row] = ",".join(parts)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(RecordParseError) as err:
            import_csv(path)
        assert err.value.line_no == row + 1
