import numpy as np
import pytest

from emghand.analysis import SessionMetrics, compute_metrics, count_transitions, ripple_rms
from emghand.errors import ValidationError
from emghand.record import SessionHeader, SessionRecord


def record_from(reference, position=None, emg=None) -> SessionRecord:
    n = len(reference)
    ref = np.asarray(reference, dtype=np.float64)
    pos = ref.copy() if position is None else np.asarray(position, dtype=np.float64)
    e = np.zeros(n) if emg is None else np.asarray(emg, dtype=np.float64)
    columns = {
        "t_ms": np.arange(n, dtype=np.int64),
        "volts": np.zeros(n),
        "raw": np.zeros(n, dtype=np.int32),
        "emg_percent": e,
        "x_percent": np.zeros(n),
        "reference": ref,
        "position": pos,
    }
    return SessionRecord(SessionHeader(), columns, [])


class TestTransitions:
    def test_constant_reference_has_none(self):
        m = compute_metrics(record_from([0.3] * 100))
        assert m.reference_transition_count == 0
        assert m.aperture_ripple_rms == 0.0

    def test_five_toggles_count_five(self):
        ref = []
        level = 0.0
        for _ in range(5):
            level = 1.0 - level
            ref.extend([level] * 20)
        m = compute_metrics(record_from([0.0] * 10 + ref))
        assert m.reference_transition_count == 5

    def test_slow_proportional_creep_not_counted(self):
        ref = np.linspace(0, 1, 500)  # 0.002 per tick
        assert count_transitions(ref) == 0

    def test_determinism(self):
        rng = np.random.default_rng(2)
        ref = (rng.uniform(0, 1, 400) > 0.5).astype(float)
        a = compute_metrics(record_from(ref))
        b = compute_metrics(record_from(ref))
        assert a == b


class TestRippleRms:
    def test_matches_hand_computation(self):
        v = np.array([0.0, 1.0, 0.0, 1.0])
        # diffs [1, -1, 1]: rms = 1
        assert ripple_rms(v) == 1.0

    def test_short_signals_are_zero(self):
        assert ripple_rms(np.array([0.5])) == 0.0


class TestHolds:
    def test_kept_hold_passes(self):
        pos = [0.0] * 50 + [1.0] * 200 + [0.0] * 50
        m = compute_metrics(record_from(pos), hold_segments=[(50, 250)])
        assert m.hold_failures == 0

    def test_post_peak_drop_fails(self):
        pos = [0.0] * 50 + [1.0] * 100 + [0.7] * 100 + [0.0] * 50
        m = compute_metrics(record_from(pos), hold_segments=[(50, 250)])
        assert m.hold_failures == 1

    def test_drop_factor_configurable(self):
        pos = [0.0] * 50 + [1.0] * 100 + [0.85] * 100 + [0.0] * 50
        rec = record_from(pos)
        assert compute_metrics(rec, hold_segments=[(50, 250)]).hold_failures == 0
        assert compute_metrics(
            rec, hold_segments=[(50, 250)], hold_drop_factor=0.9
        ).hold_failures == 1

    def test_mean_emg_over_holds(self):
        emg = [10.0] * 100 + [80.0] * 100
        m = compute_metrics(record_from([0.0] * 200, emg=emg), hold_segments=[(100, 200)])
        assert m.mean_emg_during_hold == 80.0

    def test_segment_outside_span_rejected(self):
        with pytest.raises(ValidationError):
            compute_metrics(record_from([0.0] * 100), hold_segments=[(50, 200)])


class TestShape:
    def test_empty_record_gives_zero_metrics(self):
        m = compute_metrics(record_from([]))
        assert m == SessionMetrics(0, 0.0, 0, 0, 0.0)

    def test_time_open_counts_position_ticks(self):
        pos = [0.0] * 100 + [0.9] * 300 + [0.0] * 100
        m = compute_metrics(record_from(pos))
        assert m.time_open_ms == 300

    def test_dict_export(self):
        d = compute_metrics(record_from([0.0] * 10)).to_dict()
        assert set(d) == {
            "reference_transition_count",
            "aperture_ripple_rms",
            "time_open_ms",
            "hold_failures",
            "mean_emg_during_hold",
        }
