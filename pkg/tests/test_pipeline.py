import numpy as np
import pytest

from emghand.calibration import CalibrationProfile
from emghand.errors import CalibrationRequiredError, ValidationError
from emghand.pipeline import (
    ADC_MAX,
    EmgSample,
    MovingAverage,
    dequantize,
    normalize,
    quantize,
    round_half_up,
)
from reference_impls import moving_average_brute

PROFILE = CalibrationProfile(rest_raw=100, mvc_raw=2000)


class TestQuantize:
    def test_zero_and_full_scale(self):
        assert quantize(0.0) == 0
        assert quantize(5.0) == ADC_MAX

    def test_midscale_rounds_half_up(self):
        # 2.5 V -> 2047.5 counts exactly; half-up picks 2048.
        assert quantize(2.5) == 2048

    def test_round_half_up_ties(self):
        assert round_half_up(2046.5) == 2047
        assert round_half_up(2047.5) == 2048
        assert round_half_up(2047.4999) == 2047

    def test_out_of_range_is_contract_violation(self):
        with pytest.raises(ValidationError):
            quantize(-0.01)
        with pytest.raises(ValidationError):
            quantize(5.01)

    def test_round_trip_error_within_half_lsb(self):
        half_lsb = 5.0 / ADC_MAX / 2.0
        for v in np.linspace(0.0, 5.0, 10_001):
            v = float(v)
            assert abs(dequantize(quantize(v)) - v) <= half_lsb + 1e-15


class TestNormalize:
    def test_anchors(self):
        assert normalize(PROFILE.rest_raw, PROFILE) == 0.0
        assert normalize(PROFILE.mvc_raw, PROFILE) == 100.0

    def test_midpoint_is_linear(self):
        mid = (PROFILE.rest_raw + PROFILE.mvc_raw) // 2
        assert normalize(mid, PROFILE) == 50.0

    def test_clamps_beyond_anchors(self):
        assert normalize(PROFILE.mvc_raw + 500, PROFILE) == 100.0
        assert normalize(PROFILE.rest_raw - 50, PROFILE) == 0.0

    def test_monotone_in_raw(self):
        vals = [normalize(r, PROFILE) for r in range(0, ADC_MAX, 13)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_missing_profile_requires_calibration(self):
        with pytest.raises(CalibrationRequiredError):
            normalize(1000, None)


class TestMovingAverage:
    def test_constant_input_passes_through(self):
        ma = MovingAverage(50)
        out = [ma.step(42.0) for _ in range(120)]
        assert out[49:] == [42.0] * 71

    def test_step_ramps_by_partial_window_sum(self):
        # 0 -> 100 step into a fresh (zero) window: output 100*k/50 after
        # the k-th step sample.
        ma = MovingAverage(50)
        for k in range(1, 51):
            assert ma.step(100.0) == 100.0 * k / 50.0

    def test_single_spike_across_full_window(self):
        ma = MovingAverage(50)
        for _ in range(60):
            ma.step(0.0)
        assert ma.step(100.0) == 2.0
        follow = [ma.step(0.0) for _ in range(49)]
        assert follow == [2.0] * 49
        assert ma.step(0.0) == 0.0  # spike leaves the window

    def test_matches_history_slicing_oracle(self):
        rng = np.random.default_rng(17)
        values = rng.uniform(0, 100, 500).tolist()
        ma = MovingAverage(50)
        got = [ma.step(v) for v in values]
        want = moving_average_brute(values, 50)
        assert got == pytest.approx(want, abs=1e-9)

    def test_output_bounded_by_window_contents(self):
        rng = np.random.default_rng(3)
        ma = MovingAverage(50)
        window = [0.0] * 50
        for v in rng.uniform(0, 100, 2000):
            out = ma.step(float(v))
            window = window[1:] + [float(v)]
            assert min(window) <= out <= max(window)

    def test_resize_keeps_newest_samples(self):
        ma = MovingAverage(4)
        for v in (1.0, 2.0, 3.0, 4.0):
            ma.step(v)
        ma.resize(2)
        # window now [3, 4]
        assert ma.step(4.0) == 4.0  # (4 + 4) / 2

    def test_window_of_one_is_identity(self):
        ma = MovingAverage(1)
        assert [ma.step(v) for v in (5.0, 1.0, 99.0)] == [5.0, 1.0, 99.0]

    def test_invalid_window(self):
        with pytest.raises(ValidationError):
            MovingAverage(0)


def test_emg_sample_invariant():
    s = EmgSample.from_volts(12, 2.5)
    assert s.raw == quantize(2.5)
    assert 0 <= s.raw <= ADC_MAX
