import numpy as np
import pytest

from emghand.errors import ValidationError
from emghand.plant import HandState, PlantParams, encoder_read, plant_step
from reference_impls import slew_lag_plant_closed_form

PARAMS = PlantParams(max_rate=1.0, time_constant_ms=80.0)


def run_plant(reference, n, state=None, params=PARAMS):
    state = state or HandState()
    for _ in range(n):
        state = plant_step(state, reference, 1.0, params)
    return state


class TestPlantStep:
    def test_equilibrium_is_fixed_point(self):
        state = HandState(position=0.4)
        nxt = plant_step(state, 0.4, 1.0, PARAMS)
        assert nxt.position == 0.4
        assert nxt.velocity == 0.0

    def test_saturated_slew_covers_half_stroke_in_500ms(self):
        # max_rate 1/s from 0 toward 1: rate-limited the whole way, so
        # 500 ticks integrate to 0.5 exactly (up to accumulated rounding).
        state = run_plant(1.0, 500)
        assert state.position == pytest.approx(0.5, abs=1e-12)

    def test_settles_at_reference_within_five_time_constants(self):
        # Full-stroke slew (1 s) plus 5 tau of lag decay.
        state = run_plant(1.0, 1000 + 5 * 80)
        assert abs(state.position - 1.0) < 1e-3

    def test_matches_closed_form_oracle(self):
        for t in (100, 400, 1200, 2000):
            got = run_plant(1.0, t).position
            want = slew_lag_plant_closed_form(0.0, 1.0, t, 80.0, 1.0)
            # Euler stepping differs from the exact solution by O(dt/tau).
            assert got == pytest.approx(want, abs=0.02)

    def test_position_bounded_for_any_reference(self):
        rng = np.random.default_rng(9)
        state = HandState()
        for ref in rng.uniform(-0.2, 1.2, 3000):
            state = plant_step(state, float(min(max(ref, 0.0), 1.0)), 1.0, PARAMS)
            assert 0.0 <= state.position <= 1.0
            assert abs(state.velocity) <= PARAMS.max_rate + 1e-12

    def test_zero_reference_returns_to_closed(self):
        state = HandState(position=1.0)
        n = int(1000 / PARAMS.max_rate) + 5 * int(PARAMS.time_constant_ms)
        for _ in range(n):
            state = plant_step(state, 0.0, 1.0, PARAMS)
        assert state.position < 1e-3

    def test_never_ahead_of_monotone_reference(self):
        state = HandState()
        for k in range(2000):
            ref = min(1.0, k / 1500.0)
            state = plant_step(state, ref, 1.0, PARAMS)
            assert state.position <= ref + 1e-12

    def test_bad_dt_rejected(self):
        with pytest.raises(ValidationError):
            plant_step(HandState(), 0.5, 0.0, PARAMS)


class TestEncoder:
    def test_noiseless_reads_exact_position(self):
        state = HandState(position=0.376)
        assert encoder_read(state, PARAMS, seed=1, t_ms=10) == 0.376

    def test_noise_clamps_at_travel_limits(self):
        params = PlantParams(encoder_noise_sd=0.5)
        readings = [
            encoder_read(HandState(position=0.0), params, seed=3, t_ms=t)
            for t in range(200)
        ]
        assert min(readings) >= 0.0
        assert max(readings) <= 1.0
        assert any(r > 0.0 for r in readings)  # noise is actually present

    def test_fixed_seed_fixed_state_identical(self):
        params = PlantParams(encoder_noise_sd=0.01)
        state = HandState(position=0.5)
        a = encoder_read(state, params, seed=42, t_ms=77)
        b = encoder_read(state, params, seed=42, t_ms=77)
        assert a == b


class TestParams:
    def test_invalid_params_rejected(self):
        with pytest.raises(ValidationError):
            PlantParams(max_rate=0.0)
        with pytest.raises(ValidationError):
            PlantParams(time_constant_ms=-1.0)
        with pytest.raises(ValidationError):
            PlantParams(encoder_noise_sd=-0.1)

    def test_dict_round_trip(self):
        p = PlantParams(max_rate=2.0, time_constant_ms=50.0, encoder_noise_sd=0.01)
        assert PlantParams.from_dict(p.to_dict()) == p
