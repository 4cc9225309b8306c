import pytest

from emghand.errors import StateError, ValidationError
from emghand.protocol import encode, error_message, parse_inbound


class TestParseInbound:
    def test_valid_command_passes_through(self):
        obj = parse_inbound('{"type":"set_config","patch":{"th":30}}')
        assert obj["type"] == "set_config"
        assert obj["patch"] == {"th": 30}

    def test_garbage_is_frame_error(self):
        with pytest.raises(ValidationError) as err:
            parse_inbound("{nope")
        assert err.value.field == "frame"

    def test_non_object_rejected(self):
        with pytest.raises(ValidationError):
            parse_inbound("[1,2,3]")

    def test_unknown_type_rejected(self):
        with pytest.raises(ValidationError) as err:
            parse_inbound('{"type":"format_disk"}')
        assert err.value.field == "type"

    @pytest.mark.parametrize(
        "typ",
        ["set_config", "calibrate_rest", "calibrate_mvc", "start", "stop", "set_strategy"],
    )
    def test_all_command_types_accepted(self, typ):
        assert parse_inbound(f'{{"type":"{typ}"}}')["type"] == typ


class TestErrorMessages:
    def test_validation_error_carries_field(self):
        msg = error_message(ValidationError("delta", "must be in [0, 50)"))
        assert msg == {"type": "error", "field": "delta", "msg": "must be in [0, 50)"}

    def test_state_error_has_no_field(self):
        msg = error_message(StateError("calibration required"))
        assert msg["field"] is None
        assert "calibration" in msg["msg"]

    def test_encode_is_compact_json(self):
        assert encode({"type": "ack"}) == '{"type":"ack"}'
