"""Console protocol over a real loopback WebSocket."""

import threading
import time

import pytest

from emghand.calibration import CalibrationProfile
from emghand.control import ControlConfig
from emghand.server import ConsoleServer
from emghand.session import Engine, EngineConfig
from emghand.source import PRESETS, IntentScript, SimSource
from emghand.wsclient import WsClient


@pytest.fixture
def live_engine():
    cfg = EngineConfig(
        control=ControlConfig(),
        profile=CalibrationProfile(rest_raw=40, mvc_raw=2000),
        seed=13,
    )
    script = IntentScript.from_pairs([[200, 30_000, 0.8]])
    engine = Engine(cfg, SimSource(PRESETS["mild"], script, seed=13))
    server = ConsoleServer(engine, "127.0.0.1", 0)
    server.start()
    runner = threading.Thread(
        target=lambda: engine.run(duration_ms=20_000, paced=True, listening=True),
        daemon=True,
    )
    runner.start()
    yield engine, server
    engine.request_stop()
    runner.join(timeout=10)
    server.stop()


def test_connect_receives_state_with_config(live_engine):
    engine, server = live_engine
    client = WsClient(server.host, server.port)
    msg = client.recv_until(lambda m: m["type"] == "state")
    assert msg["phase"] in ("idle", "running")
    assert msg["config"]["th"] == 50.0
    client.close()


def test_set_config_acks_and_shows_up_in_telemetry(live_engine):
    engine, server = live_engine
    client = WsClient(server.host, server.port)
    client.recv_until(lambda m: m["type"] == "state")
    client.send_json({"type": "start"})
    client.recv_until(lambda m: m["type"] == "ack")
    client.send_json({"type": "set_config", "patch": {"th": 31.0}})
    ack = client.recv_until(lambda m: m["type"] == "ack")
    assert ack["config"]["th"] == 31.0
    frame = client.recv_until(
        lambda m: m["type"] == "telemetry" and m["config"]["th"] == 31.0, timeout=5
    )
    assert frame["t_ms"] >= 0
    client.close()


def test_invalid_patch_round_trips_field_error(live_engine):
    engine, server = live_engine
    client = WsClient(server.host, server.port)
    client.send_json({"type": "set_config", "patch": {"delta": 60.0}})
    err = client.recv_until(lambda m: m["type"] == "error")
    assert err["field"] == "delta"
    client.close()


def test_command_to_telemetry_round_trip_under_100ms(live_engine):
    engine, server = live_engine
    client = WsClient(server.host, server.port)
    client.recv_until(lambda m: m["type"] == "state")
    client.send_json({"type": "start"})
    client.recv_until(lambda m: m["type"] == "ack")
    # Flush telemetry already in flight, then time the full loop.
    client.recv_until(lambda m: m["type"] == "telemetry")
    t0 = time.perf_counter()
    client.send_json({"type": "set_config", "patch": {"th": 42.0}})
    client.recv_until(lambda m: m["type"] == "ack")
    client.recv_until(
        lambda m: m["type"] == "telemetry" and m["config"]["th"] == 42.0, timeout=2
    )
    elapsed_ms = (time.perf_counter() - t0) * 1000
    assert elapsed_ms < 100, f"round trip took {elapsed_ms:.1f} ms"
    client.close()


def test_two_clients_both_get_telemetry(live_engine):
    engine, server = live_engine
    a = WsClient(server.host, server.port)
    b = WsClient(server.host, server.port)
    a.send_json({"type": "start"})
    assert a.recv_until(lambda m: m["type"] == "telemetry", timeout=5)
    assert b.recv_until(lambda m: m["type"] == "telemetry", timeout=5)
    a.close()
    b.close()


def test_static_assets_served_when_configured(tmp_path):
    cfg = EngineConfig(profile=CalibrationProfile(rest_raw=40, mvc_raw=2000))
    engine = Engine(cfg, SimSource(PRESETS["mild"], IntentScript(), seed=1))
    (tmp_path / "index.html").write_text("<html>console</html>")
    server = ConsoleServer(engine, "127.0.0.1", 0, static_dir=tmp_path)
    server.start()
    try:
        import urllib.request

        with urllib.request.urlopen(
            f"http://{server.host}:{server.port}/", timeout=5
        ) as resp:
            assert b"console" in resp.read()
        with pytest.raises(Exception):
            urllib.request.urlopen(
                f"http://{server.host}:{server.port}/../secret", timeout=5
            )
    finally:
        server.stop()


def test_stale_client_does_not_stall_engine(live_engine):
    engine, server = live_engine
    client = WsClient(server.host, server.port)  # connected, never reads
    client.send_json({"type": "start"})
    time.sleep(1.0)
    t_before = engine.t_ms
    time.sleep(0.5)
    assert engine.t_ms > t_before  # loop kept ticking
    client.close()
