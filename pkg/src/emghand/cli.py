"""Command line entry point.

Run a session (default form) or analyze a recorded one:

    engine --source sim --config cfg.yaml --record out.csv --duration 60000
    engine --source replay --replay out.csv --record again.csv
    engine analyze --record out.csv --holds holds.yaml --out metrics.json

--listen ADDR:PORT exposes the console protocol (and serves the static
console if --console-dir points at built assets); --paced runs the loop at
real-time 1 ms cadence instead of as-fast-as-possible.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import yaml

from . import _kernels
from .analysis import compute_metrics
from .config import build_model, build_script, load_config
from .errors import EngineError
from .record import export_csv, import_csv
from .session import Engine, EngineConfig, REPLAYABLE_EVENTS
from .source import ReplaySource, SimSource


def _parse_listen(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError("expected ADDR:PORT")
    return host, int(port)


def _run_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="engine", description="sEMG hand-control engine"
    )
    p.add_argument("--source", choices=["sim", "replay"], required=True)
    p.add_argument("--model", help="patient preset name or model file (sim)")
    p.add_argument("--script", help="intent script file (sim)")
    p.add_argument("--replay", help="session CSV to replay")
    p.add_argument("--config", help="engine configuration file")
    p.add_argument("--record", help="write the session record CSV here")
    p.add_argument("--listen", type=_parse_listen, metavar="ADDR:PORT",
                   help="serve the console protocol")
    p.add_argument("--console-dir", help="static console assets to serve on --listen")
    p.add_argument("--duration", type=int, metavar="MS", help="session length in ticks")
    p.add_argument("--seed", type=int, help="session seed (overrides config)")
    p.add_argument("--paced", action="store_true", help="pace ticks to wall-clock 1 ms")
    return p


def _analyze_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="engine analyze", description="session metrics")
    p.add_argument("--record", required=True)
    p.add_argument("--holds", help="YAML/JSON list of [start_ms, end_ms] hold segments")
    p.add_argument("--out", required=True)
    return p


def _cmd_analyze(argv: list[str]) -> int:
    args = _analyze_parser().parse_args(argv)
    record = import_csv(args.record)
    holds = []
    if args.holds:
        with open(args.holds, "r", encoding="utf-8") as f:
            holds = yaml.safe_load(f) or []
        if isinstance(holds, dict):
            holds = holds.get("holds", [])
    metrics = compute_metrics(record, holds)
    payload = metrics.to_dict()
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    for key, value in sorted(payload.items()):
        print(f"{key}: {value}")
    return 0


def _cmd_run(argv: list[str]) -> int:
    args = _run_parser().parse_args(argv)

    scripted = None
    if args.source == "replay":
        if not args.replay:
            print("error: --source replay requires --replay PATH", file=sys.stderr)
            return 2
        source_record = import_csv(args.replay)
        cfg = EngineConfig.from_snapshot(
            source_record.header.config,
            source_record.header.profile,
            source_record.header.seed if args.seed is None else args.seed,
        )
        source = ReplaySource(source_record.columns["volts"], path=args.replay)
        scripted = [
            (e.t_ms, e.type, e.payload)
            for e in source_record.events
            if e.type in REPLAYABLE_EVENTS
        ]
        duration = args.duration if args.duration is not None else source_record.n_rows
        auto_start = False
    else:
        if not args.config:
            print("error: --source sim requires --config PATH", file=sys.stderr)
            return 2
        cfg, model, script = load_config(args.config)
        if args.model:
            model = build_model(args.model)
        if args.script:
            script = build_script(args.script)
        if model is None:
            print("error: no patient model (config `model:` or --model)", file=sys.stderr)
            return 2
        if args.seed is not None:
            cfg.seed = args.seed
        source = SimSource(model, script, seed=cfg.seed)
        duration = args.duration
        # Operator starts the session when a console is attached.
        auto_start = args.listen is None
        if auto_start and cfg.profile is None:
            print("error: calibration required (config `calibration:` block, "
                  "or attach a console with --listen to calibrate live)", file=sys.stderr)
            return 2
        if duration is None and args.listen is None:
            print("error: --duration required without --listen", file=sys.stderr)
            return 2

    engine = Engine(cfg, source)
    server = None
    if args.listen is not None:
        from .server import ConsoleServer

        host, port = args.listen
        server = ConsoleServer(engine, host, port, static_dir=args.console_dir)
        server.start()
        # Flush: console launchers read this line through a pipe.
        print(f"console protocol on ws://{server.host}:{server.port}/", flush=True)

    t0 = time.perf_counter()
    try:
        record = engine.run(
            duration_ms=duration,
            paced=args.paced,
            scripted_events=scripted,
            auto_start=auto_start,
            listening=server is not None,
        )
    except KeyboardInterrupt:
        engine.request_stop()
        raise SystemExit(130)
    finally:
        if server is not None:
            server.stop()
    elapsed = time.perf_counter() - t0

    if args.record:
        export_csv(record, args.record)
        print(f"record: {args.record}")
    print(
        f"ticks: {record.n_rows}  events: {len(record.events)}  "
        f"backend: {_kernels.BACKEND}  wall: {elapsed:.2f}s"
    )
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "analyze":
            return _cmd_analyze(argv[1:])
        return _cmd_run(argv)
    except EngineError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
