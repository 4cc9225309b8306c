#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure fallback.

Times the fused tick chain (quantize -> normalize -> moving average ->
control -> plant) and the standalone deadband follower on session-scale
inputs, then a full 20-minute batch session end to end.

Usage: python3 benchmarks/bench_kernels.py [--ticks N]
"""

import argparse
import time

import numpy as np

from emghand._kernels import TickParams, TickState, available_backends
from emghand.calibration import build_profile
from emghand.control import ControlConfig, Strategy
from emghand.plant import PlantParams
from emghand.session import EngineConfig, run_session
from emghand.source import IntentScript, PatientModel, SimSource


def bench_run_ticks(mod, volts, nz, strategy, repeats=3):
    n = len(volts)
    p = TickParams(
        calibrated=True, running=True, rest=60.0, mvc=1900.0, window=50,
        strategy=strategy, th=50.0, th1=20.0, th2=80.0, delta=5.0, gap=10.0,
        literal=False, dt_ms=1.0, tau_ms=80.0, max_rate=1.0,
    )
    out_raw = np.empty(n, dtype=np.int32)
    outs = [np.empty(n) for _ in range(4)]
    best = float("inf")
    for _ in range(repeats):
        st = TickState(ma_buf=np.zeros(50))
        t0 = time.perf_counter()
        mod.run_ticks(volts, nz, p, st, out_raw, *outs)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_deadband(mod, x, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        mod.deadband_run(x, 5.0)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_full_session(ticks):
    model = PatientModel(
        rest_noise_mean=0.05, rest_noise_sd=0.02, mvc_level=2.2,
        ripple_amplitude=0.15, ripple_period_ms=400.0,
        fatigue_rate=0.02, contraction_rise_ms=250.0,
    )
    segments = []
    t = 2000
    while t + 5000 < ticks:
        segments.append([t, t + 3000, 0.85])
        t += 8000
    cfg = EngineConfig(
        control=ControlConfig(strategy=Strategy.PROPORTIONAL, delta=5.0),
        plant=PlantParams(encoder_noise_sd=0.005),
        profile=build_profile(rest_raw=60, mvc_raw=1900),
        seed=7,
    )
    src = SimSource(model, IntentScript.from_pairs(segments), seed=7)
    t0 = time.perf_counter()
    rec = run_session(cfg, src, ticks)
    return time.perf_counter() - t0, rec.n_rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ticks", type=int, default=1_200_000)
    args = ap.parse_args()

    backends = available_backends()
    rng = np.random.default_rng(1)
    volts = np.clip(rng.uniform(0.0, 5.0, args.ticks), 0.0, 5.0)
    nz = rng.normal(0.0, 0.005, args.ticks)
    x = rng.uniform(0.0, 100.0, args.ticks)

    print(f"ticks: {args.ticks}   backends: {', '.join(sorted(backends))}\n")
    rows = []
    for name in sorted(backends):
        mod = backends[name]
        t_onoff = bench_run_ticks(mod, volts, nz, 0)
        t_prop = bench_run_ticks(mod, volts, nz, 1)
        t_db = bench_deadband(mod, x)
        rows.append((name, t_onoff, t_prop, t_db))
        print(
            f"{name:>8}: tick chain on-off {t_onoff:7.3f}s"
            f"   proportional {t_prop:7.3f}s   deadband {t_db:7.3f}s"
        )
    if len(rows) == 2:
        pure = next(r for r in rows if r[0] == "pure")
        fast = next(r for r in rows if r[0] != "pure")
        print(
            f"\nspeedup: on-off x{pure[1] / fast[1]:.1f}"
            f"   proportional x{pure[2] / fast[2]:.1f}"
            f"   deadband x{pure[3] / fast[3]:.1f}"
        )

    wall, n = bench_full_session(args.ticks)
    rate = n / wall / 1000.0
    print(f"\nfull batch session (active backend): {wall:.2f}s "
          f"for {n} ticks = {rate:.0f}x real time")


if __name__ == "__main__":
    main()
