"""Pure Python/numpy kernel backend.

Bit-identical to the compiled backend by construction: every floating-point
operation appears in the same order with the same operands. The feed-forward
stages (quantize, normalize, moving average) are vectorized; the control and
plant recurrences run as a plain Python loop.
"""

from __future__ import annotations

import numpy as np

from .types import STRATEGY_ONOFF, TickParams, TickState

BACKEND = "pure"


def run_ticks(volts, enc_noise, p: TickParams, st: TickState,
              out_raw, out_emg, out_x, out_ref, out_pos) -> None:
    n = len(volts)
    if n == 0:
        return

    # Quantize: floor(v / 5 * 4095 + 0.5), kept as exact integral floats.
    raw = volts / 5.0
    raw *= 4095.0
    raw += 0.5
    np.floor(raw, out=raw)
    out_raw[:] = raw.astype(np.int32)

    # Normalize to percent of dynamic range.
    if p.calibrated:
        pre = (raw - p.rest) / (p.mvc - p.rest)
        np.clip(pre, 0.0, 1.0, out=pre)
        pre *= 100.0
    else:
        pre = np.zeros(n, dtype=np.float64)

    # Moving average over a zero-filled window, summed oldest to newest.
    # cat[i] is the stream value at tick i - W relative to this block.
    w = p.window
    cat = np.concatenate([st.ma_chronological(), pre])
    acc = cat[1 : 1 + n].copy()
    for j in range(2, w + 1):
        acc += cat[j : j + n]
    emg = acc / float(w)
    out_emg[:] = emg
    st.ma_buf = cat[n : n + w].copy()
    st.ma_idx = 0

    # Control + plant recurrences.
    running = p.running
    onoff = p.strategy == STRATEGY_ONOFF
    literal = p.literal
    th_open = p.th + p.gap * 0.5
    th_close = p.th - p.gap * 0.5
    th1 = p.th1
    inv_span_th = p.th2 - p.th1
    delta = p.delta
    span = 100.0 - 2.0 * delta
    lag_gain = p.dt_ms / p.tau_ms
    cap = p.max_rate * (p.dt_ms * 0.001)
    vel_gain = 1000.0 / p.dt_ms

    hyst = st.hyst_prev
    db_r = st.db_r
    db_x = st.db_x
    pos = st.pos
    vel = st.vel

    emg_l = emg.tolist()
    nz = enc_noise.tolist()
    xs = [0.0] * n
    refs = [0.0] * n
    poss = [0.0] * n

    for k in range(n):
        if running:
            e = emg_l[k]
            if onoff:
                if hyst == 0.0:
                    ref = 1.0 if e > th_open else 0.0
                else:
                    ref = 0.0 if e <= th_close else 1.0
                hyst = ref
                x = 100.0 * ref
            else:
                pp = (e - th1) / inv_span_th
                if literal:
                    x = pp * e
                else:
                    if pp < 0.0:
                        pp = 0.0
                    elif pp > 1.0:
                        pp = 1.0
                    x = pp * 100.0
                if x < 0.0:
                    x = 0.0
                elif x > 100.0:
                    x = 100.0
                d = x - db_r
                if d < -delta:
                    db_r = x + delta
                elif d > delta:
                    db_r = x - delta
                db_x = x
                ref = (db_r - delta) / span
                if ref < 0.0:
                    ref = 0.0
                elif ref > 1.0:
                    ref = 1.0
        else:
            x = 0.0
            ref = 0.0

        step = (ref - pos) * lag_gain
        if step > cap:
            step = cap
        elif step < -cap:
            step = -cap
        new_pos = pos + step
        if new_pos < 0.0:
            new_pos = 0.0
        elif new_pos > 1.0:
            new_pos = 1.0
        vel = (new_pos - pos) * vel_gain
        pos = new_pos

        enc = pos + nz[k]
        if enc < 0.0:
            enc = 0.0
        elif enc > 1.0:
            enc = 1.0

        xs[k] = x
        refs[k] = ref
        poss[k] = enc

    out_x[:] = xs
    out_ref[:] = refs
    out_pos[:] = poss

    st.hyst_prev = hyst
    st.db_r = db_r
    st.db_x = db_x
    st.pos = pos
    st.vel = vel


def deadband_run(x, delta: float, r0: float = 0.0) -> np.ndarray:
    """Follower stream for a driven-point stream: out[k] is r after x[k]."""
    xl = np.asarray(x, dtype=np.float64).tolist()
    n = len(xl)
    out = [0.0] * n
    r = r0
    for k in range(n):
        v = xl[k]
        d = v - r
        if d < -delta:
            r = v + delta
        elif d > delta:
            r = v - delta
        out[k] = r
    return np.asarray(out, dtype=np.float64)
