# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend. Arithmetic mirrors pure.py operation for
operation (same order, same operands); compiled with -ffp-contract=off so
results stay bit-identical to the pure backend."""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

BACKEND = "cython"


def run_ticks(double[::1] volts, double[::1] enc_noise, object p, object st,
              cnp.int32_t[::1] out_raw, double[::1] out_emg, double[::1] out_x,
              double[::1] out_ref, double[::1] out_pos):
    cdef Py_ssize_t n = volts.shape[0]
    if n == 0:
        return

    cdef bint calibrated = p.calibrated
    cdef bint running = p.running
    cdef bint onoff = p.strategy == 0
    cdef bint literal = p.literal
    cdef double rest = p.rest
    cdef double mvc = p.mvc
    cdef Py_ssize_t w = p.window
    cdef double th_open = p.th + p.gap * 0.5
    cdef double th_close = p.th - p.gap * 0.5
    cdef double th1 = p.th1
    cdef double th_span = p.th2 - p.th1
    cdef double delta = p.delta
    cdef double span = 100.0 - 2.0 * delta
    cdef double lag_gain = p.dt_ms / p.tau_ms
    cdef double cap = p.max_rate * (p.dt_ms * 0.001)
    cdef double vel_gain = 1000.0 / p.dt_ms

    cdef double[::1] ma_buf = st.ma_buf
    cdef Py_ssize_t ma_idx = st.ma_idx
    cdef double hyst = st.hyst_prev
    cdef double db_r = st.db_r
    cdef double db_x = st.db_x
    cdef double pos = st.pos
    cdef double vel = st.vel

    cdef Py_ssize_t k, i, j
    cdef double v, qf, pre, s, emg, e, x, ref, pp, d, step, new_pos, enc

    for k in range(n):
        v = volts[k]
        qf = floor(v / 5.0 * 4095.0 + 0.5)
        out_raw[k] = <cnp.int32_t>qf

        if calibrated:
            pre = (qf - rest) / (mvc - rest)
            if pre < 0.0:
                pre = 0.0
            elif pre > 1.0:
                pre = 1.0
            pre = pre * 100.0
        else:
            pre = 0.0

        ma_buf[ma_idx] = pre
        ma_idx += 1
        if ma_idx == w:
            ma_idx = 0
        s = 0.0
        j = ma_idx
        for i in range(w):
            s += ma_buf[j]
            j += 1
            if j == w:
                j = 0
        emg = s / <double>w
        out_emg[k] = emg

        if running:
            e = emg
            if onoff:
                if hyst == 0.0:
                    ref = 1.0 if e > th_open else 0.0
                else:
                    ref = 0.0 if e <= th_close else 1.0
                hyst = ref
                x = 100.0 * ref
            else:
                pp = (e - th1) / th_span
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

        enc = pos + enc_noise[k]
        if enc < 0.0:
            enc = 0.0
        elif enc > 1.0:
            enc = 1.0

        out_x[k] = x
        out_ref[k] = ref
        out_pos[k] = enc

    st.ma_idx = ma_idx
    st.hyst_prev = hyst
    st.db_r = db_r
    st.db_x = db_x
    st.pos = pos
    st.vel = vel


def deadband_run(double[::1] x, double delta, double r0=0.0):
    cdef Py_ssize_t n = x.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double r = r0
    cdef double v, d
    cdef Py_ssize_t k
    for k in range(n):
        v = x[k]
        d = v - r
        if d < -delta:
            r = v + delta
        elif d > delta:
            r = v - delta
        out[k] = r
    return out_arr
