# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled weekly-step loop.

Mirrors ``_kernel_py.run_weekly_loop`` operation for operation; the two must
stay bit-identical (same draw layout, same floating-point expression order,
and the build disables contraction of a*b+c into fused multiply-adds).
"""

from libc.math cimport exp

import numpy as np

cimport numpy as cnp

cnp.import_array()

EV_ALBUM = 0
EV_SINGLE = 1


def run_weekly_loop(
    u,
    z,
    double x0,
    double a,
    double b,
    double s,
    bint multiplicative,
    q12_week,
    int woy_offset,
    double q22_exit,
    double p,
    double p_prime,
    double jump_mu,
    double jump_sigma,
    double jump_scale_k,
    double spike_max,
    bint memory_mode,
    double s_c,
    double s_s,
):
    cdef double[:, ::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[:, ::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef double[::1] hazard = np.ascontiguousarray(q12_week, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0]

    values_arr = np.empty(n, dtype=np.float64)
    regimes_arr = np.empty(n, dtype=np.int8)
    drift_arr = np.empty(n, dtype=np.float64)
    # at most one album release and one single release per week
    ev_week_arr = np.empty(2 * n + 1, dtype=np.int64)
    ev_kind_arr = np.empty(2 * n + 1, dtype=np.int8)
    ev_album_arr = np.empty(2 * n + 1, dtype=np.int64)
    ev_value_arr = np.empty(2 * n + 1, dtype=np.float64)
    ev_flag_arr = np.empty(2 * n + 1, dtype=np.int8)

    cdef double[::1] values = values_arr
    cdef signed char[::1] regimes = regimes_arr
    cdef double[::1] drift = drift_arr
    cdef cnp.int64_t[::1] ev_week = ev_week_arr
    cdef signed char[::1] ev_kind = ev_kind_arr
    cdef cnp.int64_t[::1] ev_album = ev_album_arr
    cdef double[::1] ev_value = ev_value_arr
    cdef signed char[::1] ev_flag = ev_flag_arr

    cdef int state = 0
    cdef double x = x0
    cdef double q_pop = 0.0
    cdef cnp.int64_t album = 0
    cdef double episode_sum = 0.0
    cdef double prev_total = 0.0
    cdef Py_ssize_t t, n_ev = 0
    cdef bint released
    cdef int success
    cdef double jump, spike, a_t

    for t in range(n):
        released = False
        if state == 0:
            if uv[t, 0] < hazard[(t + woy_offset) % 52]:
                state = 1
                released = True
        elif uv[t, 0] < q22_exit:
            state = 0
            q_pop = 0.0
            prev_total = episode_sum
            episode_sum = 0.0

        if released:
            album += 1
            if memory_mode:
                if album > 1:
                    jump = prev_total / s_c + s_s * zv[t, 0]
                    if jump < 0.0:
                        jump = 0.0
                else:
                    jump = jump_scale_k * exp(jump_mu + jump_sigma * zv[t, 0])
            else:
                jump = jump_scale_k * exp(jump_mu + jump_sigma * zv[t, 0]) + uv[t, 5] * spike_max
            x = x + jump
            ev_week[n_ev] = t
            ev_kind[n_ev] = EV_ALBUM
            ev_album[n_ev] = album
            ev_value[n_ev] = jump
            ev_flag[n_ev] = 0
            n_ev += 1

        if state == 1:
            if uv[t, 1] < p:
                spike = uv[t, 3] * spike_max
                x = x + spike
                success = 1 if uv[t, 2] < p_prime else 0
                ev_week[n_ev] = t
                ev_kind[n_ev] = EV_SINGLE
                ev_album[n_ev] = album
                ev_value[n_ev] = spike
                ev_flag[n_ev] = success
                n_ev += 1
                if success:
                    state = 2
                    q_pop = uv[t, 4] * spike_max
        elif state == 2:
            if uv[t, 1] < p:
                spike = uv[t, 3] * spike_max
                x = x + spike
                success = 1 if uv[t, 2] < p_prime else 0
                ev_week[n_ev] = t
                ev_kind[n_ev] = EV_SINGLE
                ev_album[n_ev] = album
                ev_value[n_ev] = spike
                ev_flag[n_ev] = success
                n_ev += 1
                state = 1
                q_pop = 0.0

        a_t = a + q_pop if state == 2 else a
        if multiplicative:
            x = x + a_t - b * x + s * x * zv[t, 1]
        else:
            x = x + a_t - b * x + s * zv[t, 1]
        if x < 0.0:
            x = 0.0

        values[t] = x
        regimes[t] = state
        drift[t] = a_t
        if state != 0:
            episode_sum += x

    events = [
        (
            int(ev_week[i]),
            int(ev_kind[i]),
            int(ev_album[i]),
            float(ev_value[i]),
            int(ev_flag[i]),
        )
        for i in range(n_ev)
    ]
    return values_arr, regimes_arr, drift_arr, events
