"""Pure-Python weekly-step loop, the reference for the compiled kernel.

Both kernels consume identical pre-drawn variate blocks and must perform the
same floating-point operations in the same order so their outputs are
bit-identical.  Per week the layout is

    u[t, 0]  regime-transition roll
    u[t, 1]  single-release roll
    u[t, 2]  single-success roll
    u[t, 3]  single-spike magnitude (times spike_max)
    u[t, 4]  popularity drift bonus (times spike_max)
    u[t, 5]  release-week first-single spike (times spike_max)
    z[t, 0]  release-peak normal draw (log-normal peak or memory noise)
    z[t, 1]  diffusion noise

and every column is drawn for every week whether or not the path uses it,
so the draw sequence never depends on the realized path.

Event tuples are ``(week, kind, album_index, value, success)`` with kind 0
for an album release and 1 for a single release.
"""

from __future__ import annotations

from math import exp

import numpy as np

EV_ALBUM = 0
EV_SINGLE = 1


def run_weekly_loop(
    u: np.ndarray,
    z: np.ndarray,
    x0: float,
    a: float,
    b: float,
    s: float,
    multiplicative: bool,
    q12_week: np.ndarray,
    woy_offset: int,
    q22_exit: float,
    p: float,
    p_prime: float,
    jump_mu: float,
    jump_sigma: float,
    jump_scale_k: float,
    spike_max: float,
    memory_mode: bool,
    s_c: float,
    s_s: float,
):
    n = len(u)
    u_rows = u.tolist()
    z_rows = z.tolist()
    hazard = q12_week.tolist()

    values = [0.0] * n
    regimes = bytearray(n)
    drift = [0.0] * n
    events: list[tuple[int, int, int, float, int]] = []

    state = 0
    x = float(x0)
    q_pop = 0.0
    album = 0
    episode_sum = 0.0
    prev_total = 0.0

    for t in range(n):
        ut = u_rows[t]
        zt = z_rows[t]
        released = False
        if state == 0:
            if ut[0] < hazard[(t + woy_offset) % 52]:
                state = 1
                released = True
        elif ut[0] < q22_exit:
            state = 0
            q_pop = 0.0
            prev_total = episode_sum
            episode_sum = 0.0

        if released:
            album += 1
            if memory_mode:
                if album > 1:
                    jump = prev_total / s_c + s_s * zt[0]
                    if jump < 0.0:
                        jump = 0.0
                else:
                    jump = jump_scale_k * exp(jump_mu + jump_sigma * zt[0])
            else:
                jump = jump_scale_k * exp(jump_mu + jump_sigma * zt[0]) + ut[5] * spike_max
            x = x + jump
            events.append((t, EV_ALBUM, album, jump, 0))

        if state == 1:
            if ut[1] < p:
                spike = ut[3] * spike_max
                x = x + spike
                success = 1 if ut[2] < p_prime else 0
                events.append((t, EV_SINGLE, album, spike, success))
                if success:
                    state = 2
                    q_pop = ut[4] * spike_max
        elif state == 2:
            if ut[1] < p:
                spike = ut[3] * spike_max
                x = x + spike
                success = 1 if ut[2] < p_prime else 0
                events.append((t, EV_SINGLE, album, spike, success))
                state = 1
                q_pop = 0.0

        a_t = a + q_pop if state == 2 else a
        if multiplicative:
            x = x + a_t - b * x + s * x * zt[1]
        else:
            x = x + a_t - b * x + s * zt[1]
        if x < 0.0:
            x = 0.0

        values[t] = x
        regimes[t] = state
        drift[t] = a_t
        if state != 0:
            episode_sum += x

    return (
        np.array(values, dtype=np.float64),
        np.frombuffer(bytes(regimes), dtype=np.int8).copy(),
        np.array(drift, dtype=np.float64),
        events,
    )
