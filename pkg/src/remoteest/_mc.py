"""Jitted Monte Carlo kernels.

Single-threaded numba kernels built on a xoshiro256++ stream seeded via
splitmix64 and Marsaglia polar normal pairs. Each replication owns one
stream (seeded from the replication index outside), so results are
reproducible and independent of scheduling. All path stepping uses
Gaussian increments of variance dt; barrier and threshold crossings are
detected on the grid (first grid point at or past the trigger), which
is the documented discretization bias of the simulator.
"""

import numpy as np
from numba import njit, uint64

_MASK = uint64(0xFFFFFFFFFFFFFFFF)
_U53 = 1.1102230246251565e-16  # 2^-53


@njit(cache=True, inline="always")
def _splitmix64(s):
    s = (s + uint64(0x9E3779B97F4A7C15)) & _MASK
    z = s
    z = ((z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)) & _MASK
    z = ((z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)) & _MASK
    return s, (z ^ (z >> uint64(31))) & _MASK


@njit(cache=True, inline="always")
def _rotl(x, k):
    return ((x << k) | (x >> (uint64(64) - k))) & _MASK


@njit(cache=True, inline="always")
def _xoshiro_next(s0, s1, s2, s3):
    result = (_rotl((s0 + s3) & _MASK, uint64(23)) + s0) & _MASK
    t = (s1 << uint64(17)) & _MASK
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, uint64(45))
    return result, s0, s1, s2, s3


@njit(cache=True, inline="always")
def _seed_state(seed):
    s = uint64(seed)
    s, s0 = _splitmix64(s)
    s, s1 = _splitmix64(s)
    s, s2 = _splitmix64(s)
    s, s3 = _splitmix64(s)
    return s0, s1, s2, s3


@njit(cache=True, inline="always")
def _uniform(s0, s1, s2, s3):
    r, s0, s1, s2, s3 = _xoshiro_next(s0, s1, s2, s3)
    return (r >> uint64(11)) * _U53, s0, s1, s2, s3


@njit(cache=True, inline="always")
def _normal_pair(s0, s1, s2, s3):
    while True:
        r1, s0, s1, s2, s3 = _xoshiro_next(s0, s1, s2, s3)
        r2, s0, s1, s2, s3 = _xoshiro_next(s0, s1, s2, s3)
        u = (r1 >> uint64(11)) * _U53 * 2.0 - 1.0
        v = (r2 >> uint64(11)) * _U53 * 2.0 - 1.0
        q = u * u + v * v
        if 0.0 < q < 1.0:
            f = np.sqrt(-2.0 * np.log(q) / q)
            return u * f, v * f, s0, s1, s2, s3


@njit(cache=True, inline="always")
def _normal_one(s0, s1, s2, s3):
    z, _, s0, s1, s2, s3 = _normal_pair(s0, s1, s2, s3)
    return z, s0, s1, s2, s3


@njit(cache=True, inline="always")
def _draw_service(kind, a, vals, cum, s0, s1, s2, s3):
    # kind: 0 point mass (a), 1 exponential (mean a), 2 lognormal unit
    # mean (sigma a), 3 discrete (vals/cum)
    if kind == 0:
        return a, s0, s1, s2, s3
    if kind == 1:
        u, s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
        return -a * np.log(1.0 - u), s0, s1, s2, s3
    if kind == 2:
        z, s0, s1, s2, s3 = _normal_one(s0, s1, s2, s3)
        return np.exp(a * z - 0.5 * a * a), s0, s1, s2, s3
    u, s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
    idx = 0
    while idx < cum.shape[0] - 1 and u >= cum[idx]:
        idx += 1
    return vals[idx], s0, s1, s2, s3


@njit(cache=True, fastmath=True)
def policy_kernel(policy_id, pparam, dkind, dparam, dvals, dcum,
                  n_steps, dt, warm_steps, qcap, seed):
    """One replication of the source/queue/estimator loop.

    policy_id: 0 periodic (pparam = interval), 1 zero-wait,
    2 age threshold (pparam = beta), 3 signal threshold (pparam = beta).

    Returns (mse_integral, age_integral, n_samples_post_warmup,
    interval_sum, dw4_sum, n_intervals) where the integrals run over
    [warmup, horizon).
    """
    s0, s1, s2, s3 = _seed_state(seed)
    sqrt_dt = np.sqrt(dt)
    sqrt_beta = np.sqrt(pparam) if policy_id == 3 else 0.0
    eps = 1e-9 * dt
    tw = warm_steps * dt

    w = 0.0
    west = 0.0
    s_cur = 0.0
    last_ev = 0.0
    age_sum = 0.0
    mse_sum = 0.0

    s_prev = 0.0
    w_prev = 0.0
    have_prev = False
    n_samples = 0
    interval_sum = 0.0
    dw4_sum = 0.0
    n_int = 0

    # periodic queue state
    q_time = np.empty(qcap)
    q_w = np.empty(qcap)
    q_dexact = np.empty(qcap)
    head = 0
    tail = 0
    d_last = 0.0
    next_sched = 0.0

    # single-server state for the no-queue policies
    busy = False
    d_pend = 0.0
    s_pend = 0.0
    w_pend = 0.0

    spare = 0.0
    has_spare = False

    for k in range(n_steps):
        t = k * dt

        # deliveries due at this grid time
        if policy_id == 0:
            while head < tail and q_dexact[head] <= t:
                if t > tw:
                    a0 = last_ev if last_ev > tw else tw
                    if t > a0:
                        age_sum += (t - a0) * (0.5 * (a0 + t) - s_cur)
                last_ev = t
                s_cur = q_time[head]
                west = q_w[head]
                head += 1
        elif busy and d_pend <= t:
            if t > tw:
                a0 = last_ev if last_ev > tw else tw
                if t > a0:
                    age_sum += (t - a0) * (0.5 * (a0 + t) - s_cur)
            last_ev = t
            s_cur = s_pend
            west = w_pend
            busy = False

        # sampling decision at this grid time
        if policy_id == 0:
            if t >= next_sched - eps:
                if have_prev and s_prev >= tw:
                    interval_sum += t - s_prev
                    dwd = w - w_prev
                    dw4_sum += dwd * dwd * dwd * dwd
                    n_int += 1
                if t >= tw:
                    n_samples += 1
                have_prev = True
                s_prev = t
                w_prev = w
                y, s0, s1, s2, s3 = _draw_service(dkind, dparam, dvals, dcum, s0, s1, s2, s3)
                start = d_last if d_last > t else t
                d_last = start + y
                q_time[tail] = t
                q_w[tail] = w
                q_dexact[tail] = d_last
                tail += 1
                next_sched += pparam
        elif not busy:
            if policy_id == 1:
                trig = True
            elif policy_id == 2:
                trig = t - s_prev >= pparam - eps
            else:
                dwp = w - w_prev
                trig = dwp >= sqrt_beta or -dwp >= sqrt_beta
            if trig:
                if have_prev and s_prev >= tw:
                    interval_sum += t - s_prev
                    dwd = w - w_prev
                    dw4_sum += dwd * dwd * dwd * dwd
                    n_int += 1
                if t >= tw:
                    n_samples += 1
                have_prev = True
                s_prev = t
                w_prev = w
                y, s0, s1, s2, s3 = _draw_service(dkind, dparam, dvals, dcum, s0, s1, s2, s3)
                d_pend = t + y
                s_pend = t
                w_pend = w
                busy = True

        if k >= warm_steps:
            d = w - west
            mse_sum += d * d

        # advance the Wiener path
        if has_spare:
            z = spare
            has_spare = False
        else:
            z, spare, s0, s1, s2, s3 = _normal_pair(s0, s1, s2, s3)
            has_spare = True
        w += sqrt_dt * z

    t_end = n_steps * dt
    if t_end > tw:
        a0 = last_ev if last_ev > tw else tw
        if t_end > a0:
            age_sum += (t_end - a0) * (0.5 * (a0 + t_end) - s_cur)

    return mse_sum * dt, age_sum, n_samples, interval_sum, dw4_sum, n_int


@njit(cache=True, fastmath=True)
def fixed_time_identity_kernel(n_paths, n0, dt, seed):
    """Fixed-horizon stopping: sums of (integral W^2 dt, W^4) per path."""
    s0, s1, s2, s3 = _seed_state(seed)
    sqrt_dt = np.sqrt(dt)
    sum_l = 0.0
    sq_l = 0.0
    sum_r = 0.0
    sq_r = 0.0
    spare = 0.0
    has_spare = False
    for _ in range(n_paths):
        w = 0.0
        acc = 0.0
        for _ in range(n0):
            acc += w * w
            if has_spare:
                z = spare
                has_spare = False
            else:
                z, spare, s0, s1, s2, s3 = _normal_pair(s0, s1, s2, s3)
                has_spare = True
            w += sqrt_dt * z
        lhs = acc * dt
        rhs = w * w * w * w
        sum_l += lhs
        sq_l += lhs * lhs
        sum_r += rhs
        sq_r += rhs * rhs
    return sum_l, sq_l, sum_r, sq_r


@njit(cache=True, fastmath=True)
def barrier_identity_kernel(n_paths, beta, dt, kmax, seed):
    """Two-sided barrier stopping at |W| = sqrt(beta), grid detection."""
    s0, s1, s2, s3 = _seed_state(seed)
    sqrt_dt = np.sqrt(dt)
    sum_l = 0.0
    sq_l = 0.0
    sum_r = 0.0
    sq_r = 0.0
    censored = 0
    spare = 0.0
    has_spare = False
    for _ in range(n_paths):
        w = 0.0
        acc = 0.0
        k = 0
        while w * w < beta and k < kmax:
            acc += w * w
            if has_spare:
                z = spare
                has_spare = False
            else:
                z, spare, s0, s1, s2, s3 = _normal_pair(s0, s1, s2, s3)
                has_spare = True
            w += sqrt_dt * z
            k += 1
        if k >= kmax:
            censored += 1
        lhs = acc * dt
        rhs = w * w * w * w
        sum_l += lhs
        sq_l += lhs * lhs
        sum_r += rhs
        sq_r += rhs * rhs
    return sum_l, sq_l, sum_r, sq_r, censored


@njit(cache=True, fastmath=True)
def threshold_moment_kernel(n_paths, beta, dkind, dparam, dvals, dcum, dt, kmax, seed):
    """Per-interval moments of the signal-threshold waiting rule.

    The service leg is exact (W_Y = sqrt(Y) Z); only the post-delivery
    hitting leg walks the grid. Returns sums/sumsqs of tau = Y + Z_wait
    and (W at stop)^4, plus the censored-path count.
    """
    s0, s1, s2, s3 = _seed_state(seed)
    sqrt_dt = np.sqrt(dt)
    sqrt_beta = np.sqrt(beta)
    sum_t = 0.0
    sq_t = 0.0
    sum_d4 = 0.0
    sq_d4 = 0.0
    censored = 0
    spare = 0.0
    has_spare = False
    for _ in range(n_paths):
        y, s0, s1, s2, s3 = _draw_service(dkind, dparam, dvals, dcum, s0, s1, s2, s3)
        z, s0, s1, s2, s3 = _normal_one(s0, s1, s2, s3)
        w = np.sqrt(y) * z
        k = 0
        if beta > 0.0:
            while (w < sqrt_beta and -w < sqrt_beta) and k < kmax:
                if has_spare:
                    zz = spare
                    has_spare = False
                else:
                    zz, spare, s0, s1, s2, s3 = _normal_pair(s0, s1, s2, s3)
                    has_spare = True
                w += sqrt_dt * zz
                k += 1
            if k >= kmax:
                censored += 1
        tau = y + k * dt
        d4 = w * w * w * w
        sum_t += tau
        sq_t += tau * tau
        sum_d4 += d4
        sq_d4 += d4 * d4
    return sum_t, sq_t, sum_d4, sq_d4, censored


@njit(cache=True, fastmath=True)
def cycle_decomposition_kernel(n_cycles, beta, dkind, dparam, dvals, dcum, dt, kmax, seed):
    """Chained signal-threshold cycles on one path.

    Observation j accumulates the squared deviation from the stamp of
    sample j over [D_j, D_{j+1}) (left Riemann); per-cycle statistics
    collect the interval length, the fourth moment of the stamp
    increment, and the drawn service times.

    Returns (sum_lhs, sq_lhs, n_obs, sum_dw4, sq_dw4, sum_int, sq_int,
    n_cyc, sum_y, censored).
    """
    s0, s1, s2, s3 = _seed_state(seed)
    sqrt_dt = np.sqrt(dt)
    sqrt_beta = np.sqrt(beta)
    sum_lhs = 0.0
    sq_lhs = 0.0
    n_obs = 0
    sum_dw4 = 0.0
    sq_dw4 = 0.0
    sum_int = 0.0
    sq_int = 0.0
    sum_y = 0.0
    censored = 0
    spare = 0.0
    has_spare = False

    v = 0.0  # W - W at the current sample's stamp
    prev_dw = 0.0
    obs = 0.0
    have_open = False

    for _ in range(n_cycles):
        y, s0, s1, s2, s3 = _draw_service(dkind, dparam, dvals, dcum, s0, s1, s2, s3)
        sum_y += y
        # service phase: delivery at the first grid point >= y
        m = int(np.ceil(y / dt - 1e-12))
        if m < 0:
            m = 0
        for _ in range(m):
            if have_open:
                u = v + prev_dw
                obs += u * u
            if has_spare:
                z = spare
                has_spare = False
            else:
                z, spare, s0, s1, s2, s3 = _normal_pair(s0, s1, s2, s3)
                has_spare = True
            v += sqrt_dt * z
        if have_open:
            lhs = obs * dt
            sum_lhs += lhs
            sq_lhs += lhs * lhs
            n_obs += 1
        obs = 0.0
        have_open = True
        # waiting phase: two-sided trigger on |v| at grid points
        k = 0
        while (v < sqrt_beta and -v < sqrt_beta) and k < kmax:
            obs += v * v
            if has_spare:
                z = spare
                has_spare = False
            else:
                z, spare, s0, s1, s2, s3 = _normal_pair(s0, s1, s2, s3)
                has_spare = True
            v += sqrt_dt * z
            k += 1
        if k >= kmax:
            censored += 1
        interval = m * dt + k * dt
        d4 = v * v * v * v
        sum_int += interval
        sq_int += interval * interval
        sum_dw4 += d4
        sq_dw4 += d4 * d4
        prev_dw = v
        v = 0.0
    return sum_lhs, sq_lhs, n_obs, sum_dw4, sq_dw4, sum_int, sq_int, sum_y, censored
