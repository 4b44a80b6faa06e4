"""Numba-compiled inner loops.

Everything here is deliberately scalar/loop-shaped: the hot paths are
long fixed-step integrations where per-step numpy dispatch overhead
dominates.  Keep these kernels free of Python objects.
"""

import numpy as np
from numba import njit

# integrate() status codes
STATUS_OK = 0
STATUS_ESCAPED = 1
STATUS_SINGULAR = 2


@njit(cache=True)
def mathieu_monodromy(a, q, n_steps):
    """Fundamental 2x2 solution of x'' + (a + 2 q cos 2t) x = 0
    propagated over t in [0, pi] with fixed-step RK4.

    Returns the matrix entries (m11, m12, m21, m22); columns are the
    solutions with initial conditions (1, 0) and (0, 1).
    """
    h = np.pi / n_steps
    x1, v1 = 1.0, 0.0
    x2, v2 = 0.0, 1.0
    for i in range(n_steps):
        t = i * h
        c0 = -(a + 2.0 * q * np.cos(2.0 * t))
        ch = -(a + 2.0 * q * np.cos(2.0 * (t + 0.5 * h)))
        c1 = -(a + 2.0 * q * np.cos(2.0 * (t + h)))

        k1x = v1
        k1v = c0 * x1
        k2x = v1 + 0.5 * h * k1v
        k2v = ch * (x1 + 0.5 * h * k1x)
        k3x = v1 + 0.5 * h * k2v
        k3v = ch * (x1 + 0.5 * h * k2x)
        k4x = v1 + h * k3v
        k4v = c1 * (x1 + h * k3x)
        x1 += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v1 += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)

        k1x = v2
        k1v = c0 * x2
        k2x = v2 + 0.5 * h * k1v
        k2v = ch * (x2 + 0.5 * h * k1x)
        k3x = v2 + 0.5 * h * k2v
        k3v = ch * (x2 + 0.5 * h * k2x)
        k4x = v2 + h * k3v
        k4v = c1 * (x2 + h * k3x)
        x2 += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v2 += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)

    return x1, x2, v1, v2


@njit(cache=True, inline="always")
def _accel(pos, charges, masses, t,
           v_slow, w_slow, v_fast, w_fast, kap_r02,
           axial_w2, axial_rf_gain, efield, kqq, hard_core, acc):
    """Accelerations of up to two particles, written into ``acc`` (n, 3).

    Field terms: radial RF quadrupole from both drives (x and y with
    opposite signs), static axial restoring force, slow-field axial
    leakage (phenomenological, zero by default), uniform static field,
    mutual Coulomb force.  Returns 0, or STATUS_SINGULAR on a hard-core
    approach.
    """
    n = pos.shape[0]
    rf_slow = v_slow * np.cos(w_slow * t)
    rf = (rf_slow + v_fast * np.cos(w_fast * t)) * kap_r02
    rf_ax = rf_slow * axial_rf_gain * kap_r02
    for p in range(n):
        qm = charges[p] / masses[p]
        acc[p, 0] = -qm * rf * pos[p, 0] + qm * efield[0]
        acc[p, 1] = +qm * rf * pos[p, 1] + qm * efield[1]
        acc[p, 2] = (-qm * rf_ax * pos[p, 2] - axial_w2[p] * pos[p, 2]
                     + qm * efield[2])
    if kqq != 0.0 and n == 2:
        dx = pos[0, 0] - pos[1, 0]
        dy = pos[0, 1] - pos[1, 1]
        dz = pos[0, 2] - pos[1, 2]
        r2 = dx * dx + dy * dy + dz * dz
        if r2 < hard_core * hard_core:
            return STATUS_SINGULAR
        inv_r3 = 1.0 / (r2 * np.sqrt(r2))
        fx = kqq * dx * inv_r3
        fy = kqq * dy * inv_r3
        fz = kqq * dz * inv_r3
        acc[0, 0] += fx / masses[0]
        acc[0, 1] += fy / masses[0]
        acc[0, 2] += fz / masses[0]
        acc[1, 0] -= fx / masses[1]
        acc[1, 1] -= fy / masses[1]
        acc[1, 2] -= fz / masses[1]
    return STATUS_OK


@njit(cache=True)
def rk4_trajectory(pos0, vel0, charges, masses, t0, dt, n_steps,
                   v_slow, w_slow, v_fast, w_fast, kap_r02,
                   axial_w2, axial_rf_gain, efield, kqq, hard_core,
                   escape_r2, sample_every,
                   out_t, out_pos, out_vel):
    """Fixed-step RK4 trajectory of one or two particles.

    Samples the state every ``sample_every`` steps starting with step 0
    and stops early on escape (any particle beyond sqrt(escape_r2) from
    the origin) or on a Coulomb hard-core approach.

    Returns (status, n_samples, stop_step); stop_step == n_steps when
    the integration ran to the end.
    """
    n = pos0.shape[0]
    pos = pos0.copy()
    vel = vel0.copy()
    a1 = np.empty((n, 3))
    a2 = np.empty((n, 3))
    a3 = np.empty((n, 3))
    a4 = np.empty((n, 3))
    p_tmp = np.empty((n, 3))
    k2x = np.empty((n, 3))
    k3x = np.empty((n, 3))
    k4x = np.empty((n, 3))

    n_samp = 0
    status = STATUS_OK
    stop_step = n_steps

    for step in range(n_steps + 1):
        t = t0 + step * dt
        if step % sample_every == 0:
            out_t[n_samp] = t
            for p in range(n):
                for k in range(3):
                    out_pos[n_samp, p, k] = pos[p, k]
                    out_vel[n_samp, p, k] = vel[p, k]
            n_samp += 1
        for p in range(n):
            r2 = pos[p, 0] ** 2 + pos[p, 1] ** 2 + pos[p, 2] ** 2
            if r2 > escape_r2:
                status = STATUS_ESCAPED
        if status != STATUS_OK or step == n_steps:
            stop_step = step
            break

        # stage 1: slopes at (pos, vel)
        s = _accel(pos, charges, masses, t, v_slow, w_slow, v_fast, w_fast,
                   kap_r02, axial_w2, axial_rf_gain, efield, kqq, hard_core,
                   a1)
        if s != STATUS_OK:
            status = s
            stop_step = step
            break
        # stage 2 at midpoint using stage-1 slopes
        for p in range(n):
            for k in range(3):
                p_tmp[p, k] = pos[p, k] + 0.5 * dt * vel[p, k]
                k2x[p, k] = vel[p, k] + 0.5 * dt * a1[p, k]
        s = _accel(p_tmp, charges, masses, t + 0.5 * dt, v_slow, w_slow,
                   v_fast, w_fast, kap_r02, axial_w2, axial_rf_gain, efield,
                   kqq, hard_core, a2)
        if s != STATUS_OK:
            status = s
            stop_step = step
            break
        # stage 3 at midpoint using stage-2 slopes
        for p in range(n):
            for k in range(3):
                p_tmp[p, k] = pos[p, k] + 0.5 * dt * k2x[p, k]
                k3x[p, k] = vel[p, k] + 0.5 * dt * a2[p, k]
        s = _accel(p_tmp, charges, masses, t + 0.5 * dt, v_slow, w_slow,
                   v_fast, w_fast, kap_r02, axial_w2, axial_rf_gain, efield,
                   kqq, hard_core, a3)
        if s != STATUS_OK:
            status = s
            stop_step = step
            break
        # stage 4 at the full step using stage-3 slopes
        for p in range(n):
            for k in range(3):
                p_tmp[p, k] = pos[p, k] + dt * k3x[p, k]
                k4x[p, k] = vel[p, k] + dt * a3[p, k]
        s = _accel(p_tmp, charges, masses, t + dt, v_slow, w_slow,
                   v_fast, w_fast, kap_r02, axial_w2, axial_rf_gain, efield,
                   kqq, hard_core, a4)
        if s != STATUS_OK:
            status = s
            stop_step = step
            break

        for p in range(n):
            for k in range(3):
                pos[p, k] += dt / 6.0 * (vel[p, k] + 2.0 * k2x[p, k]
                                         + 2.0 * k3x[p, k] + k4x[p, k])
                vel[p, k] += dt / 6.0 * (a1[p, k] + 2.0 * a2[p, k]
                                         + 2.0 * a3[p, k] + a4[p, k])

    return status, n_samp, stop_step
