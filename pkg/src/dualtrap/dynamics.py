"""Time-domain integration in the full dual-frequency field.

The field model sums four force terms per particle: the radial RF
quadrupole of both drives (derived from a potential proportional to
x^2 - y^2, so x and y carry opposite signs), a static axial restoring
force set by the endcap voltage, a uniform static field (compensation
electrodes plus any extra bias), and the mutual Coulomb force.  An
optional phenomenological coefficient leaks a fraction of the slow
drive onto the axial coordinate; it is zero unless studying axial
micromotion growth.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import epsilon_0, pi

from . import _kernels
from .errors import (BracketError, InsufficientDataError, SingularityError,
                     StepSizeError)
from .trap import ParticleSpec, TrapConfig

COULOMB_K = 1.0 / (4.0 * pi * epsilon_0)
HARD_CORE = 10e-9            # m; far below any physical separation here
FAST_RESOLUTION = 50         # minimum steps per fast period
AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class TwoParticleState:
    """Positions/velocities of one or two particles at a common time."""

    positions: np.ndarray    # (n, 3) m
    velocities: np.ndarray   # (n, 3) m/s
    time: float = 0.0

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        vel = np.atleast_2d(np.asarray(self.velocities, dtype=float))
        if pos.shape != vel.shape or pos.shape[1] != 3 or pos.shape[0] not in (1, 2):
            raise ValueError("positions/velocities must both be (n, 3) with n in {1, 2}")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("state components must be finite")
        if pos.shape[0] == 2:
            if np.linalg.norm(pos[0] - pos[1]) <= HARD_CORE:
                raise ValueError("particles closer than the hard-core radius")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class FieldModel:
    """Trap plus particles plus the switches of the force model.

    ``axial_rf_gain`` >= 0; zero reproduces a pure 2D RF quadrupole with
    static axial confinement.  ``extra_static_field`` adds to the
    compensation-electrode field (V/m).
    """

    trap: TrapConfig
    particles: tuple[ParticleSpec, ...]
    include_coulomb: bool = True
    axial_rf_gain: float = 0.0
    extra_static_field: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.axial_rf_gain < 0:
            raise ValueError("axial_rf_gain must be >= 0")
        if len(self.particles) not in (1, 2):
            raise ValueError("one or two particles supported")
        object.__setattr__(self, "particles", tuple(self.particles))
        object.__setattr__(self, "extra_static_field",
                           tuple(self.extra_static_field))

    def charges_si(self) -> np.ndarray:
        return np.array([p.charge_si for p in self.particles])

    def masses(self) -> np.ndarray:
        return np.array([p.mass for p in self.particles])

    def axial_omega2(self) -> np.ndarray:
        """Per-particle axial curvature omega_z^2 from the endcap voltage."""
        t = self.trap
        return np.array([t.axial_gain * p.charge_si * t.v_endcap
                         / (p.mass * t.r0 ** 2) for p in self.particles])

    def static_field(self) -> np.ndarray:
        t = self.trap
        e = np.array(self.extra_static_field, dtype=float)
        e[0] += t.comp_gain * t.v_comp[0]
        e[1] += t.comp_gain * t.v_comp[1]
        return e

    def coulomb_prefactor(self) -> float:
        if not self.include_coulomb or len(self.particles) != 2:
            return 0.0
        return COULOMB_K * self.particles[0].charge_si * self.particles[1].charge_si

    def _kernel_args(self):
        t = self.trap
        return (self.charges_si(), self.masses(), t.v_slow, t.omega_slow,
                t.v_fast, t.omega_fast, t.kappa_geo / t.r0 ** 2,
                self.axial_omega2(), self.axial_rf_gain, self.static_field(),
                self.coulomb_prefactor(), HARD_CORE)


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sampled trajectory with escape diagnostics."""

    times: np.ndarray        # (m,) s, strictly increasing
    positions: np.ndarray    # (m, n, 3) m
    velocities: np.ndarray   # (m, n, 3) m/s
    escape_flag: bool
    escape_time: float | None

    @property
    def dt_sample(self) -> float:
        return float(self.times[1] - self.times[0])

    def axis(self, particle: int, axis: str) -> np.ndarray:
        return self.positions[:, particle, AXES[axis]]

    def write_csv(self, path) -> None:
        """Columns t,x1,y1,z1,x2,y2,z2 (SI); single-particle runs pad
        the second slot with nan."""
        n = self.positions.shape[1]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,x1,y1,z1,x2,y2,z2\n")
            for i, t in enumerate(self.times):
                row = [f"{t:.12g}"]
                for p in range(2):
                    if p < n:
                        row += [f"{self.positions[i, p, k]:.12g}" for k in range(3)]
                    else:
                        row += ["nan"] * 3
                fh.write(",".join(row) + "\n")


def force(state: TwoParticleState, field: FieldModel, t: float) -> np.ndarray:
    """Per-particle force vectors (N) at time ``t``.

    Evaluates the same compiled acceleration routine the integrator
    uses, so trajectory and force diagnostics cannot drift apart.
    Newton's third law holds exactly for the Coulomb pair.
    """
    (charges, masses, v_s, w_s, v_f, w_f, kap_r02, ax_w2, ax_gain,
     efield, kqq, hard_core) = field._kernel_args()
    if state.n_particles != len(field.particles):
        raise ValueError("state/field particle count mismatch")
    acc = np.empty_like(state.positions)
    status = _kernels._accel(state.positions, charges, masses, t,
                             v_s, w_s, v_f, w_f, kap_r02, ax_w2, ax_gain,
                             efield, kqq, hard_core, acc)
    if status == _kernels.STATUS_SINGULAR:
        raise SingularityError("particle separation below the hard core")
    return acc * masses[:, None]


def total_energy(state: TwoParticleState, field: FieldModel) -> float:
    """Kinetic + static potential energy (J).

    Only meaningful with both drives off (the RF terms are
    time-dependent); includes axial springs, static-field potential and
    the Coulomb pair term.
    """
    masses = field.masses()
    charges = field.charges_si()
    ke = 0.5 * np.sum(masses[:, None] * state.velocities ** 2)
    w2 = field.axial_omega2()
    pe = 0.5 * np.sum(masses * w2 * state.positions[:, 2] ** 2)
    efield = field.static_field()
    pe -= np.sum(charges * (state.positions @ efield))
    kqq = field.coulomb_prefactor()
    if kqq != 0.0:
        pe += kqq / np.linalg.norm(state.positions[0] - state.positions[1])
    return float(ke + pe)


def integrate(initial: TwoParticleState, field: FieldModel, dt: float,
              t_end: float, sample_every: int = 1,
              escape_radius: float | None = None) -> TrajectoryRecord:
    """Deterministic fixed-step trajectory from ``initial.time`` to ``t_end``.

    Enforces dt <= T_fast/50 whenever the fast drive is active.  The
    escape flag is set when any coordinate magnitude exceeds the escape
    radius (default 10*r0) before the end time.
    """
    if dt <= 0 or t_end <= initial.time:
        raise ValueError("need dt > 0 and t_end > start time")
    if field.trap.v_fast > 0.0:
        t_fast = 2.0 * pi / field.trap.omega_fast
        if dt > t_fast / FAST_RESOLUTION:
            raise StepSizeError(
                f"dt={dt:g} too coarse: need <= {t_fast / FAST_RESOLUTION:g} "
                f"({FAST_RESOLUTION} steps per fast period)")
    if escape_radius is None:
        escape_radius = 10.0 * field.trap.r0

    n_steps = int(round((t_end - initial.time) / dt))
    n_samples = n_steps // sample_every + 1
    n = initial.n_particles
    out_t = np.empty(n_samples)
    out_pos = np.empty((n_samples, n, 3))
    out_vel = np.empty((n_samples, n, 3))

    args = field._kernel_args()
    status, n_samp, stop_step = _kernels.rk4_trajectory(
        initial.positions, initial.velocities, args[0], args[1],
        initial.time, dt, n_steps, *args[2:], escape_radius ** 2,
        sample_every, out_t, out_pos, out_vel)

    if status == _kernels.STATUS_SINGULAR:
        raise SingularityError("particle separation fell below the hard core")
    escaped = status == _kernels.STATUS_ESCAPED
    return TrajectoryRecord(
        times=out_t[:n_samp], positions=out_pos[:n_samp],
        velocities=out_vel[:n_samp], escape_flag=escaped,
        escape_time=initial.time + stop_step * dt if escaped else None)


def single_bin_amplitude(record: TrajectoryRecord, axis: str, omega: float,
                         particle: int = 0) -> float:
    """Discrete Fourier amplitude of one coordinate at the bin nearest
    ``omega`` (rad/s), mean removed, rectangular window."""
    x = record.axis(particle, axis)
    x = x - x.mean()
    n = len(x)
    dt = record.dt_sample
    k = int(round(omega * n * dt / (2.0 * pi)))
    k = max(1, min(k, n // 2))
    phases = np.exp(-2j * pi * k * np.arange(n) / n)
    return 2.0 * abs(np.dot(x, phases)) / n


def slow_micromotion_amplitude(record: TrajectoryRecord, axis: str,
                               drive_omega: float, particle: int = 0) -> float:
    """Amplitude (m) of the coordinate's oscillation at ``drive_omega``
    (normally the slow drive).

    Raises InsufficientDataError when the record spans fewer than 10
    drive periods.
    """
    span = record.times[-1] - record.times[0]
    if span * drive_omega < 10 * 2.0 * pi:
        raise InsufficientDataError(
            f"record spans {span * drive_omega / (2 * pi):.1f} drive periods, need >= 10")
    return single_bin_amplitude(record, axis, drive_omega, particle)


def amplitude_spectrum(record: TrajectoryRecord, axis: str,
                       particle: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """One-sided amplitude spectrum (freq Hz, amplitude m) of a coordinate."""
    x = record.axis(particle, axis)
    x = x - x.mean()
    n = len(x)
    amp = 2.0 * np.abs(np.fft.rfft(x)) / n
    freq = np.fft.rfftfreq(n, record.dt_sample)
    return freq, amp


def dominant_frequency(record: TrajectoryRecord, axis: str,
                       particle: int = 0) -> float:
    """Frequency (Hz) of the strongest spectral line of a coordinate.

    Hann window plus parabolic interpolation around the peak bin gives
    well below 0.1-bin accuracy for an isolated line.
    """
    x = record.axis(particle, axis)
    x = x - x.mean()
    n = len(x)
    w = np.hanning(n)
    mag = np.abs(np.fft.rfft(x * w))
    k = int(np.argmax(mag[1:]) + 1)
    if 1 <= k < len(mag) - 1:
        la, lb, lc = np.log(mag[k - 1] + 1e-300), np.log(mag[k] + 1e-300), \
            np.log(mag[k + 1] + 1e-300)
        denom = la - 2 * lb + lc
        delta = 0.5 * (la - lc) / denom if denom != 0 else 0.0
    else:
        delta = 0.0
    return (k + delta) / (n * record.dt_sample)


def escape_threshold(field_template: FieldModel,
                     v_slow_range: tuple[float, float], tol: float,
                     horizon_slow_periods: float = 50.0,
                     steps_per_fast_period: int = 200,
                     probe_offset: float = 1e-6) -> float:
    """Slow-drive amplitude (V, zero-to-peak) at which the particle is
    expelled, located by bisection on the integrator's escape flag.

    A probe particle starts ``probe_offset`` off-axis along x and y and
    is integrated for ``horizon_slow_periods`` slow periods; raising the
    amplitude beyond the returned value produces escape within that
    horizon.  Raises BracketError unless the range brackets a
    stable->unstable transition.
    """
    trap = field_template.trap
    t_end = horizon_slow_periods * 2.0 * pi / trap.omega_slow
    dt = (2.0 * pi / trap.omega_fast) / steps_per_fast_period

    def escapes(v_slow: float) -> bool:
        f = replace(field_template, trap=replace(trap, v_slow=v_slow))
        init = TwoParticleState(
            positions=np.array([[probe_offset, probe_offset, 0.0]]),
            velocities=np.zeros((1, 3)))
        return integrate(init, f, dt, t_end, sample_every=10 ** 9).escape_flag

    lo, hi = v_slow_range
    if lo < 0 or hi <= lo:
        raise ValueError("invalid v_slow_range")
    lo_escapes = escapes(lo) if lo > 0 else False
    if lo_escapes:
        raise BracketError(f"already unstable at v_slow={lo} V")
    if not escapes(hi):
        raise BracketError(f"still stable at v_slow={hi} V")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if escapes(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
