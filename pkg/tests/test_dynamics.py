"""Time-domain integration: force terms, spectra, escape, conservation."""

from dataclasses import replace

import numpy as np
import pytest
from scipy.constants import elementary_charge, epsilon_0, pi

from dualtrap import (FieldModel, TwoParticleState, escape_threshold, force,
                      integrate, monodromy, presets, q_param,
                      secular_frequency, slow_micromotion_amplitude,
                      total_energy)
from dualtrap.dynamics import amplitude_spectrum, dominant_frequency
from dualtrap.errors import (BracketError, InsufficientDataError,
                             SingularityError, StepSizeError)

K_E = 1.0 / (4 * pi * epsilon_0)


@pytest.fixture
def ion():
    return presets.reference_ion()


@pytest.fixture
def nano():
    return presets.reference_nanoparticle("nominal")


def _single(field, x=(0.0, 0.0, 0.0), v=(0.0, 0.0, 0.0)):
    return TwoParticleState(positions=np.array([x]), velocities=np.array([v]))


def test_rf_force_vanishes_at_quadrupole_null(ion):
    cfg = presets.reference_trap()
    f = FieldModel(trap=replace(cfg, v_endcap=0.0), particles=(ion,),
                   include_coulomb=False)
    for t in (0.0, 1.3e-8, 7.7e-7):
        assert np.all(force(_single(f), f, t) == 0.0)


def test_coulomb_pair_force_magnitude_and_balance(ion, nano):
    d = 55e-6
    cfg = replace(presets.reference_trap(), v_slow=0.0, v_fast=0.0,
                  v_endcap=0.0)
    state = TwoParticleState(positions=np.array([[0, 0, d / 2], [0, 0, -d / 2]]),
                             velocities=np.zeros((2, 3)))
    f = FieldModel(trap=cfg, particles=(ion, nano), include_coulomb=True)
    forces = force(state, f, 0.0)
    expect = K_E * elementary_charge * 800 * elementary_charge / d ** 2
    assert expect == pytest.approx(6.1e-17, rel=0.01)
    assert np.linalg.norm(forces[0]) == pytest.approx(expect, rel=1e-12)
    assert np.linalg.norm(forces[0] + forces[1]) <= 1e-12 * expect


def test_fast_drive_force_hand_value(ion):
    # F_x = -Q kappa V x / r0^2 at the crest of the fast drive
    cfg = replace(presets.reference_trap(), v_slow=0.0, v_endcap=0.0)
    f = FieldModel(trap=cfg, particles=(ion,), include_coulomb=False)
    fx = force(_single(f, x=(1e-6, 0, 0)), f, 0.0)[0, 0]
    expect = -elementary_charge * 0.93 * 1250.0 * 1e-6 / 0.9e-3 ** 2
    assert fx == pytest.approx(expect, rel=1e-12)
    assert fx == pytest.approx(-2.30e-16, rel=0.01)
    # y carries the opposite sign of the quadrupole form
    fy = force(_single(f, x=(0, 1e-6, 0)), f, 0.0)[0, 1]
    assert fy == pytest.approx(-fx, rel=1e-12)


def test_particle_at_null_stays_at_null(ion):
    cfg = replace(presets.reference_trap(), v_endcap=0.0)
    f = FieldModel(trap=cfg, particles=(ion,), include_coulomb=False)
    t_fast = 2 * pi / cfg.omega_fast
    rec = integrate(_single(f), f, dt=t_fast / 200, t_end=50 * t_fast)
    assert not rec.escape_flag
    assert np.all(rec.positions == 0.0)
    assert np.all(rec.velocities == 0.0)


def test_secular_line_of_weak_drive_trajectory(ion):
    # q = 0.1: the dominant line sits at Omega*q/(2 sqrt 2) to within 1%
    cfg = presets.reference_trap()
    scale = ion.mass * cfg.r0 ** 2 * cfg.omega_fast ** 2 / ion.charge_si
    cfg = replace(cfg, v_fast=0.1 * scale / (2 * cfg.kappa_geo), v_slow=0.0,
                  v_endcap=0.0)
    assert q_param(cfg, ion, "fast") == pytest.approx(0.1, rel=1e-12)
    f = FieldModel(trap=cfg, particles=(ion,), include_coulomb=False)
    t_fast = 2 * pi / cfg.omega_fast
    rec = integrate(_single(f, x=(1e-6, 0, 0)), f, dt=t_fast / 200,
                    t_end=600 * t_fast, sample_every=8)
    assert not rec.escape_flag
    f_meas = dominant_frequency(rec, "x")
    f_formula = secular_frequency(cfg, ion, "fast") / (2 * pi)
    assert abs(f_meas - f_formula) / f_formula <= 0.01


def test_pseudopotential_consistency_of_mean_square_displacement(ion):
    # velocity kick at the drive zero crossing (no micromotion
    # projection there): <x^2> matches the equivalent harmonic
    # oscillator within 5% for q <= 0.3
    cfg = presets.reference_trap()
    scale = ion.mass * cfg.r0 ** 2 * cfg.omega_fast ** 2 / ion.charge_si
    for q in (0.1, 0.2, 0.3):
        cfg_q = replace(cfg, v_fast=q * scale / (2 * cfg.kappa_geo),
                        v_slow=0.0, v_endcap=0.0)
        f = FieldModel(trap=cfg_q, particles=(ion,), include_coulomb=False)
        w_sec = secular_frequency(cfg_q, ion, "fast")
        v0 = w_sec * 1e-6
        t_fast = 2 * pi / cfg_q.omega_fast
        state = TwoParticleState(positions=np.zeros((1, 3)),
                                 velocities=np.array([[v0, 0, 0]]),
                                 time=t_fast / 4)
        rec = integrate(state, f, dt=t_fast / 200,
                        t_end=t_fast / 4 + 40 * 2 * pi / w_sec, sample_every=4)
        ms = float(np.mean(rec.axis(0, "x") ** 2))
        harmonic = 0.5 * (v0 / w_sec) ** 2
        assert abs(ms - harmonic) / harmonic <= 0.05


@pytest.mark.parametrize("seed", [11, 12])
def test_bounded_escape_verdicts_follow_floquet(seed, ion):
    from dualtrap.acceptance import _verdict_by_trajectory
    rng = np.random.default_rng(seed)
    cfg = presets.reference_trap()
    n = 0
    while n < 6:
        q = rng.uniform(0.05, 0.88)
        a = rng.uniform(-0.3, 0.3)
        if (monodromy(a - 0.005, q).stable != monodromy(a + 0.005, q).stable):
            continue
        assert _verdict_by_trajectory(a, q, cfg) == monodromy(a, q).stable
        n += 1


def test_slow_micromotion_amplitude_of_displaced_particle(nano):
    # particle held off-axis by a static field shows drive-frequency
    # motion of amplitude (q/2) * offset
    cfg = replace(presets.reference_trap(), v_fast=0.0, v_endcap=0.0,
                  v_comp=(0.2458, 0.0))
    q = q_param(cfg, nano, "slow")
    f = FieldModel(trap=cfg, particles=(nano,), include_coulomb=False)
    e_x = cfg.comp_gain * cfg.v_comp[0]
    x_bar = nano.charge_si * e_x / (nano.mass
                                    * secular_frequency(cfg, nano, "slow") ** 2)
    t_slow = 2 * pi / cfg.omega_slow
    rec = integrate(_single(f, x=(x_bar * (1 - q / 2), 0, 0)), f,
                    dt=t_slow / 2000, t_end=20 * t_slow, sample_every=10)
    amp = slow_micromotion_amplitude(rec, "x", cfg.omega_slow)
    x_mean = float(np.mean(rec.axis(0, "x")))
    assert abs(amp - 0.5 * q * x_mean) <= 0.10 * 0.5 * q * x_mean


def test_micromotion_requires_ten_periods(nano):
    cfg = replace(presets.reference_trap(), v_fast=0.0, v_endcap=0.0)
    f = FieldModel(trap=cfg, particles=(nano,), include_coulomb=False)
    t_slow = 2 * pi / cfg.omega_slow
    rec = integrate(_single(f, x=(1e-6, 0, 0)), f, dt=t_slow / 400,
                    t_end=3 * t_slow)
    with pytest.raises(InsufficientDataError):
        slow_micromotion_amplitude(rec, "x", cfg.omega_slow)


def test_axial_leakage_micromotion_grows_with_displacement(ion):
    cfg = presets.reference_trap()
    t_fast = 2 * pi / cfg.omega_fast
    amps = []
    for z0 in (5e-6, 15e-6):
        e_z = ion.mass * ion.omega_sec[2] ** 2 * z0 / ion.charge_si
        f = FieldModel(trap=cfg, particles=(ion,), include_coulomb=False,
                       axial_rf_gain=0.02,
                       extra_static_field=(0.0, 0.0, e_z))
        rec = integrate(_single(f, x=(0, 0, z0)), f, dt=t_fast / 200,
                        t_end=11 * 2 * pi / cfg.omega_slow, sample_every=5000)
        amps.append(slow_micromotion_amplitude(rec, "z", cfg.omega_slow))
    assert amps[1] > amps[0] > 0.0


def test_escape_threshold_maps_onto_floquet_boundary(ion):
    from dualtrap import a_eff_param, boundary_a_for_q
    cfg = replace(presets.reference_trap(), v_endcap=0.0)
    f = FieldModel(trap=cfg, particles=(ion,), include_coulomb=False)
    thr = escape_threshold(f, (100.0, 250.0), tol=1.0,
                           horizon_slow_periods=10.0)
    a_thr = a_eff_param(replace(cfg, v_slow=thr), ion)
    edge = boundary_a_for_q(q_param(cfg, ion, "fast"), "upper", tol=1e-6)
    assert a_thr == pytest.approx(edge, rel=0.02)


@pytest.mark.xfail(
    reason="the clean-field expulsion threshold sits at the ideal Floquet "
    "boundary (~347 Vpp for this drive), 33% above the measured 260 Vpp; "
    "the idealized model has no mechanism that would lower it",
    strict=True)
def test_escape_threshold_reproduces_measured_amplitude(ion):
    cfg = replace(presets.reference_trap(), v_endcap=0.0)
    f = FieldModel(trap=cfg, particles=(ion,), include_coulomb=False)
    thr = escape_threshold(f, (100.0, 250.0), tol=1.0,
                           horizon_slow_periods=10.0)
    assert abs(2 * thr - 260.0) <= 0.15 * 260.0


def test_escape_threshold_collapses_without_fast_drive(ion):
    cfg = replace(presets.reference_trap(), v_fast=0.0, v_endcap=0.0)
    f = FieldModel(trap=cfg, particles=(ion,), include_coulomb=False)
    thr = escape_threshold(f, (0.0, 50.0), tol=0.5,
                           horizon_slow_periods=5.0)
    assert thr < 1.0


def test_escape_threshold_bracket_failures(ion):
    cfg = replace(presets.reference_trap(), v_endcap=0.0)
    f = FieldModel(trap=cfg, particles=(ion,), include_coulomb=False)
    with pytest.raises(BracketError):
        escape_threshold(f, (10.0, 60.0), tol=1.0, horizon_slow_periods=3.0)


def test_energy_conservation_without_drives(ion, nano):
    cfg = replace(presets.reference_trap(), v_slow=0.0, v_fast=0.0)
    f = FieldModel(trap=cfg, particles=(ion, nano), include_coulomb=True)
    state = TwoParticleState(
        positions=np.array([[0, 0, 49e-6], [0, 0, -0.2e-6]]),
        velocities=np.zeros((2, 3)))
    dt = 2 * pi / ion.omega_sec[2] / 800
    rec = integrate(state, f, dt=dt, t_end=1e5 * dt, sample_every=500)
    energies = [total_energy(TwoParticleState(positions=rec.positions[i],
                                              velocities=rec.velocities[i]),
                             f)
                for i in range(len(rec.times))]
    drift = np.max(np.abs(np.array(energies) - energies[0])) / abs(energies[0])
    assert drift <= 1e-6


def test_momentum_conserving_coulomb_in_trajectory(ion, nano):
    cfg = replace(presets.reference_trap(), v_slow=0.0, v_fast=0.0,
                  v_endcap=0.0)
    f = FieldModel(trap=cfg, particles=(ion, nano), include_coulomb=True)
    state = TwoParticleState(
        positions=np.array([[0, 0, 30e-6], [0, 0, -10e-6]]),
        velocities=np.array([[0, 0, -5.0], [0, 0, 0.0]]))
    rec = integrate(state, f, dt=1e-9, t_end=2e-5, sample_every=100)
    p = (ion.mass * rec.velocities[:, 0, 2]
         + nano.mass * rec.velocities[:, 1, 2])
    assert np.max(np.abs(p)) <= 1e-18  # vs ion momentum scale ~3e-25*5


def test_step_guard_rejects_coarse_steps(ion):
    cfg = presets.reference_trap()
    f = FieldModel(trap=cfg, particles=(ion,), include_coulomb=False)
    with pytest.raises(StepSizeError):
        integrate(_single(f, x=(1e-6, 0, 0)), f,
                  dt=(2 * pi / cfg.omega_fast) / 10, t_end=1e-6)


def test_hard_core_approach_raises(ion, nano):
    cfg = replace(presets.reference_trap(), v_slow=0.0, v_fast=0.0,
                  v_endcap=0.0)
    f = FieldModel(trap=cfg, particles=(ion, nano), include_coulomb=True)
    state = TwoParticleState(
        positions=np.array([[0, 0, 11e-9], [0, 0, 0]]),
        velocities=np.array([[0, 0, -8000.0], [0, 0, 0]]))
    with pytest.raises(SingularityError):
        integrate(state, f, dt=1e-14, t_end=5e-11)


def test_trajectory_record_times_and_csv(tmp_path, ion):
    cfg = replace(presets.reference_trap(), v_endcap=0.0)
    f = FieldModel(trap=cfg, particles=(ion,), include_coulomb=False)
    t_fast = 2 * pi / cfg.omega_fast
    rec = integrate(_single(f, x=(1e-6, 0, 0)), f, dt=t_fast / 200,
                    t_end=20 * t_fast, sample_every=7)
    assert np.all(np.diff(rec.times) > 0)
    path = tmp_path / "traj.csv"
    rec.write_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "t,x1,y1,z1,x2,y2,z2"
    freq, amp = amplitude_spectrum(rec, "x")
    assert len(freq) == len(amp) == len(rec.times) // 2 + 1


def test_escape_sets_flag_and_time(ion):
    # far beyond the stability edge the particle leaves quickly
    cfg = replace(presets.reference_trap(), v_slow=400.0, v_endcap=0.0)
    f = FieldModel(trap=cfg, particles=(ion,), include_coulomb=False)
    t_fast = 2 * pi / cfg.omega_fast
    t_slow = 2 * pi / cfg.omega_slow
    rec = integrate(_single(f, x=(1e-6, 1e-6, 0)), f, dt=t_fast / 200,
                    t_end=5 * t_slow, sample_every=1000)
    assert rec.escape_flag
    assert rec.escape_time is not None
    assert rec.times[-1] <= rec.escape_time <= 5 * t_slow
