"""Verification scenarios with pinned reference values and tolerances.

Each criterion function exercises one slice of the toolkit against the
reference parameter set and returns a :class:`CriterionResult` with one
detail line per sub-check.  The pytest acceptance module asserts these;
the CLI ``reproduce-all`` subcommand prints them and sets its exit code.

Criterion 2 contains a sub-check that is expected to fail: the
experimentally measured expulsion threshold at q = 0.55 sits 0.027
below the ideal Floquet boundary in the offset parameter, wider than
the 0.02 band the check demands.  The check is kept as stated rather
than loosened; see the failure text it produces.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import Boltzmann, elementary_charge, pi

from . import cooling, dynamics, equilibrium, mathieu, modes, presets, trap
from ._kernels import mathieu_monodromy

SEED_DEFAULT = 20260315


@dataclass
class CriterionResult:
    name: str
    passed: bool
    details: list[str] = field(default_factory=list)
    runtime_s: float = 0.0

    def check(self, ok: bool, text: str) -> bool:
        self.details.append(f"{'pass' if ok else 'FAIL'}: {text}")
        if not ok:
            self.passed = False
        return ok


def _finish(result: CriterionResult, t0: float) -> CriterionResult:
    result.runtime_s = time.perf_counter() - t0
    return result


def criterion_1_stability_parameters() -> CriterionResult:
    """q of the ion on the fast drive and the nanoparticle's slow-drive
    secular frequency, from the tabulated parameter set."""
    t0 = time.perf_counter()
    res = CriterionResult("1 stability parameters", True)
    cfg = presets.reference_trap()
    ion = presets.reference_ion("rounded")
    nano = presets.reference_nanoparticle("nominal")
    q_i = trap.q_param(cfg, ion, "fast")
    res.check(abs(q_i - 0.55) <= 0.03,
              f"ion fast-drive q = {q_i:.4f} vs 0.55 +- 0.03")
    f_np = trap.secular_frequency(cfg, nano, "slow") / (2 * pi)
    res.check(abs(f_np - 1.5e3) <= 0.15 * 1.5e3,
              f"nanoparticle secular frequency = {f_np:.1f} Hz vs 1500 Hz +- 15%")
    return _finish(res, t0)


def criterion_2_mathieu_boundary(n_trace: int = 200) -> CriterionResult:
    """Boundary trace versus the small-q asymptote, plus the distance of
    the measured expulsion-threshold point from the computed boundary."""
    t0 = time.perf_counter()
    res = CriterionResult("2 mathieu boundary", True)
    q_values = np.linspace(0.02, 0.6, n_trace)
    edges = np.array([mathieu.boundary_a_for_q(q, "upper", tol=1e-7)
                      for q in q_values])
    small = q_values <= 0.3
    rel = np.abs(edges[small] - 0.5 * q_values[small] ** 2) / (0.5 * q_values[small] ** 2)
    res.check(float(np.max(rel)) <= 0.10,
              f"small-q edge vs q^2/2: worst deviation {np.max(rel) * 100:.2f}% "
              f"over q <= 0.3 (limit 10%)")

    # measured expulsion threshold: published q = 0.55 together with the
    # offset parameter of a 260 Vpp slow amplitude (130 V zero-to-peak)
    cfg = replace(presets.reference_trap(), v_slow=130.0)
    a_thr = trap.a_eff_param(cfg, presets.reference_ion())
    q_thr = 0.55
    edge = mathieu.boundary_a_for_q(q_thr, "upper", tol=1e-7)
    dist = abs(abs(a_thr) - edge)
    res.check(dist <= 0.02,
              f"threshold point (q={q_thr}, a={a_thr:.4f}) sits {dist:.4f} "
              f"from the computed edge {edge:.4f} (demanded <= 0.02; the "
              f"ideal boundary is genuinely 23% above the measured "
              f"threshold, so this gap cannot close without degrading the "
              f"boundary itself)")
    return _finish(res, t0)


def _verdict_by_trajectory(a: float, q: float, cfg_base,
                           fast_periods: int = 2000) -> bool:
    """True (bounded) / False (escaped) from time integration.

    The fast amplitude realizes q, the slow amplitude frozen near phase
    zero (drive frequency ~1e-3 rad/s) realizes a static offset |a|;
    negative offsets are probed along y, where the quadrupole sign flips.
    """
    ion = presets.reference_ion()
    scale = ion.mass * cfg_base.r0 ** 2 * cfg_base.omega_fast ** 2 / ion.charge_si
    v_fast = q * scale / (2.0 * cfg_base.kappa_geo)
    v_slow = abs(a) * scale / (4.0 * cfg_base.kappa_geo)
    cfg = replace(cfg_base, v_fast=v_fast, v_slow=v_slow,
                  omega_slow=1e-3, v_endcap=0.0)
    f = dynamics.FieldModel(trap=cfg, particles=(ion,), include_coulomb=False)
    axis = 0 if a >= 0 else 1
    pos = np.zeros((1, 3))
    pos[0, axis] = 1e-6
    t_fast = 2.0 * pi / cfg.omega_fast
    rec = dynamics.integrate(
        dynamics.TwoParticleState(positions=pos, velocities=np.zeros((1, 3))),
        f, dt=t_fast / 200.0, t_end=fast_periods * t_fast,
        sample_every=10 ** 9)
    return not rec.escape_flag


def criterion_3_floquet_equivalence(seed: int = SEED_DEFAULT,
                                    n_points: int = 50) -> CriterionResult:
    """Bounded/escape verdicts from trajectories against monodromy
    verdicts on random (a, q) points away from the boundary."""
    t0 = time.perf_counter()
    res = CriterionResult("3 dynamics-floquet equivalence", True)
    rng = np.random.default_rng(seed)
    cfg_base = presets.reference_trap()
    points = []
    while len(points) < n_points:
        q = rng.uniform(0.05, 0.88)
        a = rng.uniform(-0.3, 0.3)
        near = (mathieu.monodromy(a - 0.005, q).stable
                != mathieu.monodromy(a + 0.005, q).stable)
        if not near:
            points.append((a, q))
    agree = 0
    for a, q in points:
        floquet = mathieu.monodromy(a, q).stable
        traj = _verdict_by_trajectory(a, q, cfg_base)
        agree += int(floquet == traj)
    res.check(agree == n_points,
              f"verdict agreement {agree}/{n_points} on seeded random points "
              f"(margin 0.005 in a excluded)")
    return _finish(res, t0)


def criterion_4_micromotion() -> CriterionResult:
    """Slow micromotion of a displaced particle: q/2 amplitude relation
    radially, and strict growth with axial offset once the slow field
    leaks onto the trap axis."""
    t0 = time.perf_counter()
    res = CriterionResult("4 micromotion", True)

    # (a) nanoparticle on its own drive, displaced by a compensation field
    cfg = replace(presets.reference_trap(), v_fast=0.0, v_endcap=0.0,
                  v_comp=(0.2458, 0.0))
    nano = presets.reference_nanoparticle("nominal")
    q_slow = trap.q_param(cfg, nano, "slow")
    f = dynamics.FieldModel(trap=cfg, particles=(nano,), include_coulomb=False)
    t_slow = 2.0 * pi / cfg.omega_slow
    # static displacement estimate, to start near the driven equilibrium
    e_x = cfg.comp_gain * cfg.v_comp[0]
    w_sec = trap.secular_frequency(cfg, nano, "slow")
    x_bar = nano.charge_si * e_x / (nano.mass * w_sec ** 2)
    pos = np.array([[x_bar * (1.0 - 0.5 * q_slow), 0.0, 0.0]])
    rec = dynamics.integrate(
        dynamics.TwoParticleState(positions=pos, velocities=np.zeros((1, 3))),
        f, dt=t_slow / 2000.0, t_end=24 * t_slow, sample_every=10)
    x_mean = float(np.mean(rec.axis(0, "x")))
    amp = dynamics.slow_micromotion_amplitude(rec, "x", cfg.omega_slow)
    expect = 0.5 * q_slow * abs(x_mean)
    res.check(abs(amp - expect) <= 0.10 * expect,
              f"radial micromotion amplitude {amp * 1e6:.3f} um vs "
              f"(q/2)*offset = {expect * 1e6:.3f} um (10% band)")

    # null case: no static offset -> amplitude at the drive is tiny
    pos0 = np.zeros((1, 3))
    cfg0 = replace(cfg, v_comp=(0.0, 0.0))
    f0 = dynamics.FieldModel(trap=cfg0, particles=(nano,), include_coulomb=False)
    rec0 = dynamics.integrate(
        dynamics.TwoParticleState(positions=pos0, velocities=np.zeros((1, 3))),
        f0, dt=t_slow / 2000.0, t_end=24 * t_slow, sample_every=10)
    amp0 = dynamics.slow_micromotion_amplitude(rec0, "x", cfg0.omega_slow)
    res.check(amp0 < 0.01 * amp,
              f"null-position amplitude {amp0:.2e} m < 1% of offset case")

    # (b) axial leakage: micromotion grows strictly with axial position
    ion = presets.reference_ion()
    cfg_ax = presets.reference_trap()
    amps = []
    t_fast = 2.0 * pi / cfg_ax.omega_fast
    for z_um in (5e-6, 10e-6, 15e-6, 20e-6):
        e_z = ion.mass * ion.omega_sec[2] ** 2 * z_um / ion.charge_si
        f_ax = dynamics.FieldModel(trap=cfg_ax, particles=(ion,),
                                   include_coulomb=False, axial_rf_gain=0.02,
                                   extra_static_field=(0.0, 0.0, e_z))
        rec_ax = dynamics.integrate(
            dynamics.TwoParticleState(positions=np.array([[0.0, 0.0, z_um]]),
                                      velocities=np.zeros((1, 3))),
            f_ax, dt=t_fast / 200.0, t_end=12 * 2.0 * pi / cfg_ax.omega_slow,
            sample_every=5000)
        amps.append(dynamics.slow_micromotion_amplitude(rec_ax, "z",
                                                        cfg_ax.omega_slow))
    grows = all(b > a for a, b in zip(amps, amps[1:]))
    res.check(grows,
              "axial micromotion amplitudes strictly increasing: "
              + ", ".join(f"{a * 1e9:.1f} nm" for a in amps))
    return _finish(res, t0)


def criterion_5_equilibrium() -> CriterionResult:
    """Ion equilibrium for an on-axis nanoparticle 3 um below center,
    and near-origin behaviour for radial-plane placements."""
    t0 = time.perf_counter()
    res = CriterionResult("5 two-particle equilibrium", True)
    ion = presets.reference_ion()
    prob = equilibrium.EquilibriumProblem(
        ion=ion, np_position=(0.0, 0.0, -3e-6),
        np_charge=presets.NP_CHARGE)
    sol = equilibrium.solve_ion_equilibrium(prob)
    z_um = sol.ion_position[2] * 1e6
    res.check(abs(z_um - 45.9) <= 1.0,
              f"on-axis ion position z = {z_um:.3f} um vs 45.9 +- 1 um")
    cubic = (equilibrium.COULOMB_K * ion.charge_si
             * presets.NP_CHARGE * elementary_charge
             / (ion.mass * ion.omega_sec[2] ** 2))
    z = sol.ion_position[2]
    resid = abs(z * (z + 3e-6) ** 2 - cubic) / cubic
    res.check(resid < 1e-3,
              f"on-axis cubic force-balance residual {resid:.2e} (< 1e-3)")
    for x_np in (50e-6, -50e-6):
        prob_r = replace(prob, np_position=(x_np, 0.0, 0.0))
        sol_r = equilibrium.solve_ion_equilibrium(prob_r)
        dist = np.linalg.norm(sol_r.ion_position) * 1e6
        res.check(dist <= 2.0,
                  f"nanoparticle at x = {x_np * 1e6:+.0f} um: ion "
                  f"{dist:.2f} um from origin (<= 2 um)")
    return _finish(res, t0)


def criterion_6_modes() -> CriterionResult:
    """Eigenfrequency table, eigenvector ratios and mu -> 0 closed forms."""
    t0 = time.perf_counter()
    res = CriterionResult("6 normal modes", True)
    table = {("x", "in"): 3.92e6, ("x", "out"): 1.5e3,
             ("z", "in"): 1.0e3, ("z", "out"): 1.38e6}
    pairs = {axis: modes.eigenmodes(presets.reference_oscillator(axis))
             for axis in ("x", "z")}
    for (axis, which), ref in table.items():
        f = pairs[axis].freq_hz(which)
        res.check(abs(f - ref) <= 0.005 * ref,
                  f"{axis} {which}-phase mode {f:.6g} Hz vs {ref:.6g} Hz (0.5%)")
    r_x = abs(pairs["x"].evec_out[0] / pairs["x"].evec_out[1])
    res.check(abs(r_x - 0.04) <= 0.05 * 0.04,
              f"x out-of-phase displacement ratio {r_x:.4f} vs 0.04 (5%)")
    r_z = abs(pairs["z"].evec_in[0] / pairs["z"].evec_in[1])
    res.check(abs(r_z - 0.67) <= 0.05 * 0.67,
              f"z in-phase displacement ratio {r_z:.4f} vs 0.67 (5%)")
    worst = 0.0
    for axis in ("x", "z"):
        report = modes.mu_zero_limit_check(presets.reference_oscillator(axis))
        worst = max(worst, *report.deviations)
    res.check(worst < 1e-4,
              f"mu->0 closed-form deviation {worst:.2e} (< 1e-4, normalized "
              f"to the axis frequency scale)")
    return _finish(res, t0)


def criterion_7_cooling() -> CriterionResult:
    """Doppler rate, recoil heating, and steady-state temperatures by
    both methods."""
    t0 = time.perf_counter()
    res = CriterionResult("7 sympathetic cooling", True)
    lp = presets.reference_laser()
    m_ion = presets.ION_MASS
    m_np = presets.NP_MASS_LIGHT
    masses = (m_ion, m_np)

    gamma_d = cooling.doppler_rate(lp, m_ion)
    res.check(abs(gamma_d - 2 * pi * 10e3) <= 0.10 * 2 * pi * 10e3,
              f"doppler rate {gamma_d / (2 * pi):.0f} Hz*2pi vs 10 kHz (10%)")
    edot_i = cooling.recoil_heating(lp, m_ion)
    res.check(abs(edot_i - 3.8e-22) <= 0.15 * 3.8e-22,
              f"recoil heating {edot_i:.3e} J/s vs 3.8e-22 (15%)")

    nb = presets.reference_noise(lp)
    # uncoupled nanoparticle: closed form Edot/(gamma kB)
    t_closed = nb.heating_np / (nb.gamma_np * Boltzmann)
    osc0 = modes.CoupledOscillator(
        omega_ion=presets.ION_OMEGA_SEC[0], omega_np=presets.NP_OMEGA_SEC[0],
        coupling_j=0.0, mass_ratio_mu=presets.mass_ratio(),
        gamma_ion=nb.gamma_ion, gamma_np=nb.gamma_np)
    t_by = {m: cooling.displacement_psd_and_temperature(osc0, nb, masses, m)
            for m in ("lyapunov", "spectral")}
    t_unc = t_by["lyapunov"].t_eff_np
    res.check(abs(t_unc - 4680.0) <= 0.02 * 4680.0,
              f"uncoupled T_np = {t_unc:.1f} K vs 4680 K (2%); "
              f"closed form {t_closed:.1f} K")
    res.check(abs(t_by["spectral"].t_eff_np / t_unc - 1.0) <= 0.02,
              f"uncoupled spectral/lyapunov ratio "
              f"{t_by['spectral'].t_eff_np / t_unc:.5f} (2%)")

    refs = {"x": (2280.0, 0.15), "z": (17.0, 0.20)}
    for axis, (ref, tol) in refs.items():
        osc = presets.reference_oscillator(axis, gamma_ion=nb.gamma_ion,
                                           gamma_np=nb.gamma_np)
        t_l = cooling.displacement_psd_and_temperature(osc, nb, masses,
                                                       "lyapunov").t_eff_np
        t_s = cooling.displacement_psd_and_temperature(osc, nb, masses,
                                                       "spectral").t_eff_np
        res.check(abs(t_l - ref) <= tol * ref,
                  f"{axis}-axis T_np = {t_l:.1f} K vs {ref:.0f} K "
                  f"({tol * 100:.0f}%)")
        res.check(abs(t_s / t_l - 1.0) <= 0.02,
                  f"{axis}-axis spectral/lyapunov ratio {t_s / t_l:.5f} (2%)")
    return _finish(res, t0)


def criterion_8_properties(seed: int = SEED_DEFAULT,
                           workdir=None) -> CriterionResult:
    """Cross-cutting property suite: symplectic determinant, energy
    drift, third law, minimum certification, covariance positivity,
    output determinism across worker counts."""
    t0 = time.perf_counter()
    res = CriterionResult("8 property suite", True)
    rng = np.random.default_rng(seed)

    # Wronskian of the monodromy matrix
    worst = 0.0
    for _ in range(60):
        a = rng.uniform(-0.5, 0.5)
        q = rng.uniform(0.0, 0.9)
        m11, m12, m21, m22 = mathieu_monodromy(a, q, 4096)
        worst = max(worst, abs(m11 * m22 - m12 * m21 - 1.0))
    res.check(worst <= 1e-9, f"monodromy determinant drift {worst:.1e} (<= 1e-9)")

    # energy conservation, drives off, Coulomb on
    drift = _energy_drift_run()
    res.check(drift <= 1e-6, f"energy drift {drift:.2e} over 1e6 steps (<= 1e-6)")

    # Newton's third law in the pair force (drives and DC terms off, so
    # force() returns the Coulomb term alone)
    ion = presets.reference_ion()
    nano = presets.reference_nanoparticle("nominal")
    cfg = replace(presets.reference_trap(), v_slow=0.0, v_fast=0.0,
                  v_endcap=0.0)
    f_pair = dynamics.FieldModel(trap=cfg, particles=(ion, nano),
                                 include_coulomb=True)
    worst3 = 0.0
    for _ in range(20):
        pos = rng.uniform(-40e-6, 40e-6, size=(2, 3))
        state = dynamics.TwoParticleState(positions=pos,
                                          velocities=np.zeros((2, 3)))
        pair = dynamics.force(state, f_pair, 1e-7)
        imbalance = np.linalg.norm(pair[0] + pair[1]) / np.linalg.norm(pair[0])
        worst3 = max(worst3, imbalance)
    res.check(worst3 <= 1e-12,
              f"third-law imbalance {worst3:.1e} of the pair force (rounding)")

    # Hessian positive definiteness along an equilibrium curve
    xs = np.linspace(-60e-6, 60e-6, 25)
    prob = equilibrium.EquilibriumProblem(ion=ion, np_position=(0, 0, -3e-6),
                                          np_charge=presets.NP_CHARGE)
    sols = equilibrium.ion_position_curve(
        [(x, 0.0, -3e-6) for x in xs], prob)
    min_eig = min(float(s.hessian_eigenvalues[0]) for s in sols)
    res.check(min_eig > 0.0,
              f"Hessian positive definite at all {len(sols)} curve points "
              f"(min eigenvalue {min_eig:.3e} N/m)")

    # Lyapunov covariance positivity
    nb = presets.reference_noise()
    ok_psd = True
    for axis in ("x", "z"):
        osc = presets.reference_oscillator(axis, gamma_ion=nb.gamma_ion,
                                           gamma_np=nb.gamma_np)
        sigma = cooling.lyapunov_covariance(osc, nb,
                                            (presets.ION_MASS,
                                             presets.NP_MASS_LIGHT))
        scale = np.sqrt(np.diag(sigma))
        balanced = sigma / np.outer(scale, scale)
        eigs = np.linalg.eigvalsh(balanced)
        ok_psd &= eigs.min() >= -1e-12
    res.check(ok_psd, "stationary covariance positive semidefinite (both axes)")

    # determinism of CSV output across worker counts
    if workdir is not None:
        from . import cli
        blobs = []
        for i, workers in enumerate((1, 2)):
            out = workdir / f"det{i}"
            code = cli.main(["stability-scan", "--out", str(out),
                             "--seed", str(seed), "--workers", str(workers),
                             "--q-max", "0.6", "--a-max", "0.2",
                             "--resolution", "21", "11"])
            if code != 0:
                raise RuntimeError("stability-scan failed during determinism check")
            blobs.append((out / "stability_scan.csv").read_bytes()
                         + (out / "stability_boundary.csv").read_bytes())
        res.check(blobs[0] == blobs[1],
                  "stability-scan CSVs byte-identical for workers=1 and 2")
    return _finish(res, t0)


def _energy_drift_run() -> float:
    """Max relative energy drift of the undriven ion+nanoparticle pair
    over 1e6 fixed steps."""
    ion = presets.reference_ion()
    nano = presets.reference_nanoparticle("nominal")
    cfg = replace(presets.reference_trap(), v_slow=0.0, v_fast=0.0)
    pair_cfg = equilibrium.JointPairConfig(
        ion=ion, nanoparticle=nano, comp_gain=cfg.comp_gain,
        axial_field_gain=0.0, v_endcap_ref=cfg.v_endcap)
    sched = equilibrium.VoltageSchedule(steps=(((0.0, 0.0), cfg.v_endcap),))
    step = equilibrium.run_schedule(sched, pair_cfg)[0]

    f = dynamics.FieldModel(trap=cfg, particles=(ion, nano),
                            include_coulomb=True)
    # both particles near the axial equilibrium, slightly displaced; the
    # exact axial frequencies do not matter here, only that the total
    # energy of the closed system stays put
    pos = np.array([step.ion_position, step.np_position])
    pos[0, 2] += 1e-6
    pos[1, 2] -= 0.2e-6
    state = dynamics.TwoParticleState(positions=pos,
                                      velocities=np.zeros((2, 3)))
    dt = 2.0 * pi / ion.omega_sec[2] / 800.0
    rec = dynamics.integrate(state, f, dt=dt, t_end=1e6 * dt, sample_every=2000)
    energies = np.array([
        dynamics.total_energy(
            dynamics.TwoParticleState(positions=rec.positions[i],
                                      velocities=rec.velocities[i],
                                      time=rec.times[i]), f)
        for i in range(len(rec.times))])
    return float(np.max(np.abs(energies - energies[0])) / abs(energies[0]))


def run_all(seed: int = SEED_DEFAULT, workdir=None) -> list[CriterionResult]:
    return [
        criterion_1_stability_parameters(),
        criterion_2_mathieu_boundary(),
        criterion_3_floquet_equivalence(seed),
        criterion_4_micromotion(),
        criterion_5_equilibrium(),
        criterion_6_modes(),
        criterion_7_cooling(),
        criterion_8_properties(seed, workdir),
    ]
