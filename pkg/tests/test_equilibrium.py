"""Two-particle equilibria against closed-form force-balance oracles."""

from dataclasses import replace

import numpy as np
import pytest
from scipy.constants import elementary_charge, epsilon_0, pi
from scipy.optimize import brentq

from dualtrap import (EquilibriumProblem, VoltageSchedule,
                      ion_position_curve, presets, run_schedule,
                      solve_ion_equilibrium)
from dualtrap.equilibrium import classify_pair, write_curve_csv
from dualtrap.errors import ConvergenceError

K_E = 1.0 / (4 * pi * epsilon_0)


@pytest.fixture
def base_problem():
    return EquilibriumProblem(ion=presets.reference_ion(),
                              np_position=(0.0, 0.0, -3e-6),
                              np_charge=800)


def _cubic_root(kqq, m, w_z, d):
    """Independent on-axis oracle: solve z (z + d)^2 = kqq/(m w_z^2)."""
    c = kqq / (m * w_z ** 2)
    return brentq(lambda z: z * (z + d) ** 2 - c, 1e-9, 1e-2, xtol=1e-15)


def test_on_axis_solution_matches_cubic_oracle(base_problem):
    # tight explicit tolerance: the oracle comparison is at the nm level
    sol = solve_ion_equilibrium(base_problem, tol=1e-22)
    ion = base_problem.ion
    z_oracle = _cubic_root(base_problem.kqq, ion.mass, ion.omega_sec[2], 3e-6)
    assert sol.ion_position[2] == pytest.approx(z_oracle, abs=1e-9)
    assert abs(sol.ion_position[0]) < 1e-9
    assert abs(sol.ion_position[1]) < 1e-9
    # the published calculation quotes 45.9 um for these parameters
    assert sol.ion_position[2] * 1e6 == pytest.approx(45.9, abs=1.0)
    assert np.all(sol.hessian_eigenvalues > 0)


def test_radial_plane_placement_leaves_ion_near_origin(base_problem):
    for x in (50e-6, -50e-6):
        sol = solve_ion_equilibrium(replace(base_problem,
                                            np_position=(x, 0.0, 0.0)))
        assert np.linalg.norm(sol.ion_position) <= 2e-6


def test_uncharged_neighbor_leaves_pure_harmonic_minimum(base_problem):
    sol = solve_ion_equilibrium(replace(base_problem, np_charge=0))
    assert np.linalg.norm(sol.ion_position) < 1e-12


def test_force_residual_below_tolerance(base_problem):
    from dualtrap.equilibrium import default_force_tol
    sol = solve_ion_equilibrium(base_problem)
    assert np.linalg.norm(sol.residual_force) < default_force_tol(base_problem)


def test_mirror_symmetry_of_radial_scan(base_problem):
    left = solve_ion_equilibrium(replace(base_problem,
                                         np_position=(-40e-6, 0.0, -3e-6)))
    right = solve_ion_equilibrium(replace(base_problem,
                                          np_position=(40e-6, 0.0, -3e-6)))
    mirrored = right.ion_position * np.array([-1.0, 1.0, 1.0])
    assert np.allclose(left.ion_position, mirrored, atol=1e-12)


def test_charge_scaling_of_cubic_constant(base_problem):
    ion = base_problem.ion
    for f in (0.5, 2.0):
        q_np = int(800 * f)
        sol = solve_ion_equilibrium(replace(base_problem, np_charge=q_np),
                                    tol=1e-22)
        kqq = K_E * ion.charge_si * q_np * elementary_charge
        z_oracle = _cubic_root(kqq, ion.mass, ion.omega_sec[2], 3e-6)
        assert sol.ion_position[2] == pytest.approx(z_oracle, abs=1e-9)


def test_large_separation_reduces_to_linear_static_response(base_problem):
    e = (150.0, -80.0, 40.0)
    prob = replace(base_problem, np_position=(0.05, 0.0, 0.0),
                   static_field=e)
    sol = solve_ion_equilibrium(prob)
    ion = base_problem.ion
    expect = np.array([ion.charge_si * ei / (ion.mass * w ** 2)
                       for ei, w in zip(e, ion.omega_sec)])
    assert np.allclose(sol.ion_position, expect, rtol=1e-5, atol=1e-12)


def test_line_scan_peaks_on_axis_and_decays_at_edges(base_problem):
    xs = np.linspace(-65e-6, 65e-6, 27)
    sols = ion_position_curve([(x, 0.0, -3e-6) for x in xs], base_problem)
    z = np.array([s.ion_position[2] for s in sols])
    assert np.argmax(z) == len(xs) // 2          # maximal displacement at x=0
    assert z[0] < 2e-6 and z[-1] < 2e-6          # decayed at the scan edges
    assert all(np.all(s.hessian_eigenvalues > 0) for s in sols)


def test_curve_continuity_guard_fires_on_coarse_branch_jump(base_problem):
    with pytest.raises(ConvergenceError):
        ion_position_curve([(-60e-6, 0.0, -3e-6), (0.0, 0.0, -3e-6)],
                           base_problem, jump_bound=10e-6)


def test_reconstructed_scan_points_match_published_positions(base_problem):
    """The three tabulated configurations: radial placements at 65 and
    35 um on the z = -3 um line, and the on-axis case."""
    bands = {
        (65e-6): ((-1.1e-6, -0.9e-6), (0.0, 4.5e-6)),
        (35e-6): ((-1.9e-6, -1.0e-6), (22e-6, 38e-6)),
        (0.0): ((-0.2e-6, 0.2e-6), (43.1e-6, 48.4e-6)),
    }
    for x_np, (bx, bz) in bands.items():
        sol = solve_ion_equilibrium(replace(base_problem,
                                            np_position=(x_np, 0.0, -3e-6)))
        assert bx[0] <= sol.ion_position[0] <= bx[1]
        assert bz[0] <= sol.ion_position[2] <= bz[1]


def test_schedule_walks_from_xy_pair_to_z_pair():
    cfg = presets.reference_pair_config()
    steps = run_schedule(presets.configuration_swap_schedule(), cfg)
    labels = [s.classification for s in steps]
    assert labels[0] == "xy-pair"
    assert "mixed" in labels
    assert labels[-1] == "z-pair"
    # once the compensation field is off, the pair sits on the axis
    assert abs(steps[-1].np_position[0]) < 1e-7
    assert abs(steps[-1].separation[2]) > 40e-6


def test_identity_schedule_is_stationary():
    cfg = presets.reference_pair_config()
    set_point = presets.configuration_swap_schedule().steps[0]
    twice = VoltageSchedule(steps=(set_point, set_point))
    steps = run_schedule(twice, cfg)
    assert np.allclose(steps[0].ion_position, steps[1].ion_position,
                       atol=1e-12)
    assert np.allclose(steps[0].np_position, steps[1].np_position,
                       atol=1e-12)


def test_raising_endcap_shifts_both_particles_away():
    cfg = presets.reference_pair_config()
    v0 = presets.configuration_swap_schedule().steps[1]
    sched = VoltageSchedule(steps=(v0, (v0[0], v0[1] + 0.2)))
    a, b = run_schedule(sched, cfg)
    assert b.ion_position[2] < a.ion_position[2]
    assert b.np_position[2] < a.np_position[2]


def test_pair_classifier_thresholds():
    assert classify_pair(np.array([1.0, 0.0, 0.1])) == "xy-pair"
    assert classify_pair(np.array([0.1, 0.0, 1.0])) == "z-pair"
    assert classify_pair(np.array([1.0, 0.0, 1.0])) == "mixed"


def test_curve_csv_units_are_micrometres(tmp_path, base_problem):
    np_positions = [(-10e-6, 0.0, -3e-6)]
    sols = ion_position_curve(np_positions, base_problem)
    path = tmp_path / "curve.csv"
    write_curve_csv(np_positions, sols, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "np_x,np_y,np_z,ion_x,ion_y,ion_z,converged"
    row = [float(v) for v in lines[1].split(",")]
    assert row[0] == pytest.approx(-10.0)
    assert row[6] == 1.0


def test_repulsive_configuration_enforced():
    with pytest.raises(ValueError):
        EquilibriumProblem(ion=presets.reference_ion(),
                           np_position=(0, 0, -3e-6), np_charge=-800)
