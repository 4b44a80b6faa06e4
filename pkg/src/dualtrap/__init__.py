"""Simulation toolkit for a dual-frequency linear Paul trap co-trapping
an atomic ion with a charged nanoparticle: stability charts, time-domain
dynamics, two-particle equilibria, normal modes, and sympathetic-cooling
steady states."""

__version__ = "0.1.0"

from .trap import (TrapConfig, ParticleSpec, StabilityParams, q_param,
                   a_eff_param, secular_frequency,
                   fast_to_slow_stiffness_ratio, approx_stability_check,
                   stability_point)
from .mathieu import (FloquetResult, StabilityDiagram, monodromy,
                      boundary_a_for_q, stability_scan, offset_stable)
from .dynamics import (TwoParticleState, FieldModel, TrajectoryRecord, force,
                       integrate, slow_micromotion_amplitude,
                       escape_threshold, total_energy)
from .equilibrium import (EquilibriumProblem, EquilibriumSolution,
                          VoltageSchedule, JointPairConfig,
                          solve_ion_equilibrium, ion_position_curve,
                          run_schedule)
from .modes import (CoupledOscillator, ModePair, build_matrix, eigenmodes,
                    mu_zero_limit_check, coupling_constant)
from .cooling import (LaserParams, NoiseBudget, SpectrumResult, doppler_rate,
                      recoil_heating, force_psds, response_functions,
                      displacement_psd_and_temperature, lyapunov_covariance)
