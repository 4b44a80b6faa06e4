"""Reference parameter set for the ion + nanoparticle co-trapping system.

Two nanoparticle masses circulate for this system (2e-17 kg from the
co-trapping characterization, 1.6e-17 kg from the mode/cooling
analysis); both are shipped as named variants and the discrepancy is
deliberately left visible.  Stability and trajectory work defaults to
"nominal", mode and cooling work to "light".
"""

from __future__ import annotations

from scipy.constants import elementary_charge, pi

from .cooling import LaserParams, NoiseBudget, doppler_rate, recoil_heating
from .equilibrium import JointPairConfig, VoltageSchedule
from .modes import CoupledOscillator
from .trap import ParticleSpec, TrapConfig

# geometry and drives
R0 = 0.9e-3
KAPPA_GEO = 0.93
OMEGA_SLOW = 2.0 * pi * 7e3
OMEGA_FAST = 2.0 * pi * 17.5e6
V_SLOW = 75.0            # 150 Vpp
V_FAST = 1250.0          # 2.5 kVpp
V_ENDCAP = 56.5

# particles
ION_CHARGE = 1
ION_MASS = 6.64e-26              # 40 amu ion
ION_MASS_ROUNDED = 6.6e-26       # two-digit variant
NP_CHARGE = 800
NP_MASS_NOMINAL = 2e-17
NP_MASS_LIGHT = 1.6e-17

# effective secular frequencies (rad/s)
ION_OMEGA_SEC = (2.0 * pi * 4e6, 2.0 * pi * 4e6, 2.0 * pi * 0.8e6)
NP_OMEGA_SEC = (2.0 * pi * 1.5e3, 2.0 * pi * 1.5e3, 2.0 * pi * 1e3)

# electrode-to-field plumbing (uniform-field model); the axial gain is
# negative: raising the driven (+z) endcap pushes particles toward -z
COMP_GAIN = 1.0e3            # (V/m) per compensation volt
AXIAL_FIELD_GAIN = -2.0e2    # (V/m) per endcap volt of asymmetry

# Doppler laser
LASER_WAVELENGTH = 397e-9
LASER_LINEWIDTH = 1.0 / 7.1e-9          # rad/s
LASER_SATURATION = 0.5

# nanoparticle noise channel (background gas dominated)
NP_GAMMA = 2.0 * pi * 69e-9
NP_HEATING = 2.8e-26                    # J/s


def _axial_gain() -> float:
    """Calibrated so the reference ion sits at 800 kHz axially at the
    reference endcap voltage."""
    w_z = ION_OMEGA_SEC[2]
    return (w_z ** 2 * ION_MASS * R0 ** 2
            / (ION_CHARGE * elementary_charge * V_ENDCAP))


def reference_trap(**overrides) -> TrapConfig:
    params = dict(r0=R0, kappa_geo=KAPPA_GEO, omega_slow=OMEGA_SLOW,
                  omega_fast=OMEGA_FAST, v_slow=V_SLOW, v_fast=V_FAST,
                  v_endcap=V_ENDCAP, v_comp=(0.0, 0.0), comp_gain=COMP_GAIN,
                  axial_gain=_axial_gain())
    params.update(overrides)
    return TrapConfig(**params)


def reference_ion(variant: str = "default") -> ParticleSpec:
    mass = {"default": ION_MASS, "rounded": ION_MASS_ROUNDED}[variant]
    return ParticleSpec(charge=ION_CHARGE, mass=mass, omega_sec=ION_OMEGA_SEC)


def reference_nanoparticle(variant: str = "nominal") -> ParticleSpec:
    mass = {"nominal": NP_MASS_NOMINAL, "light": NP_MASS_LIGHT}[variant]
    return ParticleSpec(charge=NP_CHARGE, mass=mass, omega_sec=NP_OMEGA_SEC)


def reference_laser(detuning: float | None = None) -> LaserParams:
    """Red-detuned by half a linewidth unless told otherwise."""
    if detuning is None:
        detuning = -0.5 * LASER_LINEWIDTH
    return LaserParams(wavelength=LASER_WAVELENGTH, linewidth=LASER_LINEWIDTH,
                       saturation=LASER_SATURATION, detuning=detuning)


def reference_noise(laser: LaserParams | None = None,
                    m_ion: float = ION_MASS) -> NoiseBudget:
    """Ion channel from Doppler formulas, nanoparticle channel from the
    measured gas-damping values."""
    lp = laser if laser is not None else reference_laser()
    return NoiseBudget(heating_ion=recoil_heating(lp, m_ion),
                       heating_np=NP_HEATING,
                       gamma_ion=doppler_rate(lp, m_ion),
                       gamma_np=NP_GAMMA)


def mass_ratio(np_variant: str = "light") -> float:
    mass = {"nominal": NP_MASS_NOMINAL, "light": NP_MASS_LIGHT}[np_variant]
    return ION_MASS / mass


def reference_oscillator(axis: str, gamma_ion: float = 0.0,
                         gamma_np: float = 0.0,
                         np_variant: str = "light") -> CoupledOscillator:
    """Coupled-oscillator parameters of one axis; the coupling follows
    the radial/axial sign convention with |j| = omega_z_ion^2."""
    w_z_ion = ION_OMEGA_SEC[2]
    if axis in ("x", "y"):
        return CoupledOscillator(
            omega_ion=ION_OMEGA_SEC[0], omega_np=NP_OMEGA_SEC[0],
            coupling_j=w_z_ion ** 2, mass_ratio_mu=mass_ratio(np_variant),
            gamma_ion=gamma_ion, gamma_np=gamma_np)
    if axis == "z":
        return CoupledOscillator(
            omega_ion=w_z_ion, omega_np=NP_OMEGA_SEC[2],
            coupling_j=-2.0 * w_z_ion ** 2,
            mass_ratio_mu=mass_ratio(np_variant),
            gamma_ion=gamma_ion, gamma_np=gamma_np)
    raise ValueError(f"unknown axis {axis!r}")


def reference_pair_config() -> JointPairConfig:
    return JointPairConfig(ion=reference_ion(),
                           nanoparticle=reference_nanoparticle("nominal"),
                           comp_gain=COMP_GAIN,
                           axial_field_gain=AXIAL_FIELD_GAIN,
                           v_endcap_ref=V_ENDCAP)


def configuration_swap_schedule() -> VoltageSchedule:
    """Four-step compensation/endcap sequence that walks the pair from a
    radially separated to an axially separated configuration.

    The compensation steps park the nanoparticle near 55, 35, 15 and
    0 um radially; the endcap steps keep it a few um below center and
    creep upward, so the sequence crosses the mixed regime on its way
    from an xy pair to a z pair.
    """
    return VoltageSchedule(steps=(
        ((0.762, 0.0), V_ENDCAP + 0.0924),
        ((0.485, 0.0), V_ENDCAP + 0.1024),
        ((0.208, 0.0), V_ENDCAP + 0.1124),
        ((0.000, 0.0), V_ENDCAP + 0.1224),
    ))
