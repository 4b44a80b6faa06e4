"""Trap/particle parameters and closed-form stability algebra.

Conventions used throughout the package:

* strict SI units internally (rad/s, V, kg, m); drive voltages are
  zero-to-peak amplitudes, never peak-to-peak,
* particle charges are stored as integer multiples of the elementary
  charge and converted to coulombs at use sites,
* ``a_eff`` keeps the sign of the slow amplitude; report ``abs(a_eff)``
  when mimicking chart-style output.

The dimensionless drive-strength parameters follow the usual quadrupole
forms  q = 2*kappa*Q*V / (m*r0^2*Omega^2)  and, for the low-frequency
field acting as a slowly varying offset on the high-frequency problem,
a_eff = 4*kappa*Q*V_slow / (m*r0^2*Omega_fast^2).  Note that a_eff mixes
the slow amplitude with the fast frequency.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.constants import elementary_charge

from .errors import PseudopotentialValidityWarning

TWO_SQRT_TWO = 2.0 * math.sqrt(2.0)

#: drive selector values accepted by the functions below
DRIVES = ("slow", "fast")


@dataclass(frozen=True)
class TrapConfig:
    """Electrode geometry, drive settings and DC voltages of the trap.

    Parameters
    ----------
    r0 : float
        Characteristic electrode-to-axis distance (m).
    kappa_geo : float
        Geometric efficiency factor of the radial quadrupole, in (0, 1].
    omega_slow, omega_fast : float
        Angular drive frequencies (rad/s), ``omega_fast > omega_slow``.
    v_slow, v_fast : float
        Zero-to-peak drive amplitudes (V), non-negative.
    v_endcap : float
        DC endcap voltage (V) setting the axial curvature.
    v_comp : tuple of float
        Compensation-electrode voltages (V); mapped to a uniform static
        field in the radial plane through ``comp_gain``.
    comp_gain : float
        Field produced per compensation volt ((V/m)/V).
    axial_gain : float
        Dimensionless calibration constant relating endcap voltage to
        axial curvature: omega_z^2 = axial_gain * Q * v_endcap / (m * r0^2).
    """

    r0: float
    kappa_geo: float
    omega_slow: float
    omega_fast: float
    v_slow: float
    v_fast: float
    v_endcap: float = 0.0
    v_comp: tuple[float, float] = (0.0, 0.0)
    comp_gain: float = 0.0
    axial_gain: float = 0.0

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")
        if not 0.0 < self.kappa_geo <= 1.0:
            raise ValueError("kappa_geo must lie in (0, 1]")
        if not self.omega_fast > self.omega_slow > 0.0:
            raise ValueError("need omega_fast > omega_slow > 0")
        if self.v_slow < 0.0 or self.v_fast < 0.0:
            raise ValueError("drive amplitudes must be non-negative")
        object.__setattr__(self, "v_comp", tuple(self.v_comp))

    def drive(self, which: str) -> tuple[float, float]:
        """Return (amplitude V, angular frequency rad/s) of one drive."""
        if which == "slow":
            return self.v_slow, self.omega_slow
        if which == "fast":
            return self.v_fast, self.omega_fast
        raise ValueError(f"unknown drive {which!r}, expected 'slow' or 'fast'")


@dataclass(frozen=True)
class ParticleSpec:
    """One trapped object: charge (units of e), mass (kg), and optional
    per-axis effective harmonic frequencies (rad/s) used by the
    pseudopotential-picture solvers."""

    charge: int
    mass: float
    omega_sec: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.charge == 0:
            raise ValueError("a trapped particle needs charge != 0")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.omega_sec is not None:
            if len(self.omega_sec) != 3 or any(w <= 0 for w in self.omega_sec):
                raise ValueError("omega_sec needs three positive components")
            object.__setattr__(self, "omega_sec", tuple(self.omega_sec))

    @property
    def charge_si(self) -> float:
        """Charge in coulombs."""
        return self.charge * elementary_charge


@dataclass(frozen=True)
class StabilityParams:
    """An (a_eff, q) point of the slow-offset stability chart."""

    a_eff: float
    q: float

    def __post_init__(self):
        if self.q < 0:
            raise ValueError("q must be non-negative")


def q_param(trap: TrapConfig, p: ParticleSpec, which_drive: str) -> float:
    """Dimensionless q of ``p`` for the selected drive.

    q = 2*kappa*Q*V / (m*r0^2*Omega^2) with V, Omega taken from the
    selected drive.  Positive by construction for non-negative V.
    """
    v, omega = trap.drive(which_drive)
    if omega == 0.0 or trap.r0 == 0.0:
        raise ZeroDivisionError("drive frequency and r0 must be non-zero")
    return (2.0 * trap.kappa_geo * abs(p.charge_si) * v
            / (p.mass * trap.r0 ** 2 * omega ** 2))


def a_eff_param(trap: TrapConfig, p: ParticleSpec) -> float:
    """Effective static-offset parameter of the slow field.

    a_eff = 4*kappa*Q*V_slow / (m*r0^2*Omega_fast^2).  The slow
    amplitude sits in the numerator but the *fast* frequency in the
    denominator; this is what distinguishes the dual-drive chart from a
    single-frequency one.  Sign follows sign(Q*V_slow).
    """
    if trap.omega_fast == 0.0:
        raise ZeroDivisionError("omega_fast must be non-zero")
    return (4.0 * trap.kappa_geo * p.charge_si * trap.v_slow
            / (p.mass * trap.r0 ** 2 * trap.omega_fast ** 2))


def secular_frequency(trap: TrapConfig, p: ParticleSpec, which_drive: str,
                      q_guard: float = 0.9) -> float:
    """Radial secular angular frequency under a single drive,
    omega = Omega*q/(2*sqrt(2)).

    Emits :class:`PseudopotentialValidityWarning` (not an error) when
    q >= ``q_guard``; the lowest-order pseudopotential formula loses
    accuracy well before the stability edge near q ~ 0.908.
    """
    q = q_param(trap, p, which_drive)
    if q >= q_guard:
        warnings.warn(
            f"q = {q:.3f} >= {q_guard}: pseudopotential approximation "
            "is out of its comfort zone",
            PseudopotentialValidityWarning,
            stacklevel=2,
        )
    _, omega = trap.drive(which_drive)
    return omega * q / TWO_SQRT_TWO


def fast_to_slow_stiffness_ratio(trap: TrapConfig) -> float:
    """Ratio of a particle's secular frequency in the fast field alone to
    that in the slow field alone: (Omega_slow/Omega_fast)*(V_fast/V_slow).

    Particle properties cancel, so the ratio is a trap property.  The
    squared ratio compares the two pseudopotential stiffnesses.
    """
    if trap.v_slow == 0.0:
        raise ZeroDivisionError("v_slow must be non-zero for the ratio")
    return (trap.omega_slow / trap.omega_fast) * (trap.v_fast / trap.v_slow)


def approx_stability_check(sp: StabilityParams) -> bool:
    """Small-q co-trapping condition |a_eff| < q^2/2.

    This is the leading-order approximation to the chart edge; use the
    Floquet machinery in :mod:`dualtrap.mathieu` for precision work.
    """
    return abs(sp.a_eff) < 0.5 * sp.q ** 2


def stability_point(trap: TrapConfig, p: ParticleSpec) -> StabilityParams:
    """(a_eff, q_fast) pair of a particle in the dual-frequency trap."""
    return StabilityParams(a_eff=a_eff_param(trap, p),
                           q=q_param(trap, p, "fast"))
