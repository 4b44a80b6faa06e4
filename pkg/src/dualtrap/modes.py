"""Normal modes of the Coulomb-coupled ion + nanoparticle oscillator.

Per axis the linearized system is

    x_i''  = (-w_i^2 + j) x_i  - j x_np       - g_i x_i'
    x_np'' = -mu j x_i + (-w_np^2 + mu j) x_np - g_np x_np'

with mu = m_i/m_np and coupling constant j = k_e Q_i Q_np/(4 pi eps0
d^3 m_i) on the radial axes and -2x that value on the crystal axis.
Eigenfrequencies/eigenvectors come from the 4x4 first-order matrix; the
"in" mode is the one whose two displacement components share a sign.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import epsilon_0, pi

from .errors import DegenerateModeWarning
from .trap import ParticleSpec

COULOMB_K = 1.0 / (4.0 * pi * epsilon_0)


@dataclass(frozen=True)
class CoupledOscillator:
    """One axis of the coupled pair.

    Frequencies and damping rates in rad/s resp. 1/s; ``coupling_j`` in
    (rad/s)^2 with the radial/axial sign convention noted above;
    ``mass_ratio_mu`` = m_ion/m_np in (0, 1).
    """

    omega_ion: float
    omega_np: float
    coupling_j: float
    mass_ratio_mu: float
    gamma_ion: float = 0.0
    gamma_np: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.mass_ratio_mu < 1.0:
            raise ValueError("mass_ratio_mu must lie in (0, 1)")
        if self.omega_ion <= 0 or self.omega_np <= 0:
            raise ValueError("oscillator frequencies must be positive")
        if self.gamma_ion < 0 or self.gamma_np < 0:
            raise ValueError("damping rates must be >= 0")


@dataclass(frozen=True)
class ModePair:
    """Both modes of one axis.

    Eigenvectors hold the two displacement components, normalized so the
    largest-magnitude component is +-1 with the ion component's phase
    real and non-negative.
    """

    lambda_in: complex
    lambda_out: complex
    evec_in: np.ndarray
    evec_out: np.ndarray

    def freq_hz(self, which: str) -> float:
        lam = self.lambda_in if which == "in" else self.lambda_out
        return abs(lam) / (2.0 * pi)


def coupling_constant(ion: ParticleSpec, nanoparticle: ParticleSpec,
                      distance: float, axis: str) -> float:
    """j for a pair at separation ``distance`` (m): +k_e Qi Qnp/(d^3 m_i)
    radially, -2x that on the separation (z) axis."""
    base = (COULOMB_K * ion.charge_si * nanoparticle.charge_si
            / (distance ** 3 * ion.mass))
    if axis in ("x", "y"):
        return base
    if axis == "z":
        return -2.0 * base
    raise ValueError(f"unknown axis {axis!r}")


def build_matrix(c: CoupledOscillator) -> np.ndarray:
    """First-order 4x4 system matrix for the state (x_i, x_np, v_i, v_np)."""
    return np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-c.omega_ion ** 2 + c.coupling_j, -c.coupling_j, -c.gamma_ion, 0.0],
        [-c.mass_ratio_mu * c.coupling_j,
         -c.omega_np ** 2 + c.mass_ratio_mu * c.coupling_j, 0.0, -c.gamma_np],
    ])


def _normalize_displacement(vec4: np.ndarray) -> np.ndarray:
    d = vec4[:2].astype(complex)
    d = d / d[np.argmax(np.abs(d))]          # largest component -> +1
    if d[0] != 0:
        phase = d[0] / abs(d[0])             # ion component real >= 0
        d = d / phase
    d = np.real_if_close(d, tol=1e6)
    return d


def eigenmodes(c: CoupledOscillator) -> ModePair:
    """Eigenfrequencies and displacement eigenvectors of one axis.

    Uses a dense eigensolve (LAPACK balances the mixed x/v scales); of
    each conjugate pair the representative with Im(lambda) >= 0 is kept.
    Warns on near-degenerate mode frequencies.
    """
    m = build_matrix(c)
    lam, vec = np.linalg.eig(m)
    # one representative per conjugate (or +-real) eigenvalue pair
    scale = np.max(np.abs(lam))
    osc = np.where(lam.imag > 1e-12 * scale)[0]
    real_pos = np.where((np.abs(lam.imag) <= 1e-12 * scale)
                        & (lam.real >= 0.0))[0]
    keep = list(osc) + list(real_pos)
    if len(keep) != 2:
        keep = list(np.argsort(-np.abs(lam))[:2])
    modes = []
    for idx in keep:
        d = _normalize_displacement(vec[:, idx])
        in_phase = np.real(d[0] * np.conj(d[1])) >= 0.0
        modes.append((lam[idx], d, in_phase))

    if abs(abs(modes[0][0]) - abs(modes[1][0])) < 1e-6 * max(abs(modes[0][0]),
                                                             abs(modes[1][0])):
        warnings.warn("mode frequencies nearly degenerate",
                      DegenerateModeWarning, stacklevel=2)
    flags = [m_[2] for m_ in modes]
    if flags[0] == flags[1]:
        # ambiguous phase relation (one component is exactly zero in the
        # mu -> 0 limit); order by the magnitude of the phase product
        scores = [np.real(m_[1][0] * np.conj(m_[1][1])) for m_ in modes]
        in_idx = int(np.argmax(scores))
    else:
        in_idx = flags.index(True)
    out_idx = 1 - in_idx
    return ModePair(lambda_in=modes[in_idx][0], lambda_out=modes[out_idx][0],
                    evec_in=modes[in_idx][1], evec_out=modes[out_idx][1])


@dataclass(frozen=True)
class MuZeroReport:
    """Deviation of the exact eigenvalues from the mu -> 0 closed forms.

    Deviations are |lambda_num^2 - lambda_closed^2| normalized by the
    square of the axis frequency scale (the largest of omega_ion,
    omega_np, sqrt|j| and the closed-form magnitudes); a per-mode
    normalization would be dominated by the heavy particle's tiny
    frequency and hide the expected linear-in-mu scaling.
    """

    closed_forms: tuple[complex, complex]      # (in, out)
    numerical: tuple[complex, complex]
    deviations: tuple[float, float]
    scale: float


def mu_zero_closed_forms(c: CoupledOscillator) -> tuple[complex, complex]:
    """(lambda_in, lambda_out) in the mu -> 0 limit.

    Radial axis (j > 0, j = w_z_ion^2): in -> i sqrt(w_i^2 - j),
    out -> i w_np.  Crystal axis (j < 0, j = -2 w_z_ion^2):
    in -> i w_np, out -> i sqrt(3) w_ion = i sqrt(3 |j| / 2).
    """
    if c.coupling_j >= 0:
        lam_in = 1j * np.sqrt(complex(c.omega_ion ** 2 - c.coupling_j))
        lam_out = 1j * c.omega_np
    else:
        lam_in = 1j * c.omega_np
        lam_out = 1j * np.sqrt(1.5 * abs(c.coupling_j))
    return lam_in, lam_out


def mu_zero_limit_check(c: CoupledOscillator) -> MuZeroReport:
    """Compare the numerically computed undamped eigenvalues against the
    closed-form mu -> 0 limits; always returns a report.

    Modes are matched to closed forms by lambda^2 proximity rather than
    by the in/out label, which is ill-defined when one eigenvalue
    degenerates to zero.
    """
    c0 = CoupledOscillator(omega_ion=c.omega_ion, omega_np=c.omega_np,
                           coupling_j=c.coupling_j,
                           mass_ratio_mu=c.mass_ratio_mu)
    pair = eigenmodes(c0)
    closed = mu_zero_closed_forms(c)
    scale = max(c.omega_ion, c.omega_np, np.sqrt(abs(c.coupling_j)),
                *(abs(cf) for cf in closed))
    num = (pair.lambda_in, pair.lambda_out)
    straight = sum(abs(n ** 2 - cf ** 2) for n, cf in zip(num, closed))
    swapped = sum(abs(n ** 2 - cf ** 2) for n, cf in zip(num[::-1], closed))
    if swapped < straight:
        num = num[::-1]
    devs = tuple(abs(n ** 2 - cf ** 2) / scale ** 2
                 for n, cf in zip(num, closed))
    return MuZeroReport(closed_forms=closed, numerical=num,
                        deviations=devs, scale=scale)


def write_modes_csv(pairs: dict[str, ModePair], path) -> None:
    """Columns axis,mode,freq_hz,re_ion,re_np for each axis/mode."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("axis,mode,freq_hz,re_ion,re_np\n")
        for axis, pair in pairs.items():
            for which, lam, vec in (("in", pair.lambda_in, pair.evec_in),
                                    ("out", pair.lambda_out, pair.evec_out)):
                fh.write(f"{axis},{which},{abs(lam) / (2 * pi):.12g},"
                         f"{np.real(vec[0]):.12g},{np.real(vec[1]):.12g}\n")


def format_mode_table(pairs: dict[str, ModePair]) -> str:
    """Human-readable eigenmode table."""
    lines = [f"{'mode':<16}{'frequency':>14}  eigenvector [ion, np]"]
    for axis, pair in pairs.items():
        for which, lam, vec in (("in", pair.lambda_in, pair.evec_in),
                                ("out", pair.lambda_out, pair.evec_out)):
            f = abs(lam) / (2 * pi)
            unit = "MHz" if f >= 1e6 else "kHz"
            fv = f / 1e6 if f >= 1e6 else f / 1e3
            lines.append(f"{axis + ', ' + which + '-phase':<16}"
                         f"{fv:>10.4g} {unit}  "
                         f"[{np.real(vec[0]):+.3f}, {np.real(vec[1]):+.3f}]")
    return "\n".join(lines)
