"""Static equilibria in the pseudopotential picture.

The trap is represented by each particle's three effective harmonic
frequencies; the potential felt by the ion is

    U(r) = 1/2 m sum_k omega_k^2 r_k^2 + k_e Q_i Q_np / |r - r_np| - Q_i E.r

with the nanoparticle either pinned (single-particle solve) or promoted
to a joint variable with its own harmonic terms (voltage schedules).
Solutions are found by damped Newton iteration on the gradient with an
analytic Hessian, falling back to backtracking gradient descent while
the Hessian is indefinite, and every returned solution is certified to
be a local minimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import elementary_charge, epsilon_0, pi

from .errors import ConvergenceError, SaddlePointError
from .trap import ParticleSpec

COULOMB_K = 1.0 / (4.0 * pi * epsilon_0)
POSITION_TOL = 1e-9          # m; default length tolerance


@dataclass(frozen=True)
class EquilibriumProblem:
    """Ion in its effective trap, repelled by a pinned nanoparticle."""

    ion: ParticleSpec                       # needs omega_sec
    np_position: tuple[float, float, float]  # m
    np_charge: int                          # units of e
    static_field: tuple[float, float, float] = (0.0, 0.0, 0.0)  # V/m

    def __post_init__(self):
        if self.ion.omega_sec is None:
            raise ValueError("ion needs per-axis secular frequencies")
        if self.np_charge * self.ion.charge < 0:
            raise ValueError("expected a repulsive (same-sign) pair")
        object.__setattr__(self, "np_position", tuple(self.np_position))
        object.__setattr__(self, "static_field", tuple(self.static_field))

    @property
    def kqq(self) -> float:
        return (COULOMB_K * self.ion.charge_si
                * self.np_charge * elementary_charge)


@dataclass(frozen=True)
class EquilibriumSolution:
    ion_position: np.ndarray      # (3,) m
    residual_force: np.ndarray    # (3,) N
    converged: bool
    hessian_eigenvalues: np.ndarray  # (3,) N/m, all > 0 for a minimum


@dataclass(frozen=True)
class VoltageSchedule:
    """Ordered (v_comp pair, v_endcap) set-points."""

    steps: tuple[tuple[tuple[float, float], float], ...]

    def __post_init__(self):
        if len(self.steps) == 0:
            raise ValueError("schedule must be non-empty")
        object.__setattr__(
            self, "steps",
            tuple(((float(c[0]), float(c[1])), float(v)) for c, v in self.steps))


def _coulomb_grad_hess(kqq: float, r: np.ndarray, r_other: np.ndarray):
    s = r - r_other
    d = np.linalg.norm(s)
    grad = -kqq * s / d ** 3
    hess = kqq * (3.0 * np.outer(s, s) / d ** 2 - np.eye(3)) / d ** 3
    return grad, hess, d


def _ion_grad_hess(problem: EquilibriumProblem, r: np.ndarray):
    m = problem.ion.mass
    w2 = np.array(problem.ion.omega_sec) ** 2
    e = np.array(problem.static_field)
    g_c, h_c, _ = _coulomb_grad_hess(problem.kqq, r, np.array(problem.np_position))
    grad = m * w2 * r + g_c - problem.ion.charge_si * e
    hess = np.diag(m * w2) + h_c
    return grad, hess


def _potential(problem: EquilibriumProblem, r: np.ndarray) -> float:
    m = problem.ion.mass
    w2 = np.array(problem.ion.omega_sec) ** 2
    d = np.linalg.norm(r - np.array(problem.np_position))
    return (0.5 * m * np.sum(w2 * r ** 2) + problem.kqq / d
            - problem.ion.charge_si * np.dot(problem.static_field, r))


def _newton_minimize(grad_hess, potential, x0, f_tol, max_iter=300):
    """Damped Newton iteration; returns (x, grad, Hessian) at the end.

    Where the Hessian is indefinite the step uses its eigendecomposition
    with absolute-valued, floored eigenvalues (a positive definite
    rescaling of the gradient, so still a descent direction), which
    walks out of saddle regions with curvature-sized steps instead of
    creeping along the stiffest axis.
    """
    x = np.asarray(x0, dtype=float).copy()
    for _ in range(max_iter):
        g, h = grad_hess(x)
        if np.linalg.norm(g) < f_tol:
            return x, g, h
        evals, vecs = np.linalg.eigh(h)
        if evals[0] > 0:
            step = -np.linalg.solve(h, g)
        else:
            safe = np.maximum(np.abs(evals), 1e-3 * np.abs(evals).max())
            step = -vecs @ ((vecs.T @ g) / safe)
        u0 = potential(x)
        lam = 1.0
        for _ in range(60):
            x_try = x + lam * step
            if potential(x_try) < u0:
                x = x_try
                break
            lam *= 0.5
        else:
            break  # no decrease possible at float precision
    g, h = grad_hess(x)
    if np.linalg.norm(g) < f_tol:
        return x, g, h
    raise ConvergenceError(
        f"equilibrium solve stalled, |grad U| = {np.linalg.norm(g):.3e} N")


def default_force_tol(problem: EquilibriumProblem) -> float:
    """Force tolerance equivalent to 1 nm at the stiffest axis."""
    m = problem.ion.mass
    w_max = max(problem.ion.omega_sec)
    return m * w_max ** 2 * POSITION_TOL


def solve_ion_equilibrium(problem: EquilibriumProblem,
                          tol: float | None = None,
                          initial_guess=None) -> EquilibriumSolution:
    """Stationary point of the ion's potential with |grad U| < tol,
    certified as a minimum via the Hessian.

    Raises ConvergenceError when Newton stalls and SaddlePointError
    (carrying the point, for diagnostics) when the stationary point is
    not a minimum.
    """
    if tol is None:
        tol = default_force_tol(problem)
    x0 = np.zeros(3) if initial_guess is None else np.asarray(initial_guess, float)
    # starting exactly on the nanoparticle would blow up; nudge if so
    if np.allclose(x0, problem.np_position):
        x0 = x0 + np.array([0.0, 0.0, POSITION_TOL])
    x, g, h = _newton_minimize(
        lambda r: _ion_grad_hess(problem, r),
        lambda r: _potential(problem, r), x0, tol)
    evals = np.linalg.eigvalsh(h)
    if evals[0] <= 0:
        raise SaddlePointError(
            f"stationary point at {x} is not a minimum "
            f"(Hessian eigenvalues {evals})", position=x)
    return EquilibriumSolution(ion_position=x, residual_force=-g,
                               converged=True, hessian_eigenvalues=evals)


def ion_position_curve(np_positions, problem_template: EquilibriumProblem,
                       tol: float | None = None,
                       jump_bound: float = 20e-6) -> list[EquilibriumSolution]:
    """Warm-started continuation over a list of nanoparticle positions.

    Adjacent solutions differing by more than ``jump_bound`` raise
    ConvergenceError (branch jump); individual solve failures are
    re-raised with the index of the offending input.
    """
    from dataclasses import replace
    sols: list[EquilibriumSolution] = []
    guess = None
    for i, rnp in enumerate(np_positions):
        prob = replace(problem_template, np_position=tuple(rnp))
        try:
            sol = solve_ion_equilibrium(prob, tol=tol, initial_guess=guess)
        except (ConvergenceError, SaddlePointError) as err:
            raise ConvergenceError(
                f"curve point {i} (np at {tuple(rnp)}) failed: {err}") from err
        if sols and np.linalg.norm(sol.ion_position - sols[-1].ion_position) > jump_bound:
            raise ConvergenceError(
                f"curve point {i}: ion position jumped by more than "
                f"{jump_bound:g} m between adjacent inputs")
        sols.append(sol)
        guess = sol.ion_position
    return sols


@dataclass(frozen=True)
class JointPairConfig:
    """Parameters of the joint ion + nanoparticle equilibrium used by
    voltage schedules.

    Both particles carry their own effective frequencies; the static
    compensation field acts on each in proportion to its charge, which
    is what makes the heavy, highly charged particle respond so much
    more strongly.  ``axial_field_gain`` converts endcap detuning from
    the reference voltage into a uniform axial field.
    """

    ion: ParticleSpec
    nanoparticle: ParticleSpec
    comp_gain: float                 # (V/m)/V
    axial_field_gain: float          # (V/m)/V
    v_endcap_ref: float              # V, symmetric reference

    def __post_init__(self):
        if self.ion.omega_sec is None or self.nanoparticle.omega_sec is None:
            raise ValueError("both particles need secular frequencies")


@dataclass(frozen=True)
class ScheduleStep:
    v_comp: tuple[float, float]
    v_endcap: float
    ion_position: np.ndarray
    np_position: np.ndarray
    separation: np.ndarray
    classification: str              # "xy-pair" | "mixed" | "z-pair"


def classify_pair(separation: np.ndarray) -> str:
    """xy/z pair label from the axial fraction of the separation."""
    frac = abs(separation[2]) / np.linalg.norm(separation)
    if frac > 0.8:
        return "z-pair"
    if frac < 0.2:
        return "xy-pair"
    return "mixed"


def _joint_grad_hess(cfg: JointPairConfig, efield: np.ndarray, x: np.ndarray):
    particles = (cfg.ion, cfg.nanoparticle)
    kqq = (COULOMB_K * cfg.ion.charge_si * cfg.nanoparticle.charge_si)
    r = x.reshape(2, 3)
    grad = np.empty((2, 3))
    hess = np.zeros((6, 6))
    for i, p in enumerate(particles):
        w2 = np.array(p.omega_sec) ** 2
        grad[i] = p.mass * w2 * r[i] - p.charge_si * efield
        hess[3 * i:3 * i + 3, 3 * i:3 * i + 3] += np.diag(p.mass * w2)
    g_c, h_c, _ = _coulomb_grad_hess(kqq, r[0], r[1])
    grad[0] += g_c
    grad[1] -= g_c
    hess[0:3, 0:3] += h_c
    hess[3:6, 3:6] += h_c
    hess[0:3, 3:6] -= h_c
    hess[3:6, 0:3] -= h_c
    return grad.reshape(6), hess


def _joint_potential(cfg: JointPairConfig, efield: np.ndarray, x: np.ndarray):
    particles = (cfg.ion, cfg.nanoparticle)
    kqq = COULOMB_K * cfg.ion.charge_si * cfg.nanoparticle.charge_si
    r = x.reshape(2, 3)
    u = kqq / np.linalg.norm(r[0] - r[1])
    for i, p in enumerate(particles):
        w2 = np.array(p.omega_sec) ** 2
        u += 0.5 * p.mass * np.sum(w2 * r[i] ** 2) - p.charge_si * np.dot(efield, r[i])
    return u


def run_schedule(sched: VoltageSchedule, cfg: JointPairConfig,
                 initial_guess=None, tol: float | None = None) -> list[ScheduleStep]:
    """Joint equilibria along a voltage schedule, with xy/z classification.

    Each step is warm-started from the previous solution; a convergence
    failure aborts and the raised ConvergenceError carries the partial
    results in its ``partial_results`` attribute.
    """
    if tol is None:
        tol = cfg.ion.mass * max(cfg.ion.omega_sec) ** 2 * POSITION_TOL
    if initial_guess is None:
        # field-only equilibria of the first set-point, split axially to
        # break the ion-above/ion-below tie toward ion-above
        v_comp, v_end = sched.steps[0]
        efield = np.array([cfg.comp_gain * v_comp[0], cfg.comp_gain * v_comp[1],
                           cfg.axial_field_gain * (v_end - cfg.v_endcap_ref)])
        x = np.empty(6)
        for i, (p, z_off) in enumerate(((cfg.ion, +2e-6),
                                        (cfg.nanoparticle, -2e-6))):
            w2 = np.array(p.omega_sec) ** 2
            x[3 * i:3 * i + 3] = p.charge_si * efield / (p.mass * w2)
            x[3 * i + 2] += z_off
    else:
        x = np.asarray(initial_guess, float).reshape(6).copy()
    results: list[ScheduleStep] = []
    for v_comp, v_end in sched.steps:
        efield = np.array([cfg.comp_gain * v_comp[0], cfg.comp_gain * v_comp[1],
                           cfg.axial_field_gain * (v_end - cfg.v_endcap_ref)])
        try:
            x, g, h = _newton_minimize(
                lambda y: _joint_grad_hess(cfg, efield, y),
                lambda y: _joint_potential(cfg, efield, y), x, tol)
            if np.linalg.eigvalsh(h)[0] <= 0:
                raise SaddlePointError("joint stationary point is not a minimum",
                                       position=x)
        except ConvergenceError as err:
            err.partial_results = results
            raise
        r = x.reshape(2, 3)
        sep = r[0] - r[1]
        results.append(ScheduleStep(
            v_comp=tuple(v_comp), v_endcap=v_end,
            ion_position=r[0].copy(), np_position=r[1].copy(),
            separation=sep, classification=classify_pair(sep)))
    return results


def write_curve_csv(np_positions, solutions, path) -> None:
    """CSV in micrometres (human-facing unit exception; the library API
    stays SI)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("np_x,np_y,np_z,ion_x,ion_y,ion_z,converged\n")
        for rnp, sol in zip(np_positions, solutions):
            vals = [c * 1e6 for c in rnp] + [c * 1e6 for c in sol.ion_position]
            fh.write(",".join(f"{v:.12g}" for v in vals)
                     + f",{int(sol.converged)}\n")
