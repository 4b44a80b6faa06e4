"""Exact stability analysis of x'' + (a + 2 q cos 2t) x = 0.

The trapped-particle verdicts come from the monodromy matrix over one
scaled period t in [0, pi]: the motion is bounded iff |trace| <= 2, the
boundary |trace| = 2 counted stable.  Only the first stability region
(q < ~0.908 at a = 0) is mapped.

For co-trapping with a second, much slower drive the offset parameter
sweeps +-|a| once per slow cycle, so the region that matters in an
(q, a >= 0) chart is bounded by the magnitude of the lower
characteristic curve a0(q) ~ -q^2/2.  ``stability_scan`` and
``boundary_a_for_q`` use that symmetric-offset criterion; ``monodromy``
exposes the raw fixed-(a, q) problem.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import mathieu_monodromy
from .errors import BracketError, ConvergenceError

DEFAULT_STEPS = 4096
#: trace agreement required between an n-step and an n/2-step integration
DEFAULT_TRACE_TOL = 1e-9
#: a-window searched for boundaries
SEARCH_WINDOW = (-1.0, 1.0)


@dataclass(frozen=True)
class FloquetResult:
    """Monodromy trace, stability verdict, and growth exponent per
    scaled period (zero when stable)."""

    trace: float
    stable: bool
    exponent: float


@dataclass
class StabilityDiagram:
    """Grid of symmetric-offset stability verdicts plus traced band edges.

    ``a_boundary_low``/``a_boundary_high`` are the per-q edges of the
    stable band for an offset sweeping +-|a|; they are mirror images,
    low = -|a0(q)| and high = +|a0(q)|.
    """

    q_grid: np.ndarray
    a_grid: np.ndarray
    stable: np.ndarray          # shape (len(q_grid), len(a_grid)), bool
    trace: np.ndarray           # worst-offset trace at each grid point
    a_boundary_low: np.ndarray
    a_boundary_high: np.ndarray

    def points(self):
        """Iterate (q, a, stable) row-major."""
        for i, q in enumerate(self.q_grid):
            for j, a in enumerate(self.a_grid):
                yield q, a, bool(self.stable[i, j])


def monodromy(a: float, q: float, integrator_steps: int = DEFAULT_STEPS,
              trace_tol: float = DEFAULT_TRACE_TOL) -> FloquetResult:
    """Floquet verdict at fixed (a, q).

    The trace is accepted only if halving the step count moves it by
    less than ``trace_tol`` (set ``trace_tol=None`` to skip the check).
    """
    m11, m12, m21, m22 = mathieu_monodromy(a, q, integrator_steps)
    tr = m11 + m22
    if trace_tol is not None:
        c11, _, _, c22 = mathieu_monodromy(a, q, max(integrator_steps // 2, 16))
        coarse = c11 + c22
        if not math.isfinite(tr) or abs(tr - coarse) > trace_tol * max(1.0, abs(tr)):
            raise ConvergenceError(
                f"monodromy trace not converged at (a={a}, q={q}): "
                f"{coarse} vs {tr} with {integrator_steps} steps")
    stable = abs(tr) <= 2.0
    exponent = 0.0 if stable else math.acosh(abs(tr) / 2.0)
    return FloquetResult(trace=tr, stable=stable, exponent=exponent)


def _stable_fixed(a: float, q: float, steps: int) -> bool:
    m11, _, _, m22 = mathieu_monodromy(a, q, steps)
    return abs(m11 + m22) <= 2.0


def offset_stable(a: float, q: float, steps: int = DEFAULT_STEPS) -> bool:
    """Stability under a slow offset sweeping both signs of ``a``."""
    a = abs(a)
    return _stable_fixed(-a, q, steps) and (a == 0.0 or _stable_fixed(a, q, steps))


def boundary_a_for_q(q: float, side: str = "lower", tol: float = 1e-6,
                     integrator_steps: int = DEFAULT_STEPS) -> float:
    """Edge of the symmetric-offset stable band at fixed q, by bisection.

    ``side='lower'`` returns the negative edge (~ -q^2/2 for small q),
    ``side='upper'`` its positive mirror.  Raises BracketError when no
    stable->unstable transition exists inside the search window [-1, 1]
    (e.g. q outside the first stability region).
    """
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not offset_stable(0.0, q, integrator_steps):
        raise BracketError(f"q={q} is unstable already at a=0")
    sign = -1.0 if side == "lower" else 1.0
    lo = 0.0                      # stable
    hi = abs(SEARCH_WINDOW[0 if side == "lower" else 1])
    if offset_stable(sign * hi, q, integrator_steps):
        raise BracketError(
            f"no instability found for q={q} within the window {SEARCH_WINDOW}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if offset_stable(sign * mid, q, integrator_steps):
            lo = mid
        else:
            hi = mid
    return sign * 0.5 * (lo + hi)


def _scan_row(args):
    q, a_values, steps = args
    stable_row = np.empty(len(a_values), dtype=np.bool_)
    trace_row = np.empty(len(a_values))
    for j, a in enumerate(a_values):
        aa = abs(a)
        m11, _, _, m22 = mathieu_monodromy(-aa, q, steps)
        tr_neg = m11 + m22
        if aa > 0.0:
            m11, _, _, m22 = mathieu_monodromy(aa, q, steps)
            tr_pos = m11 + m22
        else:
            tr_pos = tr_neg
        # report the worse of the two offset signs
        tr = tr_neg if abs(tr_neg) >= abs(tr_pos) else tr_pos
        trace_row[j] = tr
        stable_row[j] = abs(tr) <= 2.0
    try:
        a_edge = abs(boundary_a_for_q(q, "lower", 1e-6, steps)) if q > 0 else 0.0
    except BracketError:
        a_edge = np.nan
    return stable_row, trace_row, a_edge


def stability_scan(q_range: tuple[float, float], a_range: tuple[float, float],
                   resolution: int | tuple[int, int],
                   integrator_steps: int = DEFAULT_STEPS,
                   workers: int = 1) -> StabilityDiagram:
    """Grid of symmetric-offset verdicts plus band edges per q column.

    Output ordering is fixed by the grid (row-major in q, then a), never
    by completion order, so results are reproducible for any ``workers``.
    """
    nq, na = (resolution, resolution) if isinstance(resolution, int) else resolution
    if nq < 1 or na < 2:
        raise ValueError("need at least a 1x2 grid")
    q_lo, q_hi = q_range
    a_lo, a_hi = a_range
    if a_hi <= a_lo:
        raise ValueError("a_range must be non-degenerate")
    q_grid = np.linspace(q_lo, q_hi, nq) if q_hi > q_lo else np.full(nq, q_lo)
    a_grid = np.linspace(a_lo, a_hi, na)

    jobs = [(float(q), a_grid, integrator_steps) for q in q_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_row, jobs, chunksize=max(1, nq // (4 * workers))))
    else:
        rows = [_scan_row(job) for job in jobs]

    stable = np.vstack([r[0] for r in rows])
    trace = np.vstack([r[1] for r in rows])
    edge = np.array([r[2] for r in rows])
    return StabilityDiagram(q_grid=q_grid, a_grid=a_grid, stable=stable,
                            trace=trace, a_boundary_low=-edge,
                            a_boundary_high=edge)


def write_scan_csv(diagram: StabilityDiagram, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("q,a,stable,trace\n")
        for i, q in enumerate(diagram.q_grid):
            for j, a in enumerate(diagram.a_grid):
                fh.write(f"{q:.12g},{a:.12g},{int(diagram.stable[i, j])},"
                         f"{diagram.trace[i, j]:.12g}\n")


def write_boundary_csv(diagram: StabilityDiagram, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("q,a_low,a_high\n")
        for q, lo, hi in zip(diagram.q_grid, diagram.a_boundary_low,
                             diagram.a_boundary_high):
            fh.write(f"{q:.12g},{lo:.12g},{hi:.12g}\n")
