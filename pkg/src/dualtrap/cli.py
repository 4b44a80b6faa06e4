"""Command-line front end.

Every subcommand writes CSV artifacts plus a ``manifest.json`` recording
the resolved configuration, package/library versions, timings and the
list of outputs.  For a fixed config, seed and worker count the CSV
outputs are byte-identical across runs; the manifest necessarily is not
(it contains wall-clock timings).

Exit codes: 0 success, 1 verification-report failures, 2 configuration
errors, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy
from scipy.constants import pi

from . import __version__, acceptance, config, cooling, dynamics, equilibrium
from . import mathieu, modes, presets
from .errors import (BracketError, ConfigError, ConvergenceError,
                     DualTrapError, SingularityError, StepSizeError,
                     UnstableSystemError)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", default="reference",
                        choices=["reference", "reference-light"],
                        help="named parameter set (nanoparticle mass variant)")
    parser.add_argument("--config", type=Path, default=None,
                        help="YAML config overriding the preset")
    parser.add_argument("--out", type=Path, default=None,
                        help="output directory (default from config)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)


def _load_config(args) -> config.RunConfig:
    if args.config is not None:
        cfg = config.load(args.config)
    else:
        variant = "light" if args.preset == "reference-light" else "nominal"
        cfg = config.reference_config(variant)
    env_out = os.environ.get("DUALTRAP_OUT")
    if env_out:
        cfg = replace(cfg, outdir=env_out)
    if args.out is not None:
        cfg = replace(cfg, outdir=str(args.out))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    return cfg


class _Run:
    """Output directory plus manifest bookkeeping for one subcommand."""

    def __init__(self, cfg: config.RunConfig, subcommand: str):
        self.cfg = cfg
        self.subcommand = subcommand
        self.outdir = Path(cfg.outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []
        self.t0 = time.time()

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.outdir / name

    def finish(self, extra=None) -> None:
        manifest = {
            "subcommand": self.subcommand,
            "config": config.dumps(self.cfg),
            "versions": {"dualtrap": __version__,
                         "python": sys.version.split()[0],
                         "numpy": np.__version__,
                         "scipy": scipy.__version__},
            "seed": self.cfg.seed,
            "workers": self.cfg.workers,
            "started_unix": self.t0,
            "duration_s": time.time() - self.t0,
            "outputs": self.outputs,
        }
        if extra:
            manifest.update(extra)
        with open(self.outdir / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)


def _cmd_stability_scan(args) -> int:
    cfg = _load_config(args)
    run = _Run(cfg, "stability-scan")
    diagram = mathieu.stability_scan(
        q_range=(args.q_min, args.q_max), a_range=(args.a_min, args.a_max),
        resolution=tuple(args.resolution), workers=cfg.workers)
    mathieu.write_scan_csv(diagram, run.path("stability_scan.csv"))
    mathieu.write_boundary_csv(diagram, run.path("stability_boundary.csv"))
    run.finish()
    return 0


def _cmd_trajectory(args) -> int:
    cfg = _load_config(args)
    run = _Run(cfg, "trajectory")
    particle = {"ion": cfg.ion, "nanoparticle": cfg.nanoparticle}[args.particle]
    f = dynamics.FieldModel(trap=cfg.trap, particles=(particle,),
                            include_coulomb=False)
    t_fast = 2.0 * pi / cfg.trap.omega_fast
    dt = t_fast / 200.0 if cfg.trap.v_fast > 0 else \
        2.0 * pi / cfg.trap.omega_slow / 2000.0
    t_end = args.fast_periods * t_fast if cfg.trap.v_fast > 0 else \
        args.fast_periods * 2.0 * pi / cfg.trap.omega_slow
    pos = np.array([[args.x0 * 1e-6, args.y0 * 1e-6, args.z0 * 1e-6]])
    rec = dynamics.integrate(
        dynamics.TwoParticleState(positions=pos, velocities=np.zeros((1, 3))),
        f, dt=dt, t_end=t_end, sample_every=args.sample_every)
    rec.write_csv(run.path("trajectory.csv"))
    freq, amp = dynamics.amplitude_spectrum(rec, "x")
    with open(run.path("spectrum.csv"), "w", encoding="utf-8") as fh:
        fh.write("freq_hz,amplitude_m\n")
        for fr, am in zip(freq, amp):
            fh.write(f"{fr:.12g},{am:.12g}\n")
    run.finish({"escaped": rec.escape_flag})
    return 0


def _cmd_micromotion(args) -> int:
    cfg = _load_config(args)
    run = _Run(cfg, "micromotion")
    ion = cfg.ion
    t_cfg = cfg.trap
    rows = []
    t_fast = 2.0 * pi / t_cfg.omega_fast
    for z_um in args.z_offsets:
        z0 = z_um * 1e-6
        e_z = ion.mass * ion.omega_sec[2] ** 2 * z0 / ion.charge_si
        f_ax = dynamics.FieldModel(trap=t_cfg, particles=(ion,),
                                   include_coulomb=False,
                                   axial_rf_gain=args.axial_rf_gain,
                                   extra_static_field=(0.0, 0.0, e_z))
        rec = dynamics.integrate(
            dynamics.TwoParticleState(positions=np.array([[0.0, 0.0, z0]]),
                                      velocities=np.zeros((1, 3))),
            f_ax, dt=t_fast / 200.0,
            t_end=12 * 2.0 * pi / t_cfg.omega_slow, sample_every=5000)
        amp = dynamics.slow_micromotion_amplitude(rec, "z", t_cfg.omega_slow)
        rows.append((z_um, amp))
    with open(run.path("micromotion.csv"), "w", encoding="utf-8") as fh:
        fh.write("z_offset_um,amplitude_m\n")
        for z_um, amp in rows:
            fh.write(f"{z_um:.12g},{amp:.12g}\n")
    run.finish()
    return 0


def _cmd_equilibrium(args) -> int:
    cfg = _load_config(args)
    run = _Run(cfg, "equilibrium")
    prob = equilibrium.EquilibriumProblem(
        ion=cfg.ion,
        np_position=(args.np_x * 1e-6, args.np_y * 1e-6, args.np_z * 1e-6),
        np_charge=cfg.nanoparticle.charge)
    sol = equilibrium.solve_ion_equilibrium(prob)
    equilibrium.write_curve_csv([prob.np_position], [sol],
                                run.path("equilibrium.csv"))
    run.finish()
    return 0


def _cmd_equilibrium_curve(args) -> int:
    cfg = _load_config(args)
    run = _Run(cfg, "equilibrium-curve")
    xs = np.linspace(args.x_min, args.x_max, args.points) * 1e-6
    np_positions = [(x, 0.0, args.np_z * 1e-6) for x in xs]
    prob = equilibrium.EquilibriumProblem(
        ion=cfg.ion, np_position=np_positions[0],
        np_charge=cfg.nanoparticle.charge)
    sols = equilibrium.ion_position_curve(np_positions, prob)
    equilibrium.write_curve_csv(np_positions, sols,
                                run.path("equilibrium_curve.csv"))
    run.finish()
    return 0


def _cmd_schedule(args) -> int:
    cfg = _load_config(args)
    run = _Run(cfg, "schedule")
    pair_cfg = equilibrium.JointPairConfig(
        ion=cfg.ion, nanoparticle=cfg.nanoparticle,
        comp_gain=cfg.trap.comp_gain,
        axial_field_gain=presets.AXIAL_FIELD_GAIN,
        v_endcap_ref=cfg.trap.v_endcap)
    steps = presets.configuration_swap_schedule()
    results = equilibrium.run_schedule(steps, pair_cfg)
    with open(run.path("schedule.csv"), "w", encoding="utf-8") as fh:
        fh.write("step,v_comp1,v_comp2,v_endcap,ion_x_um,ion_y_um,ion_z_um,"
                 "np_x_um,np_y_um,np_z_um,classification\n")
        for i, st in enumerate(results):
            vals = (list(st.ion_position * 1e6) + list(st.np_position * 1e6))
            fh.write(f"{i},{st.v_comp[0]:.12g},{st.v_comp[1]:.12g},"
                     f"{st.v_endcap:.12g},"
                     + ",".join(f"{v:.12g}" for v in vals)
                     + f",{st.classification}\n")
    run.finish()
    return 0


def _cmd_modes(args) -> int:
    cfg = _load_config(args)
    run = _Run(cfg, "modes")
    pairs = {axis: modes.eigenmodes(presets.reference_oscillator(axis))
             for axis in ("x", "y", "z")}
    modes.write_modes_csv(pairs, run.path("modes.csv"))
    table = modes.format_mode_table(pairs)
    with open(run.path("modes.txt"), "w", encoding="utf-8") as fh:
        fh.write(table + "\n")
    print(table)
    run.finish()
    return 0


def _cmd_cooling(args) -> int:
    cfg = _load_config(args)
    run = _Run(cfg, "cooling")
    nb = cfg.noise
    masses = (cfg.ion.mass, presets.NP_MASS_LIGHT)
    rows = []
    for axis in ("x", "z"):
        osc = presets.reference_oscillator(axis, gamma_ion=nb.gamma_ion,
                                           gamma_np=nb.gamma_np)
        for method in ("lyapunov", "spectral"):
            result = cooling.displacement_psd_and_temperature(
                osc, nb, masses, method)
            rows.append((axis, method, result.t_eff_ion, result.t_eff_np))
            if method == "spectral":
                cooling.write_psd_csv(result, run.path(f"psd_{axis}.csv"))
    cooling.write_summary_csv(rows, run.path("cooling_summary.csv"))
    run.finish()
    return 0


def _cmd_reproduce_all(args) -> int:
    cfg = _load_config(args)
    run = _Run(cfg, "reproduce-all")
    results = acceptance.run_all(seed=cfg.seed, workdir=run.outdir)
    all_ok = True
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        all_ok &= r.passed
        lines.append(f"[{status}] criterion {r.name} ({r.runtime_s:.1f} s)")
        for d in r.details:
            lines.append(f"    {d}")
    report = "\n".join(lines)
    print(report)
    with open(run.path("verification_report.txt"), "w", encoding="utf-8") as fh:
        fh.write(report + "\n")
    with open(run.path("verification_report.json"), "w", encoding="utf-8") as fh:
        json.dump([{"name": r.name, "passed": r.passed, "details": r.details,
                    "runtime_s": r.runtime_s} for r in results], fh, indent=2)
    run.finish({"all_passed": all_ok})
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualtrap",
        description="dual-frequency trap simulation toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("stability-scan", help="grid + boundary of the "
                       "offset-parameter stability chart")
    _add_common(p)
    p.add_argument("--q-min", type=float, default=0.0)
    p.add_argument("--q-max", type=float, default=0.6)
    p.add_argument("--a-min", type=float, default=0.0)
    p.add_argument("--a-max", type=float, default=0.2)
    p.add_argument("--resolution", type=int, nargs=2, default=(61, 41),
                   metavar=("NQ", "NA"))
    p.set_defaults(func=_cmd_stability_scan)

    p = sub.add_parser("trajectory", help="time-domain integration")
    _add_common(p)
    p.add_argument("--particle", choices=["ion", "nanoparticle"], default="ion")
    p.add_argument("--fast-periods", type=int, default=400,
                   help="duration in fast periods (slow periods if v_fast=0)")
    p.add_argument("--x0", type=float, default=1.0, help="um")
    p.add_argument("--y0", type=float, default=0.0, help="um")
    p.add_argument("--z0", type=float, default=0.0, help="um")
    p.add_argument("--sample-every", type=int, default=10)
    p.set_defaults(func=_cmd_trajectory)

    p = sub.add_parser("micromotion", help="slow-micromotion amplitude vs "
                       "axial position")
    _add_common(p)
    p.add_argument("--z-offsets", type=float, nargs="+",
                   default=(5.0, 10.0, 15.0, 20.0), help="um")
    p.add_argument("--axial-rf-gain", type=float, default=0.02)
    p.set_defaults(func=_cmd_micromotion)

    p = sub.add_parser("equilibrium", help="single two-particle equilibrium")
    _add_common(p)
    p.add_argument("--np-x", type=float, default=0.0, help="um")
    p.add_argument("--np-y", type=float, default=0.0, help="um")
    p.add_argument("--np-z", type=float, default=-3.0, help="um")
    p.set_defaults(func=_cmd_equilibrium)

    p = sub.add_parser("equilibrium-curve", help="ion position vs "
                       "nanoparticle line scan")
    _add_common(p)
    p.add_argument("--x-min", type=float, default=-65.0, help="um")
    p.add_argument("--x-max", type=float, default=65.0, help="um")
    p.add_argument("--np-z", type=float, default=-3.0, help="um")
    p.add_argument("--points", type=int, default=53)
    p.set_defaults(func=_cmd_equilibrium_curve)

    p = sub.add_parser("schedule", help="xy-pair to z-pair voltage walk")
    _add_common(p)
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("modes", help="normal-mode table")
    _add_common(p)
    p.set_defaults(func=_cmd_modes)

    p = sub.add_parser("cooling", help="steady-state temperatures and PSDs")
    _add_common(p)
    p.set_defaults(func=_cmd_cooling)

    p = sub.add_parser("reproduce-all", help="run the full verification suite")
    _add_common(p)
    p.set_defaults(func=_cmd_reproduce_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (ConvergenceError, BracketError, SingularityError, StepSizeError,
            UnstableSystemError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except DualTrapError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
