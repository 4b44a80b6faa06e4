#!/usr/bin/env python3
"""Produce the offset-parameter stability chart for the reference trap.

Writes the verdict grid, the traced band edges, and the operating/
threshold points of the reference drive settings as CSV for plotting.

Usage: python scripts/stability_diagram.py [outdir]
"""

import sys
from dataclasses import replace
from pathlib import Path

from dualtrap import a_eff_param, mathieu, presets, q_param

outdir = Path(sys.argv[1] if len(sys.argv) > 1 else "out/stability")
outdir.mkdir(parents=True, exist_ok=True)

diagram = mathieu.stability_scan(q_range=(0.0, 0.65), a_range=(0.0, 0.2),
                                 resolution=(131, 81))
mathieu.write_scan_csv(diagram, outdir / "stability_scan.csv")
mathieu.write_boundary_csv(diagram, outdir / "stability_boundary.csv")

# measured-threshold style point: full fast amplitude, 260 Vpp slow
trap = presets.reference_trap()
ion = presets.reference_ion()
q = q_param(trap, ion, "fast")
a_thr = a_eff_param(replace(trap, v_slow=130.0), ion)
edge = mathieu.boundary_a_for_q(q, "upper", tol=1e-7)
with open(outdir / "threshold_point.csv", "w", encoding="utf-8") as fh:
    fh.write("q,a_eff,a_boundary\n")
    fh.write(f"{q:.6f},{a_thr:.6f},{edge:.6f}\n")

print(f"q = {q:.4f}, threshold a_eff = {a_thr:.4f}, computed edge = {edge:.4f}")
print(f"wrote {outdir}/stability_scan.csv and friends")
