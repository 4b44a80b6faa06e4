#!/usr/bin/env python3
"""Ion equilibrium versus nanoparticle position along the usual scan line
(x from -65 to 65 um at z = -3 um), plus the three tabulated placements.

Usage: python scripts/equilibrium_scan.py [outdir]
"""

import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from dualtrap import EquilibriumProblem, ion_position_curve, presets, solve_ion_equilibrium
from dualtrap.equilibrium import write_curve_csv

outdir = Path(sys.argv[1] if len(sys.argv) > 1 else "out/equilibrium")
outdir.mkdir(parents=True, exist_ok=True)

problem = EquilibriumProblem(ion=presets.reference_ion(),
                             np_position=(0.0, 0.0, -3e-6),
                             np_charge=presets.NP_CHARGE)

xs = np.linspace(-65e-6, 65e-6, 131)
np_positions = [(x, 0.0, -3e-6) for x in xs]
sols = ion_position_curve(np_positions, problem)
write_curve_csv(np_positions, sols, outdir / "ion_vs_np_position.csv")

print("tabulated placements (um):")
for x_np in (65e-6, 35e-6, 0.0):
    sol = solve_ion_equilibrium(replace(problem, np_position=(x_np, 0.0, -3e-6)))
    x, _, z = sol.ion_position * 1e6
    print(f"  np at ({x_np * 1e6:5.1f}, 0, -3) -> ion at ({x:+6.2f}, {z:+6.2f})")
print(f"wrote {outdir}/ion_vs_np_position.csv")
