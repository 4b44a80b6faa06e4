#!/usr/bin/env python3
"""Normal-mode table and steady-state temperatures of the coupled pair,
by both the spectral and the Lyapunov route.

Usage: python scripts/cooling_summary.py [outdir]
"""

import sys
from pathlib import Path

from scipy.constants import Boltzmann, pi

from dualtrap import (displacement_psd_and_temperature, doppler_rate,
                      eigenmodes, presets, recoil_heating)
from dualtrap.cooling import write_psd_csv, write_summary_csv
from dualtrap.modes import format_mode_table

outdir = Path(sys.argv[1] if len(sys.argv) > 1 else "out/cooling")
outdir.mkdir(parents=True, exist_ok=True)

pairs = {axis: eigenmodes(presets.reference_oscillator(axis))
         for axis in ("x", "y", "z")}
print(format_mode_table(pairs))

laser = presets.reference_laser()
nb = presets.reference_noise(laser)
print(f"\ndoppler rate      : 2 pi x {doppler_rate(laser, presets.ION_MASS) / (2 * pi):.0f} Hz")
print(f"recoil heating    : {recoil_heating(laser, presets.ION_MASS):.2e} J/s")
print(f"bath temperature  : {nb.heating_np / (nb.gamma_np * Boltzmann):.0f} K "
      f"(heavy particle, uncoupled)")

masses = (presets.ION_MASS, presets.NP_MASS_LIGHT)
rows = []
for axis in ("x", "z"):
    osc = presets.reference_oscillator(axis, gamma_ion=nb.gamma_ion,
                                       gamma_np=nb.gamma_np)
    for method in ("lyapunov", "spectral"):
        r = displacement_psd_and_temperature(osc, nb, masses, method)
        rows.append((axis, method, r.t_eff_ion, r.t_eff_np))
        if method == "spectral":
            write_psd_csv(r, outdir / f"psd_{axis}.csv")
    print(f"T_np along {axis}     : {rows[-1][3]:8.1f} K (spectral)   "
          f"{rows[-2][3]:8.1f} K (lyapunov)")
write_summary_csv(rows, outdir / "cooling_summary.csv")
print(f"wrote {outdir}/cooling_summary.csv")
