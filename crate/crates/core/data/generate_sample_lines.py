"""Regenerates sample_lines_synthetic.csv.

The lines are SYNTHETIC: rotational progressions with plausible centres,
strengths and widths for H2O, CO2 and O2 bands in the 1.2-1.7 um window.
They exist to exercise the absorption code and are not HITRAN data.
"""
import csv
import math
import random

rng = random.Random(20231016)
BANDS = [
    # species, origin cm-1, rotational spacing, branch lines, peak S, molar mass
    ("H2O", 7250.0, 11.0, 60, 2.0e-20, 18.0106),
    ("H2O", 8806.0, 9.5, 20, 1.5e-21, 18.0106),
    ("CO2", 6348.0, 1.56, 45, 1.7e-23, 43.9898),
    ("CO2", 6228.0, 1.55, 30, 8.0e-24, 43.9898),
    ("O2", 7883.0, 2.9, 35, 1.0e-26, 31.9898),
    # weak filler bands so every point of the window has a line within the wing cutoff
    ("CO2", 6076.0, 1.55, 40, 3.0e-24, 43.9898),
    ("H2O", 5950.0, 9.0, 10, 5.0e-23, 18.0106),
    ("H2O", 6462.0, 7.0, 6, 1.0e-22, 18.0106),
    ("H2O", 8300.0, 10.0, 30, 5.0e-23, 18.0106),
]

rows = []
for species, origin, spacing, count, peak, mass in BANDS:
    for j in range(1, count + 1):
        pop = j * math.exp(-(j / (0.45 * count)) ** 2)
        for branch in (-1, 1):
            nu0 = origin + branch * spacing * j * (1.0 - 0.002 * branch * j)
            s = peak * pop / (0.45 * count / math.sqrt(2.0)) * math.exp(-0.5) * rng.uniform(0.6, 1.0)
            gamma = rng.uniform(0.05, 0.1) if species != "O2" else rng.uniform(0.04, 0.06)
            rows.append((species, round(nu0, 6), float(f"{s:.4e}"), round(gamma, 4), mass))

rows.sort(key=lambda r: r[1])
with open("sample_lines_synthetic.csv", "w", newline="") as fh:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["species", "nu0_cm-1", "S_cm-1_per_molec_cm-2", "gamma_air_cm-1_per_atm", "molar_mass_g_mol"])
    for r in rows:
        w.writerow(r)
print(len(rows))
