"""Bifurcation diagram of the energy-momentum map for two degrees of freedom.

Each (K, 2H) value is classified by whether the normalized spectral curve is
smooth.  For A = diag(1, 2, 2) the singular values form curves bounding the
image.  For A = diag(2, 1, 1) they collapse to one isolated focus-focus value
at (0, 2).  Pass an output directory to write the two SVG diagrams.
"""

import sys
from pathlib import Path

import numpy as np

from neumann import EMValue, PotentialSpec, classify_value, scan
from neumann.svg import render_scan

out = Path(sys.argv[1]) if len(sys.argv) > 1 else None

for a in ((1.0, 2.0, 2.0), (2.0, 1.0, 1.0)):
    pot = PotentialSpec(a, confluent=True)
    grid = scan(pot, (-2.0, 2.0, 200), (0.0, 5.0, 200))
    shaded = grid.regular & grid.realizable
    print(f"A = diag{a}: {shaded.sum()} of {grid.cell_count} nodes regular in the image, "
          f"markers at {grid.fixed_point_images}")
    for name, lines in grid.loci.items():
        print(f"  {name}: {len(lines)} polyline(s)")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"scan_{a[0]:g}{a[1]:g}{a[2]:g}.svg"
        path.write_text(render_scan(grid, f"A = diag{a}"))
        print("  wrote", path)

# the isolated point and its neighbourhood for a_1 > a_2
pot = PotentialSpec([2.0, 1.0, 1.0], confluent=True)
for k, two_h in ((0.0, 2.0), (0.02, 2.0), (0.0, 2.02), (-0.02, 1.98)):
    c = classify_value(EMValue([(two_h - 1.0 - k * k) / 1.0], k), pot)
    print(f"(K, 2H) = ({k:+.2f}, {two_h:.2f}): {'regular' if c.regular else sorted(c.reasons)}")
