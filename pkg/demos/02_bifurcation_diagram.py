"""Sampling the image of the momentum map (E, lambda2).

The image is a wedge bounded by lambda2 = a, lambda2 = 0 and the line where
the outer caustic degenerates onto the table (lambda1 = 0).  Three half-lines
inside it carry the critical levels.
"""

from pathlib import Path

import numpy as np

from hooke_billiard import BilliardTable
from hooke_billiard.diagram import bifurcation_diagram
from hooke_billiard.svg import diagram_svg

table = BilliardTable(a=2.0, b=1.0, sigma=1.0)
data = bifurcation_diagram(table, 3000, np.random.default_rng(0))

E, lam2 = data.points.T
print("sampled points:", len(E))
print("smallest lambda2 + 2E/sigma:", (lam2 + 2 * E / table.sigma).min(), "(bound a + b =", table.a + table.b, ")")
print("lambda2 range:", lam2.min(), lam2.max())

for line in data.critical:
    print(f"critical half-line lambda2={line.lambda2:g} starts at E={line.e_start:g} ({line.atom.value} atoms)")

out = Path(__file__).with_name("diagram.svg")
out.write_text(diagram_svg(data))
print("wrote", out)
