"""A single trajectory and the two caustics it stays tangent to.

Run from the repository root:  python demos/01_trajectory_and_caustics.py
Writes trajectory.svg next to this script.
"""

from pathlib import Path

import numpy as np

from hooke_billiard import BilliardTable, PhasePoint, caustics, energy, momentum_map, simulate
from hooke_billiard.svg import trajectory_svg

# %% A table and a starting state
table = BilliardTable(a=2.0, b=1.0, sigma=1.0)
start = PhasePoint([0.3, 0.1], [1.4, 0.9])
print("energy:", energy(table, start))

# %% The caustic pair: lambda1 <= 0 is an outer ellipse, lambda2 the inner conic
pair = caustics(table, start)
print("caustics:", pair.lambda1, pair.lambda2, [c.value for c in pair.classes])
inv = momentum_map(table, start)
print("momentum map (E, lambda2):", inv.E, inv.lambda2)

# %% Bounce a few hundred times and watch the invariants
traj = simulate(table, start, 300)
lam2 = np.array([caustics(table, p).lambda2 for p in traj.bounce_points])
print("lambda2 drift over 300 bounces:", np.abs(lam2 - pair.lambda2).max())

# %% Picture of the first dozen arcs against both caustics
short = simulate(table, start, 12)
out = Path(__file__).with_name("trajectory.svg")
out.write_text(trajectory_svg(short, (pair.lambda1, pair.lambda2)))
print("wrote", out)
