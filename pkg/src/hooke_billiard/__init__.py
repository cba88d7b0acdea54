"""Elliptic billiard in a Hooke potential.

Harmonic flow inside the ellipse ``x**2/a + y**2/b <= 1`` with elastic
reflection at the wall.  Trajectories are computed exactly from the
oscillator solution, and the two caustic parameters come from a Lax pair.
The topology of the resulting Liouville foliation is described by Fomenko
graphs on each isoenergy manifold.
"""

import sys

from .conic_geometry import (
    BilliardTable,
    ConicClass,
    FlowEllipse,
    arc_conic_tangency_defect,
    classify_conic,
    conic_value,
    foci,
)
from .dynamics import (
    Arc,
    PhasePoint,
    Trajectory,
    closed_form_map,
    flow,
    next_hit,
    reflect,
    simulate,
    simulate_batch,
)
from .errors import BilliardError, ConicError, DomainError, EmptyLevelError, SingularMapError
from .foliation import (
    BifurcationComplex,
    CriticalOrbit,
    EnergyBand,
    FomenkoAtom,
    FomenkoGraph,
    LevelClass,
    StabilityClass,
    bifurcation_complex,
    bifurcation_set,
    classify_level,
    classify_stability,
    count_components_numeric,
    energy_band,
    fomenko_graph,
)
from .integrability import (
    CausticPair,
    InvariantData,
    caustics,
    char_poly,
    energy,
    in_billiard_domain,
    lax_L,
    lax_M,
    momentum_map,
)

__all__ = sorted(
    name for name, obj in globals().items()
    if not name.startswith("_") and not isinstance(obj, type(sys))
)
__version__ = "0.1.0"
