"""Liouville foliation of the billiard and its Fomenko graphs.

Levels are indexed by ``(E, lambda2)``.  The image of the momentum map is

    0 <= lambda2 <= a,   lambda2 + 2E/sigma >= a + b,

and along its slanted edge the outer caustic parameter
``lambda1 = a + b - 2E/sigma - lambda2`` vanishes.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .conic_geometry import BilliardTable
from .dynamics import closed_form_arrays
from .errors import EmptyLevelError

LEVEL_TOL = 1e-9


class FomenkoAtom(enum.Enum):
    A = "A"
    B = "B"
    T = "T"  # torus of closed orbits
    EIGHT = "8"  # figure eight times a circle, closed orbits only


class EnergyBand(enum.Enum):
    EQ_SIGMA_B_OVER_2 = "E = sigma*b/2"
    BETWEEN_B_AND_A = "sigma*b/2 < E < sigma*a/2"
    EQ_SIGMA_A_OVER_2 = "E = sigma*a/2"
    BETWEEN_A_AND_AB = "sigma*a/2 < E < sigma*(a+b)/2"
    ABOVE_AB = "E >= sigma*(a+b)/2"


class StabilityClass(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


class CriticalOrbit(enum.Enum):
    MINOR_AXIS = "minor_axis"
    MAJOR_AXIS = "major_axis"
    BOUNDARY_LIMIT = "boundary_limit"


def energy_band(table: BilliardTable, E: float, tol: float = LEVEL_TOL) -> EnergyBand:
    e_b, e_a, e_ab = table.band_energies()
    if E < e_b - tol:
        raise EmptyLevelError(f"empty isoenergy manifold: E={E!r} < sigma*b/2={e_b!r}")
    if abs(E - e_b) <= tol:
        return EnergyBand.EQ_SIGMA_B_OVER_2
    if abs(E - e_a) <= tol:
        return EnergyBand.EQ_SIGMA_A_OVER_2
    if E < e_a:
        return EnergyBand.BETWEEN_B_AND_A
    if E < e_ab - tol:
        return EnergyBand.BETWEEN_A_AND_AB
    return EnergyBand.ABOVE_AB


def outer_parameter(table: BilliardTable, E, lambda2):
    """``lambda1`` from the sum rule."""
    return table.a + table.b - 2.0 * E / table.sigma - lambda2


def in_image(table: BilliardTable, E, lambda2, tol: float = LEVEL_TOL):
    return (
        (lambda2 >= -tol)
        & (lambda2 <= table.a + tol)
        & (outer_parameter(table, E, lambda2) <= tol)
    )


# ---------------------------------------------------------------------------
# bifurcation set
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfLine:
    """``{(E, lambda2) : lambda2 = const, E >= e_start}``."""

    lambda2: float
    e_start: float
    atom: FomenkoAtom

    @property
    def endpoint(self) -> tuple[float, float]:
        return self.e_start, self.lambda2

    def contains(self, E: float, lambda2: float, tol: float = LEVEL_TOL) -> bool:
        return abs(lambda2 - self.lambda2) <= tol and E >= self.e_start - tol


def bifurcation_set(table: BilliardTable) -> tuple[HalfLine, HalfLine, HalfLine]:
    """The critical values: the three half-lines at ``lambda2 = a, b, 0``."""
    e_b, e_a, e_ab = table.band_energies()
    return (
        HalfLine(table.a, e_b, FomenkoAtom.A),
        HalfLine(table.b, e_a, FomenkoAtom.B),
        HalfLine(0.0, e_ab, FomenkoAtom.A),
    )


def on_bifurcation_set(table: BilliardTable, E: float, lambda2: float, tol: float = LEVEL_TOL) -> bool:
    return any(line.contains(E, lambda2, tol) for line in bifurcation_set(table))


# ---------------------------------------------------------------------------
# level sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelClass:
    atom: FomenkoAtom | None  # None for a regular level (Liouville tori)
    components: int

    @property
    def regular(self) -> bool:
        return self.atom is None


def classify_level(table: BilliardTable, E: float, lambda2: float, tol: float = LEVEL_TOL) -> LevelClass:
    """Atom type and number of connected components of a level set."""
    a, b = table.a, table.b
    if not in_image(table, E, lambda2, tol):
        raise EmptyLevelError(f"empty level: (E, lambda2)=({E!r}, {lambda2!r}) outside the image")
    e_a = table.band_energies()[1]
    lam1 = outer_parameter(table, E, lambda2)
    if abs(lambda2 - a) <= tol:
        return LevelClass(FomenkoAtom.A, 1)
    if abs(lambda2 - b) <= tol:
        if abs(E - e_a) <= tol:
            return LevelClass(FomenkoAtom.EIGHT, 1)
        return LevelClass(FomenkoAtom.B, 1)
    if abs(lambda2) <= tol:
        return LevelClass(FomenkoAtom.A, 2)
    hyperbolic = lambda2 > b
    if abs(lam1) <= tol:
        return LevelClass(FomenkoAtom.T, 1 if hyperbolic else 2)
    return LevelClass(None, 1 if hyperbolic else 2)


def _outgoing_velocities(table: BilliardTable, xi: np.ndarray, E: float, lambda2: float):
    """Outgoing velocities at boundary points ``xi`` on the level ``(E, lambda2)``.

    On the boundary ``p(0) = v^T K v`` with
    ``K = [[x2^2 - b, -x1 x2], [-x1 x2, x1^2 - a]]`` and the level fixes
    ``p(0) = sigma lambda1 lambda2``; with ``|v|`` fixed by the energy this is
    a trigonometric equation in the velocity direction.
    """
    a, b, s = table.a, table.b, table.sigma
    target = s * outer_parameter(table, E, lambda2) * lambda2
    speed2 = 2.0 * E - s * (xi**2).sum(-1)
    x1, x2 = xi[:, 0], xi[:, 1]
    k11, k12, k22 = x2**2 - b, -x1 * x2, x1**2 - a
    k0, kc, ks = 0.5 * (k11 + k22), 0.5 * (k11 - k22), k12
    amp = np.hypot(kc, ks)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (target / speed2 - k0) / amp
    ok = (speed2 > 0) & (np.abs(c) <= 1.0)
    psi = np.arctan2(ks, kc)
    spread = np.arccos(np.clip(c, -1.0, 1.0))
    pos, vel = [], []
    for phi in (0.5 * (psi + spread), 0.5 * (psi - spread)):
        for shift in (0.0, np.pi):
            u = np.stack([np.cos(phi + shift), np.sin(phi + shift)], axis=-1)
            v = np.sqrt(np.maximum(speed2, 0.0))[:, None] * u
            inward = (v * xi * table.diag_A).sum(-1) < -1e-12 * np.sqrt(np.maximum(speed2, 1e-300))
            keep = ok & inward
            pos.append(xi[keep])
            vel.append(v[keep])
    return np.concatenate(pos), np.concatenate(vel)


def _count_tangency_family(table: BilliardTable, E: float, samples: int) -> int:
    """Components of a ``lambda1 = 0`` level from its family of inscribed ellipses.

    Every orbit there is a flow ellipse touching the boundary at ``+-xi`` with
    tangential speed ``sqrt(2E - sigma |xi|^2)``.  Graph nodes are (sample,
    orientation); edges join neighbouring admissible samples, the two
    orientations where the speed runs out, and antipodal contact points of
    one orbit.
    """
    if samples % 2:
        samples += 1
    phi = 2 * np.pi * (np.arange(samples) + 0.5) / samples
    xi = table.boundary_point(phi)
    admissible = 2.0 * E - table.sigma * (xi**2).sum(-1) > 0
    if not admissible.any():
        raise EmptyLevelError("empty level sample: no admissible contact points")
    pairs = []
    for k in np.flatnonzero(admissible):
        nxt, prv = (k + 1) % samples, (k - 1) % samples
        opposite = (k + samples // 2) % samples
        for o in (0, 1):
            if admissible[nxt]:
                pairs.append((2 * k + o, 2 * nxt + o))
            pairs.append((2 * k + o, 2 * opposite + o))
        if not admissible[nxt] or not admissible[prv]:
            pairs.append((2 * k, 2 * k + 1))
    rows, cols = np.array(pairs).T
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(2 * samples, 2 * samples))
    _, labels = connected_components(graph, directed=False)
    used = np.concatenate([2 * np.flatnonzero(admissible), 2 * np.flatnonzero(admissible) + 1])
    return len(set(labels[used].tolist()))


def count_components_numeric(
    table: BilliardTable,
    E: float,
    lambda2: float,
    samples: int = 64,
    max_bounces: int = 200,
    chunk: int = 20,
    tol: float = LEVEL_TOL,
) -> int:
    """Count connected components of a regular or ``T`` level by sampling.

    Regular levels: outgoing boundary states on the level are iterated with
    the bounce map and the sign of the angular momentum ``x vy - y vx`` is
    tracked.  A sign flip inside one trajectory means both signs lie on one
    torus (one component); otherwise the two signs are separate tori.
    Levels with ``lambda1 = 0`` consist of closed orbits, so they are counted
    through the connectivity of their family of inscribed ellipses instead.
    """
    lam1 = outer_parameter(table, E, lambda2)
    if abs(lam1) <= tol:
        return _count_tangency_family(table, E, samples)
    phi = 2 * np.pi * (np.arange(samples) + 0.5) / samples
    xi, v = _outgoing_velocities(table, table.boundary_point(phi), E, lambda2)
    if len(xi) == 0:
        raise EmptyLevelError("empty level sample: no real velocities on the level")
    sign0 = np.sign(xi[:, 0] * v[:, 1] - xi[:, 1] * v[:, 0])
    seen_pos = sign0 > 0
    seen_neg = sign0 < 0
    realised = {1: bool(seen_pos.any()), -1: bool(seen_neg.any())}
    done = 0
    while done < max_bounces:
        for _ in range(chunk):
            xi, v, _ = closed_form_arrays(table, xi, v)
            w = xi[:, 0] * v[:, 1] - xi[:, 1] * v[:, 0]
            seen_pos |= w > 0
            seen_neg |= w < 0
        done += chunk
        if np.any(seen_pos & seen_neg):
            return 1
    return 2 if realised[1] and realised[-1] else 1


# ---------------------------------------------------------------------------
# Fomenko graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Vertex:
    id: int
    atom: FomenkoAtom
    lambda2: float  # anchor on the bifurcation diagram
    winding: int | None = None  # +1 counterclockwise, -1 clockwise

    @property
    def label(self) -> str:
        return self.atom.value

    @property
    def name(self) -> str:
        if self.winding is None:
            return self.label
        return self.label + ("+" if self.winding > 0 else "-")


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    r: Fraction | None = None
    epsilon: int | None = None


@dataclass(frozen=True)
class Family:
    vertices: tuple[int, ...]
    n: int | None = None


@dataclass(frozen=True)
class FomenkoGraph:
    band: EnergyBand
    energy: float
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...] = ()
    families: tuple[Family, ...] = field(default=())

    def atom_counts(self) -> Counter:
        return Counter(v.label for v in self.vertices)

    def edge_labels(self) -> Counter:
        """Multiset of unordered label pairs, e.g. ``{('A', 'B'): 1, ('B', 'T'): 2}``."""
        lab = {v.id: v.label for v in self.vertices}
        return Counter(tuple(sorted((lab[e.source], lab[e.target]))) for e in self.edges)

    def to_dict(self) -> dict:
        return {
            "band": self.band.name,
            "energy": self.energy,
            "vertices": [
                {
                    "id": v.id,
                    "atom": v.label,
                    "name": v.name,
                    "lambda2": v.lambda2,
                    "winding": v.winding,
                }
                for v in self.vertices
            ],
            "edges": [
                {
                    "source": e.source,
                    "target": e.target,
                    "r": None if e.r is None else str(e.r),
                    "eps": e.epsilon,
                }
                for e in self.edges
            ],
            "families": [{"vertices": list(f.vertices), "n": f.n} for f in self.families],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        names = {v.id: v.name for v in self.vertices}
        lines = [f"band: {self.band.value}", f"energy: {self.energy!r}"]
        lines.append("atoms: " + " ".join(v.name for v in self.vertices))
        for e in self.edges:
            marks = "" if e.r is None else f"  r={e.r} eps={e.epsilon}"
            lines.append(f"edge: {names[e.source]} - {names[e.target]}{marks}")
        for fam in self.families:
            members = ",".join(names[i] for i in fam.vertices)
            lines.append(f"family: {{{members}}} n={fam.n}")
        return "\n".join(lines) + "\n"

    def to_dot(self) -> str:
        directed = any(e.r is not None for e in self.edges)
        arrow = "->" if directed else "--"
        lines = [f"{'digraph' if directed else 'graph'} fomenko {{"]
        lines.append(f'  comment="{self.band.value}, E={self.energy!r}";')
        for v in self.vertices:
            lines.append(
                f'  v{v.id} [label="{v.label}", name="{v.name}", lambda2="{v.lambda2!r}"];'
            )
        for e in self.edges:
            attrs = []
            if e.r is not None:
                attrs.append(f'r="{e.r}"')
            if e.epsilon is not None:
                attrs.append(f'eps="{e.epsilon}"')
            suffix = f" [{', '.join(attrs)}]" if attrs else ""
            lines.append(f"  v{e.source} {arrow} v{e.target}{suffix};")
        for k, fam in enumerate(self.families):
            members = "; ".join(f"v{i}" for i in fam.vertices)
            n = "" if fam.n is None else f'n="{fam.n}"; '
            lines.append(f"  subgraph cluster_family{k} {{ {n}{members}; }}")
        lines.append("}")
        return "\n".join(lines) + "\n"


def fomenko_graph(table: BilliardTable, E: float, tol: float = LEVEL_TOL) -> FomenkoGraph:
    """Fomenko graph of the isoenergy manifold at energy ``E``."""
    band = energy_band(table, E, tol)
    a, b = table.a, table.b
    lam_t = a + b - 2.0 * E / table.sigma  # lambda2 on the lambda1 = 0 line
    A = FomenkoAtom
    if band is EnergyBand.EQ_SIGMA_B_OVER_2:
        return FomenkoGraph(band, E, (Vertex(0, A.A, a),))
    if band is EnergyBand.BETWEEN_B_AND_A:
        return FomenkoGraph(band, E, (Vertex(0, A.A, a), Vertex(1, A.T, lam_t)), (Edge(0, 1),))
    if band is EnergyBand.EQ_SIGMA_A_OVER_2:
        return FomenkoGraph(band, E, (Vertex(0, A.A, a), Vertex(1, A.EIGHT, b)), (Edge(0, 1),))
    if band is EnergyBand.BETWEEN_A_AND_AB:
        verts = (
            Vertex(0, A.A, a),
            Vertex(1, A.B, b),
            Vertex(2, A.T, lam_t, +1),
            Vertex(3, A.T, lam_t, -1),
        )
        return FomenkoGraph(band, E, verts, (Edge(0, 1), Edge(1, 2), Edge(1, 3)))
    verts = (
        Vertex(0, A.A, a),
        Vertex(1, A.B, b),
        Vertex(2, A.A, 0.0, +1),
        Vertex(3, A.A, 0.0, -1),
    )
    zero = Fraction(0)
    edges = (Edge(1, 0, zero, 1), Edge(1, 2, zero, 1), Edge(1, 3, zero, 1))
    return FomenkoGraph(band, E, verts, edges, (Family((1,), -1),))


# ---------------------------------------------------------------------------
# bifurcation complex and stability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BifurcationComplexCell:
    id: str
    lambda2_range: tuple[float, float]
    winding: int | None
    glued_along: HalfLine
    border: tuple[str, ...]

    def contains(self, table: BilliardTable, E: float, lambda2: float, tol: float = LEVEL_TOL) -> bool:
        lo, hi = self.lambda2_range
        return bool(in_image(table, E, lambda2, tol)) and lo - tol <= lambda2 <= hi + tol


@dataclass(frozen=True)
class BifurcationComplex:
    table: BilliardTable
    cells: tuple[BifurcationComplexCell, ...]
    gluing: HalfLine

    def cells_at(self, E: float, lambda2: float, tol: float = LEVEL_TOL) -> list[BifurcationComplexCell]:
        return [c for c in self.cells if c.contains(self.table, E, lambda2, tol)]

    def is_on_border(self, E: float, lambda2: float, tol: float = LEVEL_TOL) -> bool:
        """Whether ``(E, lambda2)`` lies on the boundary of the complex.

        Points of the gluing half-line (three cells meet) are inner points;
        the border consists of the ``lambda2 = a`` and ``lambda2 = 0``
        half-lines and the ``lambda1 = 0`` segments.
        """
        t = self.table
        if not in_image(t, E, lambda2, tol):
            raise EmptyLevelError(f"empty level: ({E!r}, {lambda2!r}) outside the image")
        if self.gluing.contains(E, lambda2, tol):
            return False
        lam1 = outer_parameter(t, E, lambda2)
        return abs(lambda2 - t.a) <= tol or abs(lambda2) <= tol or abs(lam1) <= tol


def bifurcation_complex(table: BilliardTable) -> BifurcationComplex:
    """Three 2-cells glued along ``{lambda2 = b, E >= sigma a/2}``.

    One cell carries the hyperbolic-caustic tori; the elliptic-caustic region
    is doubled, one sheet per winding direction.
    """
    a, b = table.a, table.b
    line_a, line_b, line_0 = bifurcation_set(table)
    cells = (
        BifurcationComplexCell(
            "hyperbolic", (b, a), None, line_b, (f"lambda2=a, E>={line_a.e_start!r}", "lambda1=0")
        ),
        BifurcationComplexCell(
            "elliptic+", (0.0, b), +1, line_b, (f"lambda2=0, E>={line_0.e_start!r}", "lambda1=0")
        ),
        BifurcationComplexCell(
            "elliptic-", (0.0, b), -1, line_b, (f"lambda2=0, E>={line_0.e_start!r}", "lambda1=0")
        ),
    )
    return BifurcationComplex(table, cells, line_b)


_ORBIT_LINE = {
    CriticalOrbit.MINOR_AXIS: 0,
    CriticalOrbit.MAJOR_AXIS: 1,
    CriticalOrbit.BOUNDARY_LIMIT: 2,
}


def classify_stability(table: BilliardTable, orbit: CriticalOrbit, energies: int = 5) -> StabilityClass:
    """Stability of a critical periodic orbit family from the topology.

    The family is followed along its half-line of the bifurcation set.  It is
    stable iff every level there is an ``A`` atom, equivalently iff the
    half-line lies on the border of the bifurcation complex; both criteria
    are evaluated and must agree.
    """
    line = bifurcation_set(table)[_ORBIT_LINE[orbit]]
    cplx = bifurcation_complex(table)
    scale = table.sigma * (table.a + table.b)
    verdicts = set()
    for k in range(energies):
        E = line.e_start + scale * k
        by_atom = classify_level(table, E, line.lambda2).atom is FomenkoAtom.A
        by_border = cplx.is_on_border(E, line.lambda2)
        if by_atom != by_border:
            raise RuntimeError(f"atom and complex disagree for {orbit} at E={E!r}")
        verdicts.add(by_atom)
    if len(verdicts) != 1:
        raise RuntimeError(f"stability of {orbit} changes along its half-line")
    return StabilityClass.STABLE if verdicts.pop() else StabilityClass.UNSTABLE
