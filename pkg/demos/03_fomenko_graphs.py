"""Topology of the isoenergy manifolds, band by band.

Each energy band has its own Fomenko graph; above sigma*(a+b)/2 the graph
carries marks.  Component counts are checked against a direct orbit-based
count, and the stability of the three critical periodic families is read
off the bifurcation complex.
"""

from hooke_billiard import (
    BilliardTable,
    CriticalOrbit,
    bifurcation_complex,
    classify_level,
    classify_stability,
    count_components_numeric,
    fomenko_graph,
)

table = BilliardTable(a=2.0, b=1.0, sigma=1.0)
e_b, e_a, e_ab = table.band_energies()

for E in (e_b, (e_b + e_a) / 2, e_a, (e_a + e_ab) / 2, e_ab):
    print(fomenko_graph(table, E).to_text())

# a regular level with an elliptic inner caustic splits into two tori,
# one per winding direction
for E, lam2 in [(2.0, 0.3), (2.0, 1.5), (1.25, 0.5)]:
    level = classify_level(table, E, lam2)
    atom = level.atom.value if level.atom else "regular"
    numeric = count_components_numeric(table, E, lam2)
    print(f"(E={E}, lambda2={lam2}): {atom}, {level.components} components, orbit count {numeric}")

cplx = bifurcation_complex(table)
print("complex cells:", [c.id for c in cplx.cells])
for orbit in CriticalOrbit:
    print(orbit.value, "->", classify_stability(table, orbit).value)
