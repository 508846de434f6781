"""
Periodic points, local periodicity and cyclic factors
=====================================================

Periodic configurations have exactly computable orbits.  Classifying their
centre columns separates locally periodic points from those that only become
periodic eventually.
"""
from fractions import Fraction

from cadyn.ca import BINARY, builtin_rule, periodic_points
from cadyn.convergence import cyclic_factor_report
from cadyn.equicontinuity import classify_point
from cadyn.measures import bernoulli_p

# %% classify every period-3 point for a few rules
for name in ("product", "xor", "flip", "shift"):
    rule = builtin_rule(name)
    labels = {}
    for x in periodic_points(BINARY, 3):
        c = classify_point(rule, x, 0)
        labels.setdefault(c.label, []).append("".join(map(str, x.cells)))
    print(name, labels)

# %% the flip rule has a two-point factor carrying half the limit mass each
rep = cyclic_factor_report(builtin_rule("flip"), bernoulli_p(Fraction(3, 10)), 0, 40, 200, seed=3)
print(rep["dominant_period"], rep["dominant_mass"])
print(rep["verdict"])
