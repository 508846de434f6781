"""
Two phases and a non-ergodic Cesaro limit
=========================================

The flip rule swaps 0 and 1 everywhere.  Under Bernoulli(3/10) the measure of
the ball around the fixed pattern "0" alternates between 7/10 and 3/10, so the
Cesaro limit is 1/2, but a typical point spends its whole life in one phase.
"""
from fractions import Fraction

from cadyn.ca import BINARY, PeriodicConfig, builtin_rule
from cadyn.convergence import BirkhoffSpec, birkhoff_distribution, ergodicity_witness, limlep_report, orbit_ball
from cadyn.measures import bernoulli_p

flip = builtin_rule("flip")
mu = bernoulli_p(Fraction(3, 10))
spec = orbit_ball(flip, PeriodicConfig.parse(BINARY, "0"), 0, 5)

# %% exact phase limits and their average
rep = limlep_report(flip, mu, spec, 20)
print("phase limits", [str(v) for v in rep.phase_limits], "average", rep.predicted)
print("Cesaro values", [str(v) for v in rep.cesaro.values[:6]], "...")

# %% Birkhoff averages along sampled points sit near 0.3 or 0.7, never 0.5
res = birkhoff_distribution(flip, mu, BirkhoffSpec(spec, W=2000, steps=(1, 2), samples=200), seed=7)
counts, edges = res.histogram()
for c, lo, hi in zip(counts, edges, edges[1:]):
    if c:
        print(f"[{lo:.2f}, {hi:.2f})  {'#' * (int(c) // 4)}")

# %% the witness bundles both pieces of evidence
w = ergodicity_witness(flip, mu, spec, seed=7, W=2000, samples=200)
print(w.verdict)
