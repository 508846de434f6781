"""
Gilman ratio of the slide rule
==============================

Sample pairs of points that agree on a window around the origin and estimate
how often their centre columns agree for the next T steps.  Ratios that stay
away from zero as the window grows point to equicontinuity in measure.
"""
from cadyn.ca import builtin_rule
from cadyn.catalog import resolve_measure
from cadyn.equicontinuity import GilmanParams, gilman_ratio

slide = builtin_rule("slide")
mu = resolve_measure("slide", slide.alphabet)

# %% a quick run; the acceptance configuration uses 2000 x 200 samples
params = GilmanParams(m=0, n_list=(1, 2, 4, 8), T=60, samples_x=300, samples_y=60)
res = gilman_ratio(slide, mu, params, seed=1)
print(res.csv())

# %% with the sampled window held fixed, the truncated ratio can only shrink as
# the horizon grows (same seed, same points, longer check)
for T in (10, 40, 160):
    p = GilmanParams(m=0, n_list=(4,), T=T, samples_x=200, samples_y=40, margin=170)
    r = gilman_ratio(slide, mu, p, seed=1)
    print(T, r.ratios())
