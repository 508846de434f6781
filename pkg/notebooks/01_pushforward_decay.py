"""
Exact pushforwards of Bernoulli measures
========================================

How fast does the product rule kill the symbol 1, and how does xor spread a
biased coin towards the fair one?  Every number below is an exact rational.
"""
from fractions import Fraction

from cadyn.ca import builtin_rule
from cadyn.measures import bernoulli_p, cesaro_prob, pushforward_prob
from cadyn.oracles import closed_form_step, xor_one_prob
from cadyn.symbolic import Word

ONE = Word((1,))

# %% product rule: x_{i-2} * x_{i-1}
product = builtin_rule("product")
mu = bernoulli_p(Fraction(3, 10))
for n in range(6):
    print(f"n={n}  mass of [1] = {pushforward_prob(product, mu, ONE, n)}")

# Cesaro averages of a geometric sequence go to zero like 1/N.
series = cesaro_prob(product, mu, ONE, 12)
print("Cesaro at N=12:", series.values[-1], "~", float(series.values[-1]))

# %% xor rule: the mass of [1] only depends on the binary digit sum of n
xor = builtin_rule("xor")
quarter = bernoulli_p(Fraction(1, 4))
for n in (1, 2, 3, 4, 7, 8):
    exact = pushforward_prob(xor, quarter, ONE, n)
    assert exact == xor_one_prob(Fraction(1, 4), n)
    print(f"n={n}  {exact}")

# The dynamic programme costs about 2^n states for xor; the closed form is used
# for long Cesaro runs.
long_run = cesaro_prob(xor, quarter, ONE, 256, step=closed_form_step)
print("Cesaro at N=256:", float(long_run.values[-1]))
