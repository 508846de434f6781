"""
Golden mean shift and its measure of maximal entropy
====================================================

The golden mean shift forbids "11".  Its entropy is log of the golden ratio
and its Parry measure is a one-step Markov chain.
"""
import math

from cadyn.ca import BINARY, builtin_rule
from cadyn.measures import check_mme_preservation_L, cylinder_prob
from cadyn.symbolic import Sft, Word, entropy, enumerate_words, parry_measure

golden = Sft.from_strings(BINARY, ["11"])

# %% word counts follow the Fibonacci numbers
print([len(enumerate_words(golden, L)) for L in range(1, 10)])
print("entropy", entropy(golden), "log phi", math.log((1 + 5 ** 0.5) / 2))

# %% Parry measure
mu = parry_measure(golden)
for row in mu.P:
    print(["%.6f" % float(v) for v in row])
for w in ("0", "1", "00", "01", "10"):
    print(w, "%.6f" % cylinder_prob(mu, Word(tuple(int(c) for c in w))))

# %% the identity restricted to the subshift preserves it, level by level
from dataclasses import replace

ident = replace(builtin_rule("identity"), sft=golden)
print(check_mme_preservation_L(ident, 4))
