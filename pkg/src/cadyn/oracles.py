"""Reference computations that share no code with the spacetime DP.

``brute_pushforward`` enumerates every word that could map onto the target and
iterates the one-step rule on it; the closed forms cover the two examples with
known formulas and serve as fast paths for long Cesaro series.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .ca import LocalRule, all_word_array, builtin_rule
from .measures import MarkovMeasure, cylinder_prob, pushforward_prob
from .symbolic import Word


def brute_pushforward_table(rule: LocalRule, mu: MarkovMeasure, L: int, n: int) -> dict[tuple[int, ...], object]:
    """(phi^n mu)[w] for every word w of length L, by summing mu over all preimage words."""
    base, k = rule.root()
    steps = n * k
    D = base.D
    length = L + steps * (D - 1)
    words = all_word_array(len(mu.alphabet), length)
    img = words
    for _ in range(steps):
        img = base.apply_array(img)
    out: dict[tuple[int, ...], object] = {}
    for u, w in zip(words.tolist(), img.tolist()):
        p = cylinder_prob(mu, Word(tuple(u)))
        if p:
            w = tuple(w)
            out[w] = out.get(w, 0) + p
    return out


def brute_pushforward(rule: LocalRule, mu: MarkovMeasure, w: Word, n: int):
    return brute_pushforward_table(rule, mu, len(w), n).get(w.symbols, 0)


def digit_sum(n: int) -> int:
    return bin(n).count("1")


def xor_one_prob(p, n: int) -> Fraction:
    """P((phi^n y)_0 = 1) for the xor rule and i.i.d. y with P(1) = p.

    (phi^n y)_0 is the sum mod 2 of 2^{s(n)} independent cells (Lucas), whence
    (1 - (1 - 2p)^{2^{s(n)}}) / 2.
    """
    p = Fraction(p)
    return (1 - (1 - 2 * p) ** (2 ** digit_sum(n))) / 2


def product_one_prob(p, n: int) -> Fraction:
    """P((phi^n y)_0 = 1) for the product rule: all n + 1 cells of the cone equal 1."""
    return Fraction(p) ** (n + 1)


_CLOSED_FORMS = {"xor": xor_one_prob, "product": product_one_prob}


def closed_form_step(rule: LocalRule, mu: MarkovMeasure, w: Word, n: int):
    """Step function for Cesaro series; uses a closed form when one applies, else the DP."""
    form = _CLOSED_FORMS.get(rule.name)
    if form is not None and _is_builtin(rule) and mu.memory == 0 and mu.exact and w.symbols == (1,):
        return form(mu.P[0][1], n)
    return pushforward_prob(rule, mu, w, n)



def _is_builtin(rule: LocalRule) -> bool:
    ref = builtin_rule(rule.name)
    return (rule.table is not None and rule.window == ref.window and rule.sft is None
            and np.array_equal(rule.table, ref.table))
