"""Named rules, subshifts, measures and pinned experiments.

Measures are addressed by short strings: ``"uniform"``, ``"bernoulli:3/10"``
(probability of the symbol ``1``), ``"parry"`` (measure of maximal entropy of
the ambient subshift), or a catalog name such as ``"slide"``.
"""
from __future__ import annotations

from fractions import Fraction

from .ca import BINARY, BUILTINS, SLIDE_ALPHABET, LocalRule, builtin_rule
from .errors import ConfigError
from .io import parse_rational
from .measures import MarkovMeasure, bernoulli, bernoulli_p, markov_chain, uniform
from .symbolic import Alphabet, Sft, parry_measure

RULES = tuple(BUILTINS)

SFTS = {
    "full2": Sft.full(BINARY),
    "full3": Sft.full(SLIDE_ALPHABET),
    "golden_mean": Sft.from_strings(BINARY, ["11"]),
}

SEED = 20240611


def _slide_measure() -> MarkovMeasure:
    return bernoulli(SLIDE_ALPHABET, {"-1": Fraction(3, 5), "0": Fraction(1, 5), "1": Fraction(1, 5)})


def _sticky_chain() -> MarkovMeasure:
    return markov_chain(BINARY, [[Fraction(2, 3), Fraction(1, 3)], [Fraction(1, 2), Fraction(1, 2)]])


MEASURES = {
    "slide": (_slide_measure, "Bernoulli on {-1,0,1} with weights 3/5, 1/5, 1/5"),
    "sticky": (_sticky_chain, "binary Markov chain, P(0->0) = 2/3, P(1->1) = 1/2"),
}


def resolve_measure(spec, alphabet: Alphabet, sft: Sft | None = None) -> MarkovMeasure:
    """Turn a measure string or JSON object into a measure on ``alphabet``."""
    if isinstance(spec, MarkovMeasure):
        return spec
    if isinstance(spec, dict):
        from .io import measure_from_json

        return measure_from_json(spec, alphabet)
    if not isinstance(spec, str):
        raise ConfigError(f"cannot interpret measure {spec!r}")
    if spec == "uniform":
        return uniform(alphabet)
    if spec == "parry":
        return parry_measure(sft or Sft.full(alphabet))
    if spec.startswith("bernoulli:"):
        if alphabet != BINARY:
            raise ConfigError("'bernoulli:p' is defined for the binary alphabet; give a measure object instead")
        p = parse_rational(spec.split(":", 1)[1])
        if not 0 <= p <= 1:
            raise ConfigError(f"probability {p} outside [0, 1]")
        return bernoulli_p(p)
    if spec in MEASURES:
        mu = MEASURES[spec][0]()
        if mu.alphabet != alphabet:
            raise ConfigError(f"measure {spec!r} lives on {mu.alphabet.symbols}, not {alphabet.symbols}")
        return mu
    from .io import measure_from_json

    return measure_from_json(spec, alphabet)


def resolve_sft(spec, alphabet: Alphabet | None = None) -> Sft | None:
    if spec is None or isinstance(spec, Sft):
        return spec
    if spec == "full":
        return Sft.full(alphabet or BINARY)
    if isinstance(spec, str) and spec in SFTS:
        return SFTS[spec]
    from .io import sft_from_json

    return sft_from_json(spec)


def default_measures(rule: LocalRule) -> list[tuple[str, MarkovMeasure]]:
    """Measures used when checking a rule against the brute-force oracle."""
    if rule.alphabet == SLIDE_ALPHABET:
        return [("slide", _slide_measure())]
    return [("bernoulli:3/10", bernoulli_p(Fraction(3, 10))), ("sticky", _sticky_chain())]


def rules() -> dict[str, LocalRule]:
    return {name: builtin_rule(name) for name in RULES}


# Experiments pinned for `cadyn run` one-liners; each is a complete run config.
EXPERIMENTS = {
    "product-decay": {"kind": "pushforward", "rule": "product", "measure": "bernoulli:1/2", "word": "1", "n": "0..8"},
    "product-cesaro": {"kind": "cesaro", "rule": "product", "measure": "bernoulli:3/10", "word": "1", "N": 200},
    "xor-cesaro": {"kind": "cesaro", "rule": "xor", "measure": "bernoulli:1/4", "word": "1", "N": 256},
    "xor-mme": {"kind": "mme", "rule": "xor", "sft": "full", "L": 4},
    "flip-limlep": {"kind": "limlep", "rule": "flip", "measure": "bernoulli:3/10", "base": "0", "m": 0, "T": 5, "N": 20},
    "product-limlep-10": {"kind": "limlep", "rule": "product", "measure": "bernoulli:1/2", "base": "10", "m": 0,
                          "T": 6, "N": 12},
    "flip-witness": {"kind": "ergodicity", "rule": "flip", "measure": "bernoulli:3/10", "base": "0", "m": 0, "T": 3,
                     "W": 5000, "samples": 1000, "seed": SEED},
    "flip-birkhoff": {"kind": "birkhoff", "rule": "flip", "measure": "bernoulli:3/10", "event": "0", "W": 5000,
                      "steps": [1, 2], "samples": 1000, "seed": SEED},
    "flip-cyclic": {"kind": "cyclic", "rule": "flip", "measure": "bernoulli:3/10", "m": 0, "horizon": 40,
                    "samples": 500, "seed": SEED},
    "slide-gilman": {"kind": "gilman", "rule": "slide", "measure": "slide", "m": 0, "n_list": [5, 10, 20], "T": 100,
                     "samples_x": 2000, "samples_y": 200, "seed": SEED},
    "product-y": {"kind": "y-measure", "rule": "product", "measure": "bernoulli:1/2", "m": 0, "p_max": 1,
                  "pp_max": 32, "T": 80, "samples": 2000, "seed": SEED},
    "classify": {"kind": "classify", "rule": "product", "points": ["1", "10", "0", "110"], "m": 0},
    "mmecor-xor": {"kind": "theorem", "name": "mmecor", "rule": "xor", "measure": "uniform", "seed": SEED},
    "mmecor-product": {"kind": "theorem", "name": "mmecor", "rule": "product", "measure": "uniform", "seed": SEED},
    "sigmaergodic-flip": {"kind": "theorem", "name": "sigmaergodic", "rule": "flip", "measure": "bernoulli:3/10",
                          "seed": SEED},
}


def listing() -> dict:
    return {
        "rules": {name: {"formula": BUILTINS[name][0], "alphabet": list(BUILTINS[name][1].symbols),
                         "window": list(BUILTINS[name][2])} for name in RULES},
        "sfts": {name: {"alphabet": list(s.alphabet.symbols),
                        "forbidden": sorted(s.alphabet.format(w) for w in s.forbidden)} for name, s in SFTS.items()},
        "measures": {"uniform": "uniform Bernoulli", "bernoulli:p": "binary Bernoulli with P(1) = p",
                     "parry": "measure of maximal entropy of the subshift",
                     **{k: v[1] for k, v in MEASURES.items()}},
        "experiments": EXPERIMENTS,
    }
