import json
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cadyn import io, limits
from cadyn.ca import BINARY, SLIDE_ALPHABET, builtin_rule
from cadyn.catalog import resolve_measure, resolve_sft
from cadyn.errors import ConfigError
from cadyn.measures import bernoulli_p, cylinder_prob, markov_chain
from cadyn.oracles import brute_pushforward, digit_sum, product_one_prob, xor_one_prob
from cadyn.rng import stream
from cadyn.symbolic import Sft, Word, parry_measure


def test_parse_rational():
    assert io.parse_rational("3/10") == Fraction(3, 10)
    assert io.parse_rational(2) == 2
    for bad in ("x", 0.5, True, "1/0"):
        with pytest.raises(ConfigError):
            io.parse_rational(bad)


def test_measure_json_roundtrip():
    chain = markov_chain(BINARY, [[Fraction(2, 3), Fraction(1, 3)], [Fraction(1, 2), Fraction(1, 2)]])
    for mu in (bernoulli_p(Fraction(3, 10)), chain):
        back = io.measure_from_json(json.loads(io.dumps(io.measure_to_json(mu))))
        assert back.pi == mu.pi and back.P == mu.P
    golden = Sft.from_strings(BINARY, ["11"])
    assert io.sft_from_json(io.sft_to_json(golden)) == golden


def test_measure_json_errors():
    with pytest.raises(ConfigError):
        io.measure_from_json({"kind": "gaussian"})
    with pytest.raises(ConfigError):
        io.measure_from_json({"kind": "bernoulli", "probs": {"0": "1/2", "1": "1/3"}})


def test_resolvers():
    assert resolve_measure("bernoulli:1/4", BINARY).P[0] == (Fraction(3, 4), Fraction(1, 4))
    assert resolve_measure("slide", SLIDE_ALPHABET).P[0][0] == Fraction(3, 5)
    assert resolve_measure("parry", BINARY, resolve_sft("golden_mean")).P[1][1] == 0
    with pytest.raises(ConfigError):
        resolve_measure("bernoulli:3/2", BINARY)
    with pytest.raises(ConfigError):
        resolve_measure("slide", BINARY)


def test_write_atomic(tmp_path):
    target = tmp_path / "a" / "b.json"
    io.write_atomic(target, "x\n")
    io.write_atomic(target, "y\n")
    assert target.read_text() == "y\n"
    assert os.listdir(target.parent) == ["b.json"]


def test_streams_are_addressed_by_path():
    a = stream(5, "gilman", "x", 3).integers(0, 2**32, 4)
    assert np.array_equal(a, stream(5, "gilman", "x", 3).integers(0, 2**32, 4))
    assert not np.array_equal(a, stream(5, "gilman", "x", 4).integers(0, 2**32, 4))
    assert not np.array_equal(a, stream(6, "gilman", "x", 3).integers(0, 2**32, 4))


def test_budget_environment_override():
    code = "from cadyn import limits; print(limits.get().dp_states)"
    env = dict(os.environ, CADYN_BUDGET='{"dp_states": 77}')
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "77"
    with limits.override(words=5):
        assert limits.get().words == 5
    assert limits.get().words == limits.Limits().words


@given(st.integers(0, 9), st.sampled_from([Fraction(1, 4), Fraction(1, 3), Fraction(3, 10)]))
def test_closed_forms_match_brute_force(n, p):
    mu = bernoulli_p(p)
    one = Word((1,))
    assert xor_one_prob(p, n) == brute_pushforward(builtin_rule("xor"), mu, one, n)
    assert product_one_prob(p, n) == brute_pushforward(builtin_rule("product"), mu, one, n)


def test_digit_sum():
    assert [digit_sum(n) for n in (0, 1, 6, 255, 256)] == [0, 1, 2, 8, 1]


def test_brute_force_respects_subshift():
    golden = Sft.from_strings(BINARY, ["11"])
    mu = parry_measure(golden)
    from dataclasses import replace

    ident = replace(builtin_rule("identity"), sft=golden)
    assert brute_pushforward(ident, mu, Word((1, 0)), 3) == pytest.approx(cylinder_prob(mu, Word((1, 0))), abs=1e-12)
