import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cadyn import limits
from cadyn.ca import BINARY, SLIDE_ALPHABET
from cadyn.errors import CapacityError, ConfigError, ReducibleError
from cadyn.measures import cylinder_prob
from cadyn.symbolic import (
    Alphabet,
    Sft,
    Word,
    ball,
    entropy,
    enumerate_words,
    is_admissible,
    is_irreducible,
    parry_measure,
    perron,
    transition_structure,
)

GOLDEN = Sft.from_strings(BINARY, ["11"])


def test_alphabet_roundtrip_single_and_multichar():
    assert BINARY.format(BINARY.parse("0110")) == "0110"
    w = SLIDE_ALPHABET.parse("-1,0,1")
    assert w.symbols == (0, 1, 2)
    assert SLIDE_ALPHABET.format(w) == "-1,0,1"


def test_alphabet_rejects_bad_labels():
    with pytest.raises(ConfigError):
        Alphabet(("a", "a"))
    with pytest.raises(ConfigError):
        Alphabet(("a,b", "c"))
    with pytest.raises(ConfigError):
        BINARY.parse("012")


def test_word_coordinates():
    w = Word((1, 0, 1), -1)
    assert w.end == 1 and len(w) == 3
    assert ball((0, 1, 0), 1) == Word((0, 1, 0), -1)
    assert w.at(3).offset == 3
    with pytest.raises(ValueError):
        ball((0, 1), 1)


def test_golden_mean_language():
    words = [BINARY.format(w) for w in enumerate_words(GOLDEN, 3)]
    assert words == ["000", "001", "010", "100", "101"]
    assert not is_admissible(GOLDEN, (0, 1, 1))


@given(st.integers(1, 9))
def test_golden_mean_word_count_is_fibonacci(L):
    fib = [1, 2]
    while len(fib) <= L:
        fib.append(fib[-1] + fib[-2])
    assert len(enumerate_words(GOLDEN, L)) == fib[L]


def test_transition_matrices():
    assert transition_structure(GOLDEN).dense().tolist() == [[1, 1], [1, 0]]
    swap = Sft.from_strings(BINARY, ["00", "11"])
    assert transition_structure(swap).dense().tolist() == [[0, 1], [1, 0]]


def test_irreducibility():
    assert is_irreducible(GOLDEN)
    assert is_irreducible(Sft.full(BINARY))
    assert is_irreducible(Sft.from_strings(BINARY, ["00", "11"]))
    reducible = Sft.from_strings(BINARY, ["01", "10"])
    assert not is_irreducible(reducible)
    with pytest.raises(ReducibleError):
        entropy(reducible)


def test_entropies():
    assert entropy(GOLDEN) == pytest.approx(math.log((1 + math.sqrt(5)) / 2), abs=1e-12)
    assert entropy(Sft.full(SLIDE_ALPHABET)) == pytest.approx(math.log(3), abs=1e-12)
    assert entropy(Sft.from_strings(BINARY, ["00", "11"])) == pytest.approx(0.0, abs=1e-12)


def test_entropy_of_longer_forbidden_words():
    # no "111": tribonacci-like growth, root of x^3 = x^2 + x + 1
    sft = Sft.from_strings(BINARY, ["111"])
    root = max(r.real for r in np.roots([1, -1, -1, -1]) if abs(r.imag) < 1e-12)
    assert entropy(sft) == pytest.approx(math.log(root), abs=1e-10)


@given(st.lists(st.lists(st.integers(0, 3), min_size=4, max_size=4), min_size=4, max_size=4))
def test_perron_agrees_with_eigvals(rows):
    mat = np.array(rows, dtype=float) + np.eye(4, k=1) + np.eye(4, k=-3)  # irreducible: contains a 4-cycle
    lam, vec = perron(mat)
    assert lam == pytest.approx(max(abs(np.linalg.eigvals(mat))), rel=1e-9)
    assert np.all(vec > 0)
    assert np.allclose(mat @ vec, lam * vec, atol=1e-9)


def test_parry_golden_mean():
    mu = parry_measure(GOLDEN)
    phi = (1 + math.sqrt(5)) / 2
    assert mu.P[0][0] == pytest.approx(1 / phi, abs=1e-12)
    assert mu.P[1] == pytest.approx((1.0, 0.0), abs=1e-12)
    assert mu.P[1][1] == 0
    assert mu.pi[0] == pytest.approx(phi**2 / (1 + phi**2), abs=1e-12)
    assert cylinder_prob(mu, Word((1, 1))) == 0


def test_parry_full_shift_is_uniform():
    mu = parry_measure(Sft.full(BINARY))
    for w in enumerate_words(Sft.full(BINARY), 3):
        assert cylinder_prob(mu, w) == pytest.approx(1 / 8, abs=1e-12)


def test_enumeration_cap():
    with limits.override(words=100):
        with pytest.raises(CapacityError):
            enumerate_words(Sft.full(BINARY), 7)


def test_mixed_length_forbidden_words_rejected():
    with pytest.raises(ConfigError):
        Sft.from_strings(BINARY, ["11", "000"])
