import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cadyn import limits
from cadyn.ca import (
    BINARY,
    BUILTINS,
    PeriodicConfig,
    apply_to_periodic,
    apply_to_word,
    builtin_rule,
    column_trace,
    detect_cycle,
    is_surjective_fullshift,
    parse_rule,
    preimage_counts,
    preimages,
    rule_from_json,
    rule_power,
    rule_to_json,
)
from cadyn.errors import CapacityError, ConfigError
from cadyn.symbolic import Sft, Word

binary_words = st.lists(st.integers(0, 1), min_size=1, max_size=12).map(tuple)


def w(text, offset=0):
    return BINARY.parse(text, offset)


def test_apply_xor_and_product():
    assert apply_to_word(builtin_rule("xor"), w("0110")) == w("101", 1)
    assert apply_to_word(builtin_rule("product"), w("110")) == w("10", 2)
    assert apply_to_word(builtin_rule("shift"), w("10", 5)) == w("10", 4)


def test_slide_rule_table():
    slide = builtin_rule("slide")
    A = slide.alphabet
    expected = {("1", "1"): "1", ("1", "0"): "1", ("1", "-1"): "0"}
    for a in A.symbols:
        for b in A.symbols:
            if a != "1":
                want = "0" if b == "1" else b
            else:
                want = expected[(a, b)]
            assert A.symbols[slide.lookup((A.index(a), A.index(b)))] == want
    assert A.format(apply_to_word(slide, A.parse("1,0,0,-1,1,1"))) == "1,0,-1,0,1"


@given(binary_words)
def test_identity_and_flip(cells):
    u = Word(cells)
    assert apply_to_word(builtin_rule("identity"), u) == u
    assert apply_to_word(builtin_rule("flip"), u).symbols == tuple(1 - c for c in cells)


def test_preimages_small():
    xor, prod = builtin_rule("xor"), builtin_rule("product")
    assert [BINARY.format(u) for u in preimages(xor, w("1"))] == ["01", "10"]
    assert [BINARY.format(u) for u in preimages(prod, w("1"))] == ["11"]
    assert all(u.offset == -2 for u in preimages(prod, w("1")))


@given(st.sampled_from(sorted(set(BUILTINS) - {"slide"})), st.lists(st.integers(0, 1), min_size=1, max_size=5))
def test_preimages_are_exactly_the_brute_force_set(name, target):
    rule = builtin_rule(name)
    target = Word(tuple(target))
    found = {u.symbols for u in preimages(rule, target)}
    L = len(target) + rule.D - 1
    brute = {u for u in np.ndindex(*(2,) * L) if apply_to_word(rule, Word(u)).symbols == target.symbols}
    assert found == brute


def test_surjectivity():
    assert {n: is_surjective_fullshift(builtin_rule(n)) for n in ("xor", "identity", "flip", "shift", "product")} == {
        "xor": True, "identity": True, "flip": True, "shift": True, "product": False}
    counts = preimage_counts(builtin_rule("product"), 1)
    assert counts.tolist() == [3, 1]


def test_rule_power_windows_and_tables():
    xor2 = rule_power(builtin_rule("xor"), 2)
    assert xor2.window == (-2, 0)
    for u in np.ndindex(2, 2, 2):
        assert xor2.lookup(u) == u[0] ^ u[2]
    assert rule_power(builtin_rule("product"), 2).window == (-4, -2)


@given(st.sampled_from(sorted(BUILTINS)), st.integers(1, 5), st.data())
def test_power_agrees_with_iteration(name, k, data):
    rule = builtin_rule(name)
    n = len(rule.alphabet)
    length = k * (rule.D - 1) + data.draw(st.integers(1, 6))
    row = np.array([data.draw(st.lists(st.integers(0, n - 1), min_size=length, max_size=length))])
    it = row
    for _ in range(k):
        it = rule.apply_array(it)
    assert np.array_equal(rule_power(rule, k).apply_array(row), it)
    assert np.array_equal(rule_power(rule, k, materialize=False).apply_array(row), it)


def test_rule_power_capacity():
    with limits.override(table=2**8):
        lazy = rule_power(builtin_rule("xor"), 20)
        assert lazy.table is None and lazy.window == (-20, 0)
        with pytest.raises(CapacityError):
            rule_power(builtin_rule("xor"), 20, materialize=True)


def test_json_roundtrip(tmp_path):
    for name in BUILTINS:
        rule = builtin_rule(name)
        back = rule_from_json(json.loads(json.dumps(rule_to_json(rule))))
        assert back.window == rule.window and np.array_equal(back.table, rule.table)
    path = tmp_path / "r.json"
    path.write_text(json.dumps(rule_to_json(builtin_rule("product"))))
    assert parse_rule(str(path)).window == (-2, -1)


def test_json_errors():
    with pytest.raises(ConfigError):
        rule_from_json({"alphabet": ["0", "1"], "window": [0, 1], "table": {"00": "0"}})
    with pytest.raises(ConfigError):
        rule_from_json({"alphabet": ["0", "1"], "window": [0, 0]})
    with pytest.raises(ConfigError):
        parse_rule("no-such-rule")


def test_sft_closure_checked():
    golden = {"alphabet": ["0", "1"], "forbidden": ["11"]}
    # flip maps 010 to 101, which stays admissible, but 00 -> 11 is forbidden
    flip = rule_to_json(builtin_rule("flip"))
    flip["sft"] = golden
    flip["table"] = {"0": "1", "1": "0"}
    with pytest.raises(ConfigError):
        rule_from_json(flip)
    ident = rule_to_json(builtin_rule("identity"))
    ident["sft"] = golden
    assert rule_from_json(ident).ambient == Sft.from_strings(BINARY, ["11"])


def test_periodic_application():
    x = PeriodicConfig.parse(BINARY, "10")
    assert apply_to_periodic(builtin_rule("product"), x).cells == (0, 0)
    assert apply_to_periodic(builtin_rule("shift"), PeriodicConfig.parse(BINARY, "110")).cells == (1, 0, 1)


def test_detect_cycle():
    assert detect_cycle(iter([1, 2, 3, 2, 3, 2])) == (1, 2)
    assert detect_cycle(iter(range(100)), horizon=10) is None


def test_column_traces():
    prod, flip = builtin_rule("product"), builtin_rule("flip")
    t = column_trace(prod, PeriodicConfig.parse(BINARY, "10"), 0, 10)
    assert (t.pp, t.p) == (1, 1)
    t = column_trace(flip, PeriodicConfig.parse(BINARY, "0"), 0, 10)
    assert (t.pp, t.p) == (0, 2) and t.entries[:3] == ((0,), (1,), (0,))
    # the shift moves a period-3 word; the centre column has period 3
    t = column_trace(builtin_rule("shift"), PeriodicConfig.parse(BINARY, "100"), 0, 10)
    assert (t.pp, t.p, t.config_p) == (0, 3, 3)
    # a block of length 4 whose least period is 2
    t = column_trace(builtin_rule("shift"), PeriodicConfig.parse(BINARY, "1010"), 0, 10)
    assert (t.p, t.config_p) == (2, 2)
