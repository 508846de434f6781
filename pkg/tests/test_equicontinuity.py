import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cadyn.ca import BINARY, BUILTINS, PeriodicConfig, builtin_rule, column_trace
from cadyn.catalog import resolve_measure
from cadyn.equicontinuity import (
    CSV_HEADER,
    GilmanParams,
    YParams,
    center_trace,
    classify_point,
    estimate_Y_measure,
    gilman_ratio,
    is_locally_periodic,
    light_cone,
    mu_equicontinuity_verdict,
    wilson,
)
from cadyn.errors import ConfigError
from cadyn.measures import bernoulli_p, uniform

SMALL = GilmanParams(m=0, n_list=(2, 4), T=6, samples_x=60, samples_y=40)


def test_wilson_interval_matches_formula():
    k, n, z = 37, 120, 1.959963984540054
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    lo, hi = wilson(k, n)
    assert lo == pytest.approx(centre - half, abs=1e-9) and hi == pytest.approx(centre + half, abs=1e-9)


def test_light_cone():
    assert light_cone(builtin_rule("product"), 1, 3) == (-7, 1)
    assert light_cone(builtin_rule("shift"), 0, 4) == (0, 4)


@given(st.sampled_from(sorted(BUILTINS)), st.integers(1, 4), st.integers(0, 1), st.data())
def test_center_trace_matches_column_trace(name, P, m, data):
    rule = builtin_rule(name)
    cells = tuple(data.draw(st.lists(st.integers(0, len(rule.alphabet) - 1), min_size=P, max_size=P)))
    x = PeriodicConfig(rule.alphabet, cells)
    T = 6
    lo, hi = light_cone(rule, m, T)
    row = np.array([x.window(lo, hi)])
    tr = center_trace(rule, row, lo, m, T)[0]
    assert [tuple(r) for r in tr] == list(column_trace(rule, x, m, T).entries[: T + 1])


def test_gilman_identity_is_one():
    res = gilman_ratio(builtin_rule("identity"), uniform(BINARY), SMALL, seed=4)
    assert res.ratios() == [1.0, 1.0]
    assert res.csv().splitlines()[0] == CSV_HEADER


def test_gilman_shift_matches_exact_ratio():
    params = GilmanParams(m=0, n_list=(2,), T=4, samples_x=200, samples_y=100)
    res = gilman_ratio(builtin_rule("shift"), uniform(BINARY), params, seed=5)
    row = res.rows[0]
    assert row.ci_low <= 0.25 <= row.ci_high


def test_gilman_non_increasing_in_horizon():
    rule, mu = builtin_rule("slide"), resolve_measure("slide", builtin_rule("slide").alphabet)
    base = GilmanParams(m=0, n_list=(3,), T=5, samples_x=40, samples_y=30, margin=40)
    r = [gilman_ratio(rule, mu, replace(base, T=T), seed=6).ratios()[0] for T in (5, 10, 20, 40)]
    assert all(b <= a for a, b in zip(r, r[1:]))


def test_gilman_deterministic():
    rule = builtin_rule("xor")
    a = gilman_ratio(rule, uniform(BINARY), SMALL, seed=11).csv()
    assert a == gilman_ratio(rule, uniform(BINARY), SMALL, seed=11).csv()


def test_gilman_margin_validated():
    with pytest.raises(ConfigError):
        gilman_ratio(builtin_rule("xor"), uniform(BINARY), replace(SMALL, margin=3), seed=1)


def test_y_measure_examples():
    params = YParams(m=0, p_max=1, pp_max=32, T=80, samples=300)
    assert estimate_Y_measure(builtin_rule("product"), bernoulli_p(Fraction(1, 2)), params, 1).estimate == 1.0
    assert estimate_Y_measure(builtin_rule("identity"), uniform(BINARY), params, 1).estimate == 1.0
    assert estimate_Y_measure(builtin_rule("shift"), uniform(BINARY), params, 1).estimate == 0.0
    flip = estimate_Y_measure(builtin_rule("flip"), uniform(BINARY), replace(params, p_max=2), 1)
    assert flip.estimate == 1.0


def test_y_params_validated():
    with pytest.raises(ConfigError):
        YParams(pp_max=40, T=20)


def test_classification_examples():
    prod, flip = builtin_rule("product"), builtin_rule("flip")
    c = classify_point(prod, PeriodicConfig.parse(BINARY, "1"), 0)
    assert (c.label, c.pp_m, c.p_m) == ("LP", 0, 1)
    c = classify_point(prod, PeriodicConfig.parse(BINARY, "10"), 0)
    assert (c.label, c.pp_m, c.p_m) == ("LEP-not-LP", 1, 1)
    c = classify_point(flip, PeriodicConfig.parse(BINARY, "0"), 0)
    assert (c.label, c.pp_m, c.p_m) == ("LP", 0, 2)
    assert is_locally_periodic(builtin_rule("shift"), PeriodicConfig.parse(BINARY, "0110"))
    assert not is_locally_periodic(prod, PeriodicConfig.parse(BINARY, "110"))


@given(st.sampled_from(sorted(BUILTINS)), st.integers(1, 6), st.data())
def test_lp_iff_recurrent(name, P, data):
    rule = builtin_rule(name)
    cells = tuple(data.draw(st.lists(st.integers(0, len(rule.alphabet) - 1), min_size=P, max_size=P)))
    x = PeriodicConfig(rule.alphabet, cells)
    c = classify_point(rule, x, P // 2)
    assert c.recurrent is not None
    assert (c.label == "LP") == c.recurrent


def test_verdict_is_evidence_only():
    v = mu_equicontinuity_verdict(builtin_rule("identity"), uniform(BINARY), SMALL,
                                  YParams(m=0, p_max=1, pp_max=4, T=6, samples=50), seed=2)
    assert v.evidence_only and v.verdict == "consistent with mu-equicontinuous"
    v = mu_equicontinuity_verdict(builtin_rule("shift"), uniform(BINARY), replace(SMALL, T=12),
                                  YParams(m=0, p_max=1, pp_max=4, T=12, samples=50), seed=2)
    assert v.verdict == "consistent with not mu-equicontinuous"
