from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cadyn.ca import BINARY, PeriodicConfig, builtin_rule
from cadyn.convergence import (
    BirkhoffSpec,
    birkhoff_distribution,
    cesaro_convergence_report,
    cyclic_factor_report,
    ergodicity_witness,
    invariant_events,
    limlep_report,
    orbit_ball,
    phase_sequence,
    sufficient_condition_check,
    truncated_orbit_ball_prob,
)
from cadyn.errors import ConfigError
from cadyn.measures import bernoulli_p, cylinder_prob, markov_chain, uniform
from cadyn.symbolic import Word

F = Fraction
HALF = bernoulli_p(F(1, 2))
binary_rules = st.sampled_from(["xor", "product", "identity", "flip", "shift"])
measures = st.sampled_from([bernoulli_p(F(3, 10)), markov_chain(BINARY, [[F(2, 3), F(1, 3)], [F(1, 2), F(1, 2)]])])


def point(text):
    return PeriodicConfig.parse(BINARY, text)


def test_truncated_ball_examples(flip, product, mu3):
    assert truncated_orbit_ball_prob(flip, mu3, orbit_ball(flip, point("0"), 0, 5), 0) == F(7, 10)
    assert truncated_orbit_ball_prob(product, HALF, orbit_ball(product, point("1"), 0, 3), 0) == F(1, 2**7)
    ident = builtin_rule("identity")
    spec = orbit_ball(ident, point("011"), 1, 4)
    for n in range(4):
        assert truncated_orbit_ball_prob(ident, mu3, spec, n) == cylinder_prob(mu3, Word(spec.rows[0], -1))


def test_orbit_ball_rows_repeat(flip):
    spec = orbit_ball(flip, point("01"), 1, 7)
    assert all(len(r) == 3 for r in spec.rows)
    assert all(spec.rows[i + spec.p] == spec.rows[i] for i in range(spec.pp, len(spec.rows) - spec.p))


@given(binary_rules, measures, st.sampled_from(["0", "1", "10", "110"]), st.integers(0, 1), st.integers(0, 2))
def test_truncation_monotone_in_T(name, mu, base, m, n):
    rule = builtin_rule(name)
    vals = [truncated_orbit_ball_prob(rule, mu, orbit_ball(rule, point(base), m, T), n) for T in range(4)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


@given(binary_rules, measures, st.sampled_from(["0", "1", "01", "011"]), st.integers(0, 2))
def test_shifted_phase_dominates_longer_ball(name, mu, base, n):
    """mu(phi^-(p(n+1)+q) O^T) >= mu(phi^-(pn+q) O^(T+p)) for LP bases."""
    rule = builtin_rule(name)
    spec = orbit_ball(rule, point(base), 0, 2)
    if not spec.is_lp:
        return
    p = spec.p
    longer = orbit_ball(rule, point(base), 0, 2 + p)
    for q in range(p):
        assert truncated_orbit_ball_prob(rule, mu, spec, p * (n + 1) + q) >= \
            truncated_orbit_ball_prob(rule, mu, longer, p * n + q)


@pytest.mark.parametrize("name,base", [("flip", "0"), ("flip", "01"), ("identity", "011"), ("shift", "001")])
def test_phase_non_decreasing(name, base, mu3):
    rule = builtin_rule(name)
    spec = orbit_ball(rule, point(base), 0, 3)
    for q in range(spec.p):
        assert phase_sequence(rule, mu3, spec, q, 8).non_decreasing


def test_phases_can_decrease_under_truncation(product, xor, mu3):
    # the untruncated balls have mass 0 here; truncated masses drift down towards it
    spec = orbit_ball(product, point("1"), 0, 3)
    ph = phase_sequence(product, HALF, spec, 0, 4)
    assert ph.values == tuple(F(1, 2 ** (n + 7)) for n in range(5))
    assert not ph.non_decreasing and "truncated" in ph.note
    ph = phase_sequence(xor, mu3, orbit_ball(xor, point("0"), 0, 3), 0, 4)
    assert not ph.non_decreasing


def test_flip_phases(flip, mu3):
    spec = orbit_ball(flip, point("0"), 0, 5)
    assert set(phase_sequence(flip, mu3, spec, 0, 6).values) == {F(7, 10)}
    assert set(phase_sequence(flip, mu3, spec, 1, 6).values) == {F(3, 10)}
    with pytest.raises(ValueError):
        phase_sequence(flip, mu3, spec, 2, 3)


def test_phase_requires_lp(product):
    with pytest.raises(ConfigError):
        phase_sequence(product, HALF, orbit_ball(product, point("10"), 0, 3), 0, 2)


def test_limlep_flip(flip, mu3):
    rep = limlep_report(flip, mu3, orbit_ball(flip, point("0"), 0, 5), 16)
    assert rep.phase_limits == [F(7, 10), F(3, 10)] and rep.predicted == F(1, 2)
    assert all(rep.cesaro.values[n - 1] == F(1, 2) for n in range(2, 17, 2))
    assert rep.verdicts["exact_at_multiples_of_p"]


def test_limlep_identity(mu3):
    ident = builtin_rule("identity")
    rep = limlep_report(ident, mu3, orbit_ball(ident, point("01"), 1, 3), 6)
    assert set(rep.cesaro.values) == {rep.predicted} == {cylinder_prob(mu3, Word((1, 0, 1), -1))}


def test_limlep_non_lp_decays(product):
    rep = limlep_report(product, HALF, orbit_ball(product, point("10"), 0, 6), 12)
    assert rep.verdicts["kind"] == "LEP-not-LP" and rep.verdicts["decays"]
    # each step needs (phi^n y)_0 = 1, which has mass 2^-(n+1)
    assert all(v <= F(1, 2 ** (n + 1)) for n, v in enumerate(rep.cesaro.steps, start=1))


def test_cesaro_reports(flip, mu3, product):
    ident = builtin_rule("identity")
    rep = cesaro_convergence_report(ident, mu3, [orbit_ball(ident, point("01"), 0, 3), Word((1, 1))], 10)
    assert all(t["limit_estimate"]["tail_oscillation"] == "0" for t in rep["targets"])
    N = 20
    rep = cesaro_convergence_report(flip, mu3, [Word((0,))], N)
    assert F(rep["targets"][0]["limit_estimate"]["tail_oscillation"]) <= F(2, 5) / (N // 2)
    rep = cesaro_convergence_report(product, HALF, [Word((1,))], 16)
    assert F(rep["targets"][0]["limit_estimate"]["last_value"]) < F(1, 16)


def test_birkhoff_examples(flip, mu3):
    ident = builtin_rule("identity")
    res = birkhoff_distribution(ident, HALF, BirkhoffSpec(Word((1,)), W=2000, samples=40), seed=3)
    assert abs(res.averages.mean() - 0.5) < 0.02 and res.averages.std() < 0.03
    even = birkhoff_distribution(flip, mu3, BirkhoffSpec(Word((0,)), W=2000, steps=2, samples=30), seed=3)
    odd = birkhoff_distribution(flip, mu3, BirkhoffSpec(Word((0,)), W=2000, steps=1, samples=30), seed=3)
    assert even.mass_near(0.7, 0.05) == 1.0 and odd.mass_near(0.3, 0.05) == 1.0
    mix = birkhoff_distribution(flip, mu3, BirkhoffSpec(Word((0,)), W=2000, steps=(1, 2), samples=40), seed=3)
    assert mix.mass_near(0.7, 0.05) == 0.5 and mix.mass_near(0.3, 0.05) == 0.5


def test_birkhoff_deterministic(flip, mu3):
    spec = BirkhoffSpec(orbit_ball(flip, point("0"), 0, 2), W=300, steps=(1, 2, 3), samples=12)
    a = birkhoff_distribution(flip, mu3, spec, seed=8).averages
    assert (a == birkhoff_distribution(flip, mu3, spec, seed=8).averages).all()


def test_birkhoff_spec_validated():
    with pytest.raises(ConfigError):
        BirkhoffSpec(Word((1,)), W=0)


def test_ergodicity_witness(flip, mu3):
    spec = orbit_ball(flip, point("0"), 0, 3)
    w = ergodicity_witness(flip, mu3, spec, seed=1, W=1000, samples=200)
    assert w.found and w.verdict == "mu_inf not sigma-ergodic"
    lo, hi = w.sampled["ci"]
    assert lo <= 0.5 <= hi
    assert not ergodicity_witness(flip, HALF, spec, seed=1, W=1000, samples=200).found
    ident = builtin_rule("identity")
    assert not ergodicity_witness(ident, mu3, orbit_ball(ident, point("01"), 0, 3), seed=1).found
    with pytest.raises(ConfigError):
        ergodicity_witness(builtin_rule("product"), HALF, orbit_ball(builtin_rule("product"), point("10"), 0, 3), seed=1)


def test_sufficient_condition(flip, mu3, product):
    [r] = sufficient_condition_check(flip, mu3, [orbit_ball(flip, point("0"), 0, 5)], 4)
    assert r["N_O"] == 0 and r["phases_eventually_exact"] and not r["limit_reached"]
    assert r["status"] == "not established"
    ident = builtin_rule("identity")
    [r] = sufficient_condition_check(ident, mu3, [orbit_ball(ident, point("01"), 0, 3)], 3)
    assert r["N_O"] == 0 and r["limit_reached"] and r["status"] == "established"
    [r] = sufficient_condition_check(product, HALF, [orbit_ball(product, point("1"), 0, 3)], 4)
    assert r["status"] == "not established"


def test_invariant_events(flip):
    events = invariant_events(flip, 2)
    assert frozenset({(0, 0), (1, 1)}) in events and frozenset({(0, 1), (1, 0)}) in events
    assert invariant_events(flip, 1) == []


def test_cyclic_factor_reports(flip, mu3, product):
    ident = builtin_rule("identity")
    r = cyclic_factor_report(ident, HALF, 0, 20, 50, seed=2, probe_period=3)
    assert r["dominant_period"] == 1 and r["dominant_mass"] == 1.0
    r = cyclic_factor_report(flip, mu3, 0, 20, 50, seed=2, probe_period=3)
    assert r["dominant_period"] == 2 and r["dominates"]
    assert r["phi_ergodic_witness"]["words"] == ["00", "11"] and r["phi_ergodic_witness"]["mass"] == "29/50"
    r = cyclic_factor_report(product, HALF, 0, 40, 50, seed=2, probe_period=3)
    assert r["dominant_period"] == 1 and r["dominates"]


def test_uniform_invariance_gives_no_witness(xor):
    spec = orbit_ball(xor, point("0"), 0, 2)
    assert not ergodicity_witness(xor, uniform(BINARY), spec, seed=1).found
