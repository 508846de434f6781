"""Orbit-ball measure dynamics under a cellular automaton.

Orbit balls are always truncated: ``O_m^T(x)`` keeps only the constraints
(phi^i y)_{W_m} = (phi^i x)_{W_m} for i <= T, so its mass is an upper bound on
the true orbit-ball mass that decreases as T grows.  Limits are reported as
(last value, tail oscillation) pairs.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import io
from .ca import LocalRule, PeriodicConfig, column_trace, is_surjective_fullshift
from .equicontinuity import center_trace, default_horizon, light_cone, wilson
from .errors import ConfigError
from .measures import (
    CesaroSeries,
    MarkovMeasure,
    StepFn,
    check_invariance_L,
    cylinder_prob,
    pushforward_prob,
    sample_words,
    spacetime_mass,
)
from .rng import stream
from .symbolic import Word, enumerate_words


@dataclass(frozen=True)
class OrbitBallSpec:
    base: PeriodicConfig
    m: int
    T: int
    pp: int | None
    p: int | None
    rows: tuple[tuple[int, ...], ...]

    @property
    def is_lp(self) -> bool:
        return self.pp == 0

    def constraints(self, n: int = 0) -> dict[int, Word]:
        """Spacetime constraints of phi^{-n} O_m^T(x)."""
        return {n + i: Word(row, -self.m) for i, row in enumerate(self.rows)}

    def to_dict(self) -> dict:
        fmt = self.base.alphabet.format
        return {"base": fmt(self.base.cells), "m": self.m, "T": self.T, "pp_m": self.pp, "p_m": self.p,
                "rows": [fmt(r) for r in self.rows]}


def orbit_ball(rule: LocalRule, base: PeriodicConfig, m: int, T: int, horizon: int | None = None) -> OrbitBallSpec:
    horizon = max(T, horizon or default_horizon(len(base.alphabet), base.P))
    tr = column_trace(rule, base, m, horizon)
    return OrbitBallSpec(base, m, T, tr.pp, tr.p, tr.entries[: T + 1])


def truncated_orbit_ball_prob(rule: LocalRule, mu: MarkovMeasure, spec: OrbitBallSpec, n: int):
    """mu(phi^{-n} O_m^T(x)), exact."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return spacetime_mass(rule, mu, spec.constraints(n))


@dataclass(frozen=True)
class PhaseSequence:
    q: int
    p: int
    values: tuple
    non_decreasing: bool
    note: str = "orbit ball truncated; monotonicity is guaranteed only for the untruncated ball"

    @property
    def last(self):
        return self.values[-1]

    def to_dict(self) -> dict:
        return {"q": self.q, "p": self.p, "values": [io.format_number(v) for v in self.values],
                "non_decreasing": self.non_decreasing, "note": self.note}


def phase_sequence(rule: LocalRule, mu: MarkovMeasure, spec: OrbitBallSpec, q: int, n_max: int) -> PhaseSequence:
    """mu(phi^{-(p n + q)} O_m^T(x)) for n = 0..n_max along one residue class mod p_m."""
    if not spec.is_lp:
        raise ConfigError(f"base {spec.base} is not locally periodic at window m={spec.m}")
    p = spec.p
    if not 0 <= q < p:
        raise ValueError(f"phase q must lie in [0, {p})")
    vals = tuple(truncated_orbit_ball_prob(rule, mu, spec, p * n + q) for n in range(n_max + 1))
    return PhaseSequence(q, p, vals, all(b >= a for a, b in zip(vals, vals[1:])))


def _fmt(x):
    return io.format_number(x)


@dataclass
class ConvergenceReport:
    target: dict
    cesaro: CesaroSeries
    phase_limits: list | None
    predicted: object | None
    verdicts: dict
    tolerances: dict
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "cesaro": [_fmt(v) for v in self.cesaro.values],
            "steps": [_fmt(v) for v in self.cesaro.steps],
            "phase_limits": None if self.phase_limits is None else [_fmt(v) for v in self.phase_limits],
            "predicted_limit": None if self.predicted is None else _fmt(self.predicted),
            "verdicts": self.verdicts,
            "tolerances": self.tolerances,
            "seed": self.seed,
        }


def _orbit_ball_series(rule, mu, spec: OrbitBallSpec, N: int) -> CesaroSeries:
    return CesaroSeries.from_steps(spec.to_dict(), (truncated_orbit_ball_prob(rule, mu, spec, i) for i in range(1, N + 1)))


def limlep_report(rule: LocalRule, mu: MarkovMeasure, spec: OrbitBallSpec, N: int,
                  n_max: int = 4, threshold: float = 0.1) -> ConvergenceReport:
    """Cesaro series of an orbit ball against the periodic-phase prediction.

    LP base: predicted limit (1/p) sum_q (last phase value).  Non-LP base: the
    series must fall to ``threshold`` and keep decreasing over its second half.
    """
    series = _orbit_ball_series(rule, mu, spec, N)
    if spec.p is None:
        raise ConfigError("column of the base point did not close within the horizon")
    if spec.is_lp:
        phases = [phase_sequence(rule, mu, spec, q, n_max) for q in range(spec.p)]
        limits = [ph.last for ph in phases]
        predicted = sum(limits) / spec.p
        at_multiples = [series.values[n - 1] for n in range(spec.p, N + 1, spec.p)]
        exact = all(v == predicted for v in at_multiples)
        tail = series.tail_oscillation()
        verdicts = {
            "kind": "LP",
            "exact_at_multiples_of_p": exact,
            "tail_oscillation": _fmt(tail),
            "last_value": _fmt(series.values[-1]),
            "phase_non_decreasing": [ph.non_decreasing for ph in phases],
        }
        return ConvergenceReport(spec.to_dict(), series, limits, predicted, verdicts,
                                 {"T": spec.T, "N": N, "n_max": n_max})
    half = series.values[len(series.values) // 2:]
    decreasing = all(b <= a for a, b in zip(half, half[1:]))
    verdicts = {
        "kind": "LEP-not-LP",
        "decays": bool(decreasing and series.values[-1] <= threshold),
        "last_value": _fmt(series.values[-1]),
        "tail_decreasing": decreasing,
    }
    return ConvergenceReport(spec.to_dict(), series, None, Fraction(0), verdicts,
                             {"threshold": threshold, "T": spec.T, "N": N})


def cesaro_convergence_report(rule: LocalRule, mu: MarkovMeasure, targets: Sequence[OrbitBallSpec | Word], N: int,
                              tol: float = 0.05, step: StepFn | None = None) -> dict:
    """Cauchy-style check of Cesaro averages on orbit balls (or plain cylinders).

    Orbit balls determine weak limits, so agreement of the tails on the balls
    tested is the finite evidence reported here.
    """
    out = []
    for target in targets:
        if isinstance(target, OrbitBallSpec):
            series = _orbit_ball_series(rule, mu, target, N)
            desc = target.to_dict()
        else:
            fn = step or pushforward_prob
            series = CesaroSeries.from_steps(target, (fn(rule, mu, target, i) for i in range(1, N + 1)))
            desc = {"cylinder": mu.alphabet.format(target), "offset": target.offset}
        osc = series.tail_oscillation()
        out.append({
            "target": desc,
            "limit_estimate": {"last_value": _fmt(series.values[-1]), "tail_oscillation": _fmt(osc)},
            "cesaro": [_fmt(v) for v in series.values],
            "cauchy": bool(osc <= tol),
        })
    return {"N": N, "tolerance": tol, "targets": out,
            "justification": "orbit balls determine weak convergence; tails compared over n in [N/2, N]"}


@dataclass(frozen=True)
class BirkhoffSpec:
    event: OrbitBallSpec | Word
    W: int = 5000
    steps: int | tuple[int, ...] = 0
    samples: int = 1000

    def __post_init__(self):
        if self.W < 1 or self.samples < 1:
            raise ConfigError("need W >= 1 and samples >= 1")

    def event_constraints(self) -> dict[int, Word]:
        if isinstance(self.event, OrbitBallSpec):
            return self.event.constraints(0)
        return {0: self.event}


@dataclass
class BirkhoffResult:
    averages: np.ndarray
    steps_used: np.ndarray
    spec: BirkhoffSpec = field(repr=False)
    seed: int = 0

    def histogram(self, bins: int = 50) -> tuple[np.ndarray, np.ndarray]:
        return np.histogram(self.averages, bins=bins, range=(0.0, 1.0))

    def mass_near(self, a: float, delta: float) -> float:
        return float(np.mean(np.abs(self.averages - a) <= delta))

    def to_dict(self) -> dict:
        counts, edges = self.histogram(20)
        return {"samples": len(self.averages), "seed": self.seed, "W": self.spec.W,
                "mean": float(self.averages.mean()), "histogram": counts.tolist(),
                "edges": [round(e, 6) for e in edges.tolist()]}


def birkhoff_distribution(rule: LocalRule, mu: MarkovMeasure, spec: BirkhoffSpec, seed: int) -> BirkhoffResult:
    """Spatial Birkhoff averages of a truncated event over shifts -W..W, with y ~ phi^N mu.

    ``steps`` may be a tuple; sample s then uses N = steps[s mod len(steps)], a
    stratified draw from the uniform Cesaro mixture of the phi^N mu.
    """
    cons = spec.event_constraints()
    a, b = rule.window
    e_lo = min(w.offset for w in cons.values())
    e_hi = max(w.end for w in cons.values())
    top = max(cons)
    averages = np.empty(spec.samples)
    used = np.empty(spec.samples, dtype=np.int64)
    for s in range(spec.samples):
        rng = stream(seed, "birkhoff", s)
        N = spec.steps if isinstance(spec.steps, int) else spec.steps[s % len(spec.steps)]
        used[s] = N
        lo, hi = -spec.W + e_lo, spec.W + e_hi
        y_lo = lo + min(0, (N + top) * a)
        y_hi = hi + max(0, (N + top) * b)
        row = sample_words(mu, y_lo, y_hi, rng, 1).astype(np.uint8)
        for _ in range(N):
            row = rule.apply_array(row)
        start = y_lo - N * a
        hit = np.ones(2 * spec.W + 1, dtype=bool)
        for t in range(top + 1):
            if t in cons:
                w = cons[t]
                for i, sym in enumerate(w.symbols):
                    pos0 = -spec.W + w.offset + i - start
                    hit &= row[0, pos0:pos0 + 2 * spec.W + 1] == sym
            if t < top:
                row = rule.apply_array(row)
                start -= a
        averages[s] = hit.mean()
    return BirkhoffResult(averages, used, spec, seed)


@dataclass
class WitnessReport:
    found: bool
    verdict: str
    invariance: dict
    exact: dict
    sampled: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def ergodicity_witness(rule: LocalRule, mu: MarkovMeasure, spec: OrbitBallSpec, seed: int, *,
                       W: int = 5000, samples: int = 1000, L: int = 3, n_max: int = 4,
                       cycles: int = 2) -> WitnessReport:
    """Look for a shift-invariant event whose limit-measure mass is strictly between 0 and 1.

    When mu(O) != mu(phi^{-1} O) on an LP orbit ball O, the set of points whose
    spatial averages of 1_O equal mu(O^0) has limit mass in [1/p, (p-1)/p];
    its mass is estimated from Birkhoff averages sampled under the Cesaro mixture.
    """
    if not spec.is_lp:
        raise ConfigError("ergodicity witness needs a base point that is LP at the chosen window")
    v0 = truncated_orbit_ball_prob(rule, mu, spec, 0)
    v1 = truncated_orbit_ball_prob(rule, mu, spec, 1)
    inv = {f"L={l}": check_invariance_L(rule, mu, l).to_dict() for l in range(1, L + 1)}
    ball_invariant = v0 == v1
    exact = {"mu(O)": _fmt(v0), "mu(phi^-1 O)": _fmt(v1), "orbit_ball": spec.to_dict(),
             "ball_invariant": ball_invariant}
    if ball_invariant and all(d["holds"] for d in inv.values()):
        return WitnessReport(False, "no witness found (consistent with sigma-ergodic)", inv, exact)
    if ball_invariant:
        return WitnessReport(False, "mu not phi-invariant, but this orbit ball gives no witness", inv, exact)
    p = spec.p
    phases = [phase_sequence(rule, mu, spec, q, n_max).last for q in range(p)]
    target = float(phases[0])
    others = sorted({float(v) for v in phases if float(v) != target})
    delta = min([0.05] + [abs(o - target) / 2 for o in others])
    bspec = BirkhoffSpec(spec, W=W, steps=tuple(range(1, cycles * p + 1)), samples=samples)
    res = birkhoff_distribution(rule, mu, bspec, seed)
    hits = int(np.sum(np.abs(res.averages - target) <= delta))
    lo_ci, hi_ci = wilson(hits, samples)
    lower, upper = 1 / p, (p - 1) / p
    in_bounds = hi_ci >= lower and lo_ci <= upper
    exact["phase_limits"] = [_fmt(v) for v in phases]
    sampled = {"event_level": target, "delta": delta, "mass": hits / samples, "ci": [lo_ci, hi_ci],
               "bounds": [lower, upper], "within_bounds": in_bounds, "seed": seed, "samples": samples,
               "W": W, "steps": list(bspec.steps), "birkhoff": res.to_dict()}
    found = in_bounds and 0 < hits < samples
    verdict = "mu_inf not sigma-ergodic" if found else "witness inconclusive"
    return WitnessReport(found, verdict, inv, exact, sampled)


def sufficient_condition_check(rule: LocalRule, mu: MarkovMeasure, specs: Sequence[OrbitBallSpec], n_max: int) -> list[dict]:
    """Detect eventual exactness of phase sequences, with p_m consecutive exact repeats as confirmation.

    ``phases_eventually_exact`` is the per-phase stabilisation; ``limit_reached``
    additionally requires all phases to stabilise at one common value, which is
    the statement phi^n mu(O) = mu_inf(O) for all large n.
    """
    out = []
    for spec in specs:
        if not spec.is_lp:
            out.append({"spec": spec.to_dict(), "status": "skipped: base not LP at this window"})
            continue
        p = spec.p
        seq = [truncated_orbit_ball_prob(rule, mu, spec, i) for i in range(p * (n_max + 1))]
        per_phase = []
        for q in range(p):
            vals = seq[q::p]
            per_phase.append(_stabilised_from(vals, p))
        eventually = all(nq is not None for nq in per_phase)
        limits = {seq[q::p][-1] for q in range(p)} if eventually else set()
        reached = eventually and len(limits) == 1
        out.append({
            "spec": spec.to_dict(),
            "N_q": per_phase,
            "N_O": max(per_phase) if eventually else None,
            "phases_eventually_exact": eventually,
            "limit_reached": reached,
            "status": "established" if reached else "not established",
            "values": [_fmt(v) for v in seq],
        })
    return out


def _stabilised_from(vals: Sequence, run: int) -> int | None:
    """First index from which vals is constant, provided at least ``run`` repeats confirm it."""
    start = len(vals) - 1
    while start > 0 and vals[start - 1] == vals[-1]:
        start -= 1
    repeats = len(vals) - 1 - start
    return start if repeats >= run else None


def invariant_events(rule: LocalRule, L: int) -> list[frozenset]:
    """Unions S of L-cylinders at coordinate 0 with phi^{-1}[S] = [S] as sets."""
    sft = rule.ambient
    a, b = rule.window
    lo, hi = min(0, a), max(L - 1, L - 1 + b)
    words = [w.symbols for w in enumerate_words(sft, L)]
    ctx = [w.symbols for w in enumerate_words(sft, hi - lo + 1)]
    own = [c[-lo:-lo + L] for c in ctx]
    img = [tuple(rule.apply_array(np.asarray(c[a - lo:a - lo + L + rule.D - 1])[None, :])[0]) for c in ctx]
    out = []
    for r in range(1, len(words)):
        for S in itertools.combinations(words, r):
            S = frozenset(S)
            if all((o in S) == (i in S) for o, i in zip(own, img)):
                out.append(S)
    return out


def column_period(codes: np.ndarray, max_period: int) -> np.ndarray:
    """Least period of the second half of each row, or 0 when none <= max_period is seen."""
    tail = codes[:, codes.shape[1] // 2:]
    out = np.zeros(len(codes), dtype=np.int64)
    for p in range(max_period, 0, -1):
        ok = np.all(tail[:, p:] == tail[:, :-p], axis=1)
        out[ok] = p
    return out


def cyclic_factor_report(rule: LocalRule, mu: MarkovMeasure, m: int, horizon: int, samples: int, seed: int, *,
                         probe_period: int = 6, L: int = 2, tol: float = 0.05) -> dict:
    """Evidence for a cyclic-permutation factor of the limit measure.

    Combines (i) the distribution of central-column periods over sampled points
    and spatially periodic probes and (ii) an exact search for phi-invariant
    unions of cylinders whose limit mass lies strictly inside (0, 1).  Such an
    event rules out phi-ergodicity of the limit and hence any isomorphism to a
    cyclic permutation.
    """
    lo, hi = light_cone(rule, m, horizon)
    xs = np.concatenate([sample_words(mu, lo, hi, stream(seed, "cyclic", i), 1) for i in range(samples)]).astype(np.uint8)
    traces = center_trace(rule, xs, lo, m, horizon)
    n = len(mu.alphabet)
    codes = np.zeros(traces.shape[:2], dtype=np.int64)
    for c in range(traces.shape[2]):
        codes = codes * n + traces[:, :, c]
    periods = column_period(codes, max(1, horizon // 4))
    dist = {int(p): int(c) for p, c in zip(*np.unique(periods, return_counts=True))}
    top_p, top_c = max(dist.items(), key=lambda kv: (kv[1], -kv[0]))
    probes: dict[int, int] = {}
    for P in range(1, probe_period + 1):
        for cells in itertools.product(range(n), repeat=P):
            x = PeriodicConfig(mu.alphabet, cells)
            if not x.is_admissible(rule.ambient):
                continue
            tr = column_trace(rule, x, m, default_horizon(n, P))
            probes[tr.p] = probes.get(tr.p, 0) + 1
    events = []
    for length in range(1, L + 1):
        for S in invariant_events(rule, length):
            mass = sum(cylinder_prob(mu, Word(w)) for w in S)
            if 0 < mass < 1:
                events.append({"L": length, "words": sorted(mu.alphabet.format(w) for w in S), "mass": _fmt(mass)})
    dominant = top_p != 0 and top_c / samples >= 1 - tol
    witness = events[0] if events else None
    parts = [f"period {top_p} dominates (cyclic factor of size {top_p})" if dominant else "no dominant period"]
    if witness is not None:
        parts.append("invariant event with limit mass in (0,1): not phi-ergodic, so no cyclic-permutation isomorphism")
    elif dominant:
        parts.append("no invariant event found: consistent with a cyclic-permutation isomorphism")
    verdict = "; ".join(parts)
    return {
        "m": m, "horizon": horizon, "samples": samples, "seed": seed,
        "sampled_periods": {str(k): v for k, v in sorted(dist.items())},
        "dominant_period": top_p, "dominant_mass": top_c / samples, "dominates": dominant,
        "probe_periods": {str(k): v for k, v in sorted(probes.items())},
        "invariant_events": events[:10], "n_invariant_events": len(events),
        "phi_ergodic_witness": witness, "verdict": verdict,
        "labels": {"sampled_periods": "horizon-truncated", "invariant_events": "exact"},
    }


def surjectivity_summary(rule: LocalRule) -> dict:
    return {"surjective": is_surjective_fullshift(rule)}
