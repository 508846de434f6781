"""Shift-invariant finite-memory measures and their images under cellular automata.

Measures with rational parameters are handled in exact arithmetic throughout;
Parry measures carry float parameters and everything computed from them is
float.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from . import limits
from .ca import LocalRule
from .errors import CapacityError, ConfigError, ReducibleError, ZeroMeasureError
from .symbolic import Alphabet, Sft, Word, enumerate_words, is_irreducible, parry_measure

FLOAT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """Stationary Markov measure of memory ``k`` on a finite alphabet.

    ``pi[c]`` is the probability of the k-block with code ``c`` and ``P[c][a]``
    the probability that symbol ``a`` follows it.  Memory 0 is a Bernoulli
    measure, stored as ``pi == (1,)`` and a single row of marginals.
    """

    alphabet: Alphabet
    memory: int
    pi: tuple
    P: tuple

    def __post_init__(self):
        n, k = len(self.alphabet), self.memory
        if k < 0:
            raise ConfigError("memory must be >= 0")
        if len(self.pi) != n**k or len(self.P) != n**k or any(len(r) != n for r in self.P):
            raise ConfigError(f"memory-{k} measure on {n} symbols needs {n**k} states with {n} transitions")
        if any(p < 0 for p in self.pi) or any(p < 0 for r in self.P for p in r):
            raise ConfigError("probabilities must be non-negative")
        if not self._close(sum(self.pi), 1):
            raise ConfigError(f"stationary vector sums to {sum(self.pi)}")
        for c, row in enumerate(self.P):
            if self.pi[c] != 0 and not self._close(sum(row), 1):
                raise ConfigError(f"transition row for state {self.states()[c]} sums to {sum(row)}")
        if k > 0:
            flow = [0] * n**k
            for c in range(n**k):
                for a in range(n):
                    flow[(c * n + a) % n**k] += self.pi[c] * self.P[c][a]
            if not all(self._close(f, p) for f, p in zip(flow, self.pi)):
                raise ConfigError("stationary vector is not invariant under the transition matrix")

    def _close(self, x, y) -> bool:
        if self.exact:
            return x == y
        return abs(float(x) - float(y)) <= FLOAT_TOL

    @property
    def exact(self) -> bool:
        return all(isinstance(p, (int, Fraction)) for p in self.pi) and all(
            isinstance(p, (int, Fraction)) for r in self.P for p in r
        )

    def states(self) -> list[tuple[int, ...]]:
        n, k = len(self.alphabet), self.memory
        return [tuple(int(d) for d in np.unravel_index(c, (n,) * k)) if k else () for c in range(n**k)]

    def marginal(self, a: int):
        return cylinder_prob(self, Word((a,)))


def bernoulli(alphabet: Alphabet, probs: Mapping[str, object] | Sequence) -> MarkovMeasure:
    if isinstance(probs, Mapping):
        row = [Fraction(0)] * len(alphabet)
        for label, p in probs.items():
            row[alphabet.index(label)] = p if isinstance(p, float) else Fraction(p)
    else:
        row = [p if isinstance(p, float) else Fraction(p) for p in probs]
    return MarkovMeasure(alphabet, 0, (Fraction(1),), (tuple(row),))


def bernoulli_p(p, alphabet: Alphabet | None = None) -> MarkovMeasure:
    """Binary Bernoulli measure with P(1) = p."""
    from .ca import BINARY

    p = Fraction(p)
    return bernoulli(alphabet or BINARY, {"0": 1 - p, "1": p})


def uniform(alphabet: Alphabet) -> MarkovMeasure:
    return bernoulli(alphabet, [Fraction(1, len(alphabet))] * len(alphabet))


def markov_chain(alphabet: Alphabet, P: Sequence[Sequence]) -> MarkovMeasure:
    """One-step chain with exact rational transitions; the stationary vector is solved exactly."""
    rows = [[Fraction(p) for p in r] for r in P]
    return MarkovMeasure(alphabet, 1, tuple(_stationary(rows)), tuple(tuple(r) for r in rows))


def _stationary(P: list[list[Fraction]]) -> list[Fraction]:
    # solve pi (P - I) = 0, sum pi = 1 by Gauss-Jordan over the rationals
    n = len(P)
    A = [[P[j][i] - (1 if i == j else 0) for j in range(n)] + [Fraction(0)] for i in range(n)]
    A.append([Fraction(1)] * n + [Fraction(1)])
    rows, col_of = len(A), []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        A[r] = [v / A[r][c] for v in A[r]]
        for i in range(rows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [vi - f * vr for vi, vr in zip(A[i], A[r])]
        col_of.append(c)
        r += 1
    if r < n:
        raise ConfigError("transition matrix has no unique stationary vector")
    pi = [Fraction(0)] * n
    for i, c in enumerate(col_of):
        pi[c] = A[i][n]
    return pi


def cylinder_prob(mu: MarkovMeasure, w: Word):
    """Measure of the cylinder [w]; independent of the offset by shift invariance."""
    if len(w) == 0:
        raise ValueError("cylinder word must be non-empty")
    w.check(mu.alphabet)
    n, k = len(mu.alphabet), mu.memory
    syms = w.symbols
    if len(syms) < k:
        lo = _code(syms, n) * n ** (k - len(syms))
        return sum(mu.pi[lo:lo + n ** (k - len(syms))])
    code = _code(syms[:k], n)
    prob = mu.pi[code]
    mod = n**k
    for s in syms[k:]:
        if prob == 0:
            break
        prob = prob * mu.P[code][s]
        code = (code * n + s) % mod
    return prob


def _code(block: Sequence[int], n: int) -> int:
    c = 0
    for s in block:
        c = c * n + s
    return c


def _integer_weights(mu: MarkovMeasure):
    """(pi numerators, pi denominator, P numerators, P denominator); floats pass through."""
    if not mu.exact:
        return list(mu.pi), 1, [list(r) for r in mu.P], 1
    pden = math.lcm(*(Fraction(p).denominator for p in mu.pi))
    tden = math.lcm(*(Fraction(p).denominator for r in mu.P for p in r))
    pnum = [int(Fraction(p) * pden) for p in mu.pi]
    tnum = [[int(Fraction(p) * tden) for p in r] for r in mu.P]
    return pnum, pden, tnum, tden


def spacetime_mass(rule: LocalRule, mu: MarkovMeasure, constraints: Mapping[int, Word]):
    """mu{y : (phi^t y) restricted to the word's coordinates equals the word, for each t}.

    ``constraints`` maps a time t >= 0 to the required word.  The measure is
    computed by a left-to-right dynamic program over the time-0 row whose state
    is the Markov state plus the last D - 1 symbols produced at every time level
    below the top one.  That state carries exactly the information of the
    suffix of length t_max (D - 1) that a composed-rule scan would keep.
    """
    if not constraints:
        return Fraction(1) if mu.exact else 1.0
    root, k_pow = rule.root()
    if root.alphabet != mu.alphabet:
        raise ConfigError("rule and measure use different alphabets")
    levels = {t * k_pow: w for t, w in constraints.items()}
    n, k = len(mu.alphabet), mu.memory
    a, b = root.window
    D = root.D
    top = max(levels)
    lo = min(w.offset + t * a for t, w in levels.items())
    hi = max(w.end + t * b for t, w in levels.items())
    hi = max(hi, lo + k - 1)
    length = hi - lo + 1
    required: dict[tuple[int, int], int] = {}
    for t, w in levels.items():
        for i, s in enumerate(w.symbols):
            required[(t, w.offset + i)] = s

    table = root.table.tolist()
    mod = n ** (D - 1)
    mmod = n**k
    pnum, pden, tnum, tden = _integer_weights(mu)
    cap = limits.get().dp_states

    # per step j: which levels emit a new symbol, and the symbol they must emit
    plan = []
    for j in range(length):
        emits = []
        for t in range(top + 1):
            count = j + 1 - t * (D - 1)
            if count <= 0:
                break
            pos = lo - t * a + count - 1
            emits.append(required.get((t, pos)))
        plan.append(emits)

    states: dict[tuple, object] = {(0,) + (0,) * top: 1}
    for j in range(length):
        emits = plan[j]
        nxt: dict[tuple, object] = defaultdict(int)
        for state, mass in states.items():
            mcode = state[0]
            for s in range(n):
                if emits[0] is not None and emits[0] != s:
                    continue
                if j < k - 1:
                    w = mass
                elif j == k - 1:
                    w = mass * pnum[mcode * n + s]
                else:
                    w = mass * tnum[mcode][s]
                if not w:
                    continue
                bufs = list(state[1:])
                sym, window = s, 0
                ok = True
                for t in range(len(emits)):
                    if t > 0:
                        sym = table[window]
                        if emits[t] is not None and emits[t] != sym:
                            ok = False
                            break
                    if t < top:
                        window = bufs[t] * n + sym
                        bufs[t] = window % mod
                if not ok:
                    continue
                nxt[((mcode * n + s) % mmod if k else 0,) + tuple(bufs)] += w
        if len(nxt) > cap:
            raise CapacityError(f"pushforward DP reached {len(nxt)} states (cap {cap})")
        states = nxt
    total = sum(states.values())
    if mu.exact:
        steps = max(length - k, 0)
        return Fraction(total, pden * tden**steps)
    return float(total)


def pushforward_prob(rule: LocalRule, mu: MarkovMeasure, w: Word, n: int):
    """(phi^n mu)([w]) = mu(phi^{-n}[w])."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return cylinder_prob(mu, w)
    return spacetime_mass(rule, mu, {n: w})


StepFn = Callable[[LocalRule, MarkovMeasure, Word, int], object]


@dataclass(frozen=True)
class CesaroSeries:
    """Cesaro averages (1/n) sum_{i=1..n} (phi^i mu)(target) for n = 1..N."""

    target: object
    steps: tuple
    values: tuple

    @classmethod
    def from_steps(cls, target, steps) -> CesaroSeries:
        steps = tuple(steps)
        values, acc = [], 0
        for i, v in enumerate(steps, start=1):
            acc += v
            values.append(acc / i if not isinstance(acc, int) else Fraction(acc, i))
        return cls(target, steps, tuple(values))

    def tail_oscillation(self, start: int | None = None):
        """max - min of the averages over n in [start, N] (default start N // 2)."""
        N = len(self.values)
        start = max(N // 2, 1) if start is None else start
        tail = self.values[start - 1:]
        return max(tail) - min(tail)


def cesaro_prob(rule: LocalRule, mu: MarkovMeasure, w: Word, N: int, step: StepFn | None = None) -> CesaroSeries:
    """Exact Cesaro series of [w]; ``step`` replaces the DP (e.g. a closed form)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    step = step or pushforward_prob
    return CesaroSeries.from_steps(w, (step(rule, mu, w, i) for i in range(1, N + 1)))


def tv_distance_L(f: Callable[[Word], object], g: Callable[[Word], object], L: int, sft: Sft):
    """Half the l1 distance between two cylinder functionals on admissible L-words."""
    total = sum(abs(f(w) - g(w)) for w in enumerate_words(sft, L))
    return total / 2 if not isinstance(total, int) else Fraction(total, 2)


@dataclass(frozen=True)
class LevelCheck:
    """Outcome of a finite-level necessary-condition check."""

    holds: bool
    level: int
    counterexample: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {"holds": self.holds, "level": self.level, "counterexample": self.counterexample,
                "detail": self.detail, "kind": "necessary condition at finite level"}


def check_invariance_L(rule: LocalRule, mu: MarkovMeasure, L: int) -> LevelCheck:
    """phi mu = mu on every admissible cylinder of length exactly L (hence of every length <= L)."""
    if L < 1:
        raise ValueError("L must be >= 1")
    sft = rule.ambient
    for w in enumerate_words(sft, L):
        if not _equal(pushforward_prob(rule, mu, w, 1), cylinder_prob(mu, w), mu):
            return LevelCheck(False, L, mu.alphabet.format(w))
    return LevelCheck(True, L)


def _equal(x, y, mu: MarkovMeasure) -> bool:
    return x == y if mu.exact else abs(x - y) <= FLOAT_TOL


def check_mme_preservation_L(rule: LocalRule, L: int) -> LevelCheck:
    """Does phi fix the Parry measure on all cylinders of length <= L (tolerance 1e-9)?"""
    sft = rule.ambient
    if not is_irreducible(sft):
        raise ReducibleError("MME preservation check needs an irreducible SFT")
    mme = uniform(sft.alphabet) if sft.is_full else parry_measure(sft)
    for length in range(1, L + 1):
        for w in enumerate_words(sft, length):
            got, want = pushforward_prob(rule, mme, w, 1), cylinder_prob(mme, w)
            if abs(float(got) - float(want)) > FLOAT_TOL:
                return LevelCheck(False, L, sft.alphabet.format(w), f"phi(MME)={float(got):.12g} MME={float(want):.12g}")
    return LevelCheck(True, L)


def sample_words(mu: MarkovMeasure, lo: int, hi: int, rng: np.random.Generator, size: int,
                 pinned: Word | None = None) -> np.ndarray:
    """``size`` i.i.d. draws of the coordinates lo..hi from mu conditioned on ``pinned``.

    Returns an integer array of shape (size, hi - lo + 1).  Markov conditioning
    is exact: a forward filter over block states followed by backward sampling.
    """
    n, k = len(mu.alphabet), mu.memory
    width = hi - lo + 1
    if width < 1:
        raise ValueError("empty window")
    pins: dict[int, int] = {}
    if pinned is not None:
        pinned.check(mu.alphabet)
        if pinned.offset < lo or pinned.end > hi:
            raise ValueError(f"pinned word on [{pinned.offset}, {pinned.end}] leaves window [{lo}, {hi}]")
        pins = {pinned.offset + i - lo: s for i, s in enumerate(pinned.symbols)}
        if cylinder_prob(mu, pinned) == 0:
            raise ZeroMeasureError(f"pinned cylinder {mu.alphabet.format(pinned)} has measure zero")
    if k == 0:
        probs = np.array([float(p) for p in mu.P[0]])
        out = rng.choice(n, size=(size, width), p=probs / probs.sum())
        for j, s in pins.items():
            out[:, j] = s
        return out.astype(np.int64)
    if width < k:
        return sample_words(mu, lo, lo + k - 1, rng, size, pinned)[:, :width]
    return _ffbs(mu, width, pins, rng, size)


def _ffbs(mu: MarkovMeasure, width: int, pins: dict[int, int], rng: np.random.Generator, size: int) -> np.ndarray:
    n, k = len(mu.alphabet), mu.memory
    S = n**k
    digits = np.array([list(st) for st in mu.states()], dtype=np.int64)  # (S, k)
    pi = np.array([float(p) for p in mu.pi])
    T = np.zeros((S, S))
    for c in range(S):
        for a in range(n):
            T[c, (c * n + a) % S] = float(mu.P[c][a])
    last = digits[:, -1]

    def evidence(pos: int) -> np.ndarray:
        s = pins.get(pos)
        return np.ones(S) if s is None else (last == s).astype(float)

    # block state at position j covers coordinates j-k+1..j; first state at k-1
    first = np.ones(S)
    for i in range(k):
        if i in pins:
            first *= digits[:, i] == pins[i]
    alphas = [pi * first]
    for j in range(k, width):
        alpha = (alphas[-1] @ T) * evidence(j)
        alphas.append(alpha)
        z = alpha.sum()
        if z == 0:
            raise ZeroMeasureError("pinned event has measure zero")
        alphas[-1] = alpha / z
    if alphas[0].sum() == 0:
        raise ZeroMeasureError("pinned event has measure zero")

    states = np.empty((size, len(alphas)), dtype=np.int64)
    states[:, -1] = _draw(np.broadcast_to(alphas[-1], (size, S)), rng)
    for idx in range(len(alphas) - 2, -1, -1):
        weights = alphas[idx][None, :] * T[:, states[:, idx + 1]].T
        states[:, idx] = _draw(weights, rng)
    out = np.empty((size, width), dtype=np.int64)
    out[:, :k] = digits[states[:, 0]]
    out[:, k:] = last[states[:, 1:]]
    return out


def _draw(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(weights, axis=1)
    u = rng.random(len(weights)) * cum[:, -1]
    return np.minimum((cum <= u[:, None]).sum(axis=1), weights.shape[1] - 1)


def conditional_sample(mu: MarkovMeasure, pinned: Word | None, window: tuple[int, int],
                       rng: np.random.Generator) -> Word:
    """One word on ``window`` drawn from mu conditioned on the pinned cylinder."""
    lo, hi = window
    row = sample_words(mu, lo, hi, rng, 1, pinned)[0]
    return Word(tuple(int(s) for s in row), lo)
