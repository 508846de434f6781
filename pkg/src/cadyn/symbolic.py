"""Alphabets, words, one-dimensional shifts of finite type and their Parry measures."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from . import limits
from .errors import CapacityError, ConfigError, ConvergenceError, ReducibleError

SEPARATOR = ","

POWER_RTOL = 1e-12
POWER_MAXITER = 10**5


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of symbol labels; symbols are referred to by index."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(str(s) for s in self.symbols))
        if not self.symbols:
            raise ConfigError("alphabet must be non-empty")
        if len(set(self.symbols)) != len(self.symbols):
            raise ConfigError(f"duplicate labels in alphabet {self.symbols}")
        if any(SEPARATOR in s or not s for s in self.symbols):
            raise ConfigError(f"labels must be non-empty and may not contain {SEPARATOR!r}")

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, label: str) -> int:
        try:
            return self.symbols.index(str(label))
        except ValueError:
            raise ConfigError(f"symbol {label!r} not in alphabet {self.symbols}") from None

    @property
    def multichar(self) -> bool:
        return any(len(s) > 1 for s in self.symbols)

    def format(self, word: Word | Sequence[int]) -> str:
        syms = word.symbols if isinstance(word, Word) else word
        sep = SEPARATOR if self.multichar else ""
        return sep.join(self.symbols[i] for i in syms)

    def parse(self, text: str, offset: int = 0) -> Word:
        """Inverse of :meth:`format`."""
        if text == "":
            return Word((), offset)
        if self.multichar or SEPARATOR in text:
            parts = text.split(SEPARATOR)
        else:
            parts = list(text)
        return Word(tuple(self.index(p) for p in parts), offset)


@dataclass(frozen=True)
class Word:
    """Finite block of symbol indices whose first symbol sits at coordinate ``offset``."""

    symbols: tuple[int, ...]
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    @property
    def end(self) -> int:
        """Coordinate of the last symbol."""
        return self.offset + len(self.symbols) - 1

    def at(self, offset: int) -> Word:
        return Word(self.symbols, offset)

    def check(self, alphabet: Alphabet) -> None:
        n = len(alphabet)
        if any(s < 0 or s >= n for s in self.symbols):
            raise ConfigError(f"word {self.symbols} has symbols outside alphabet of size {n}")


def cylinder(word: Word) -> Word:
    """The cylinder set [w] is identified with its defining word (offset included)."""
    return word


def ball(symbols: Sequence[int], m: int) -> Word:
    """The ball B_m around a point whose window W_m reads ``symbols``."""
    if len(symbols) != 2 * m + 1:
        raise ValueError(f"ball of radius {m} needs {2 * m + 1} symbols, got {len(symbols)}")
    return Word(tuple(symbols), -m)


@dataclass(frozen=True)
class Sft:
    """Shift of finite type given by forbidden words of a common length q."""

    alphabet: Alphabet
    forbidden: frozenset[tuple[int, ...]] = field(default_factory=frozenset)

    def __post_init__(self):
        forb = frozenset(tuple(int(s) for s in w) for w in self.forbidden)
        object.__setattr__(self, "forbidden", forb)
        lengths = {len(w) for w in forb}
        if len(lengths) > 1:
            raise ConfigError(f"forbidden words must share one length, got lengths {sorted(lengths)}")
        if 0 in lengths:
            raise ConfigError("forbidden words must be non-empty")
        for w in forb:
            Word(w).check(self.alphabet)

    @classmethod
    def full(cls, alphabet: Alphabet | Sequence[str]) -> Sft:
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        return cls(alphabet, frozenset())

    @classmethod
    def from_strings(cls, alphabet: Alphabet | Sequence[str], forbidden: Iterable[str]) -> Sft:
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        return cls(alphabet, frozenset(alphabet.parse(f).symbols for f in forbidden))

    @property
    def q(self) -> int:
        if not self.forbidden:
            return 1
        return len(next(iter(self.forbidden)))

    @property
    def is_full(self) -> bool:
        return not self.forbidden

    @property
    def state_length(self) -> int:
        """Length of the blocks used as states of the transition structure."""
        return max(self.q - 1, 1)


def is_admissible(sft: Sft, w: Word | Sequence[int]) -> bool:
    syms = tuple(w.symbols if isinstance(w, Word) else w)
    if not sft.forbidden:
        return True
    q = sft.q
    return not any(syms[i:i + q] in sft.forbidden for i in range(len(syms) - q + 1))


def _extend_ok(sft: Sft, word: tuple[int, ...]) -> bool:
    q = sft.q
    return len(word) < q or word[-q:] not in sft.forbidden


def enumerate_words(sft: Sft, L: int) -> list[Word]:
    """All admissible words of length L, in lexicographic order of symbol indices."""
    if L < 1:
        raise ValueError("L must be >= 1")
    n = len(sft.alphabet)
    if n**L > limits.get().words:
        raise CapacityError(f"|A|^L = {n}^{L} exceeds word enumeration cap {limits.get().words}")
    return [Word(w) for w in _admissible_tuples(sft, L)]


def _admissible_tuples(sft: Sft, L: int) -> list[tuple[int, ...]]:
    n = len(sft.alphabet)
    layer: list[tuple[int, ...]] = [()]
    for _ in range(L):
        layer = [w + (a,) for w in layer for a in range(n) if _extend_ok(sft, w + (a,))]
    return layer


@dataclass(frozen=True, eq=False)
class TransitionStructure:
    """Higher-block presentation: states are admissible blocks, edges admissible overlaps."""

    states: tuple[tuple[int, ...], ...]
    matrix: sparse.csr_array

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def index(self, state: Sequence[int]) -> int:
        return self.states.index(tuple(state))


def transition_structure(sft: Sft) -> TransitionStructure:
    s = sft.state_length
    n = len(sft.alphabet)
    if n**s > limits.get().states:
        raise CapacityError(f"state space {n}^{s} exceeds cap {limits.get().states}")
    states = _admissible_tuples(sft, s)
    index = {u: i for i, u in enumerate(states)}
    rows, cols = [], []
    for i, u in enumerate(states):
        for a in range(n):
            if not is_admissible(sft, u + (a,)):
                continue
            v = (u + (a,))[-s:]
            j = index.get(v)
            if j is not None:
                rows.append(i)
                cols.append(j)
    mat = sparse.csr_array(
        (np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(len(states), len(states))
    )
    return TransitionStructure(tuple(states), mat)


def _essential(ts: TransitionStructure) -> list[np.ndarray]:
    """Members of each strongly connected component that carries a cycle."""
    if not ts.states:
        return []
    _, labels = connected_components(ts.matrix, directed=True, connection="strong")
    diag = ts.matrix.diagonal()
    comps = []
    for lab in np.unique(labels):
        members = np.flatnonzero(labels == lab)
        if len(members) > 1 or diag[members[0]] > 0:
            comps.append(members)
    return comps


def is_irreducible(sft: Sft) -> bool:
    """True iff the subshift's graph has exactly one cycle-carrying strong component.

    States off that component cannot lie on a bi-infinite path, so they do not
    affect the subshift.
    """
    return len(_essential(transition_structure(sft))) == 1


def _core(sft: Sft) -> tuple[TransitionStructure, np.ndarray]:
    ts = transition_structure(sft)
    comps = _essential(ts)
    if len(comps) != 1:
        raise ReducibleError(f"SFT is not irreducible ({len(comps)} recurrent components)")
    return ts, comps[0]


def perron(matrix, *, rtol: float = POWER_RTOL, maxiter: int = POWER_MAXITER) -> tuple[float, np.ndarray]:
    """Perron root and positive right eigenvector of an irreducible non-negative matrix.

    Iterates with ``M + I``, which is primitive whenever ``M`` is irreducible, so
    periodic matrices converge too.
    """
    mat = sparse.csr_array(matrix, dtype=float)
    size = mat.shape[0]
    shifted = mat + sparse.identity(size, format="csr")
    v = np.full(size, 1.0 / size)
    for _ in range(maxiter):
        w = shifted @ v
        lam = w.sum() / v.sum()
        w /= w.sum()
        if np.max(np.abs(w - v)) <= rtol * np.max(np.abs(w)):
            return float(lam - 1.0), w
        v = w
    raise ConvergenceError(f"power iteration did not converge in {maxiter} steps")


def entropy(sft: Sft) -> float:
    """Topological entropy in nats."""
    ts, core = _core(sft)
    sub = ts.matrix[core][:, core]
    lam, _ = perron(sub)
    return float(np.log(lam))


def parry_measure(sft: Sft):
    """Shannon-Parry measure of maximal entropy, as a Markov measure on state blocks.

    Transition probabilities are floats: Perron data is irrational in general.
    """
    from .measures import MarkovMeasure

    ts, core = _core(sft)
    sub = ts.matrix[core][:, core]
    lam, right = perron(sub)
    _, left = perron(sub.T)
    dense = sub.toarray().astype(float)
    n = len(sft.alphabet)
    k = sft.state_length
    nstates = n**k
    pi = [0.0] * nstates
    P = [[0.0] * n for _ in range(nstates)]
    weights = left * right
    weights /= weights.sum()
    core_states = [ts.states[i] for i in core]
    for i, u in enumerate(core_states):
        code = _code(u, n)
        pi[code] = float(weights[i])
        for j, v in enumerate(core_states):
            if dense[i, j]:
                P[code][v[-1]] = float(right[j] / (lam * right[i]))
    return MarkovMeasure(sft.alphabet, k, tuple(pi), tuple(tuple(r) for r in P))


def _code(block: Sequence[int], n: int) -> int:
    c = 0
    for s in block:
        c = c * n + s
    return c


def all_words(alphabet_size: int, L: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(alphabet_size), repeat=L)
