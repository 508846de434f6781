"""Sliding block codes on one-dimensional shifts.

A :class:`LocalRule` reads the contiguous window ``[a, b]`` around each cell,
``(phi x)_i = table[x_{i+a} ... x_{i+b}]``.  Tables are indexed by the base-|A|
code of the window, most significant digit leftmost.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import limits
from .errors import CapacityError, ConfigError
from .symbolic import Alphabet, Sft, Word, is_admissible

BINARY = Alphabet(("0", "1"))
SLIDE_ALPHABET = Alphabet(("-1", "0", "1"))


@dataclass(frozen=True, eq=False)
class LocalRule:
    alphabet: Alphabet
    window: tuple[int, int]
    table: np.ndarray | None
    sft: Sft | None = None
    name: str = ""
    base: LocalRule | None = None
    power: int = 1

    def __post_init__(self):
        a, b = self.window
        if a > b:
            raise ConfigError(f"window [{a}, {b}] is empty")
        if self.table is None and self.base is None:
            raise ConfigError("rule needs a table or a base rule")
        if self.table is not None:
            tbl = np.asarray(self.table, dtype=np.int64)
            if tbl.shape != (len(self.alphabet) ** self.D,):
                raise ConfigError(f"table has shape {tbl.shape}, expected ({len(self.alphabet) ** self.D},)")
            tbl.setflags(write=False)
            object.__setattr__(self, "table", tbl)

    @property
    def D(self) -> int:
        a, b = self.window
        return b - a + 1

    @property
    def radius(self) -> int:
        a, b = self.window
        return max(abs(a), abs(b))

    @property
    def ambient(self) -> Sft:
        return self.sft if self.sft is not None else Sft.full(self.alphabet)

    def root(self) -> tuple[LocalRule, int]:
        """The materialized rule this one iterates, and the iteration count."""
        if self.table is not None:
            return self, 1
        root, k = self.base.root()
        return root, k * self.power

    def lookup(self, window: Sequence[int]) -> int:
        return int(self.table[_code(window, len(self.alphabet))])

    def apply_array(self, arr: np.ndarray) -> np.ndarray:
        """Apply to each row of a 2-D array of symbol indices; rows shrink by D - 1."""
        arr = np.asarray(arr)
        if self.table is None:
            root, k = self.root()
            for _ in range(k):
                arr = root.apply_array(arr)
            return arr
        n = len(self.alphabet)
        width = arr.shape[-1] - self.D + 1
        if width < 0:
            raise ValueError(f"input of width {arr.shape[-1]} shorter than window {self.D}")
        dtype = np.int32 if n**self.D < 2**31 else np.int64
        codes = arr[..., 0:width].astype(dtype)
        for t in range(1, self.D):
            codes *= n
            codes += arr[..., t:t + width]
        return self.table.astype(arr.dtype, copy=False)[codes]

    def describe(self) -> dict:
        return rule_to_json(self)


def _code(block: Sequence[int], n: int) -> int:
    c = 0
    for s in block:
        c = c * n + int(s)
    return c


def _digits(codes: np.ndarray, n: int, length: int) -> np.ndarray:
    out = np.empty(codes.shape + (length,), dtype=np.int64)
    c = codes.copy()
    for t in range(length - 1, -1, -1):
        out[..., t] = c % n
        c //= n
    return out


def all_word_array(n: int, length: int) -> np.ndarray:
    """Every word of the given length as rows, lexicographic."""
    if n**length > limits.get().words * 16:
        raise CapacityError(f"{n}^{length} words exceed enumeration cap")
    return _digits(np.arange(n**length, dtype=np.int64), n, length)


def _table_from_function(alphabet: Alphabet, D: int, fn) -> np.ndarray:
    n = len(alphabet)
    return np.array([fn(w) for w in np.ndindex(*(n,) * D)], dtype=np.int64)


def _slide(w: tuple[int, int]) -> int:
    # indices: 0 -> "-1", 1 -> "0", 2 -> "1"; window [x_{i-1}, x_i]
    left, here = w
    zero, one = 1, 2
    if left == one:
        return one if here in (one, zero) else zero
    if here == one:
        return zero
    return here


BUILTINS = {
    "xor": ("(x_{i-1} + x_i) mod 2", BINARY, (-1, 0), lambda w: (w[0] + w[1]) % 2),
    "product": ("x_{i-2} * x_{i-1}", BINARY, (-2, -1), lambda w: w[0] * w[1]),
    "slide": ("ones travel right until absorbed by a -1", SLIDE_ALPHABET, (-1, 0), _slide),
    "identity": ("x_i", BINARY, (0, 0), lambda w: w[0]),
    "flip": ("1 - x_i", BINARY, (0, 0), lambda w: 1 - w[0]),
    "shift": ("x_{i+1}", BINARY, (1, 1), lambda w: w[0]),
}


def builtin_rule(name: str) -> LocalRule:
    try:
        _, alphabet, window, fn = BUILTINS[name]
    except KeyError:
        raise ConfigError(f"unknown builtin rule {name!r}; choose from {sorted(BUILTINS)}") from None
    D = window[1] - window[0] + 1
    return LocalRule(alphabet, window, _table_from_function(alphabet, D, fn), name=name)


def rule_from_json(obj: dict, name: str = "") -> LocalRule:
    from .io import sft_from_json

    try:
        alphabet = Alphabet(tuple(obj["alphabet"]))
        a, b = (int(v) for v in obj["window"])
        raw_table = obj["table"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"rule object missing or malformed field: {exc}") from exc
    sft_obj = obj.get("sft")
    if sft_obj is None or sft_obj == "full":
        sft = None
    else:
        sft = sft_from_json(sft_obj)
        if sft.alphabet != alphabet:
            raise ConfigError("rule and SFT alphabets differ")
    D = b - a + 1
    n = len(alphabet)
    table = np.zeros(n**D, dtype=np.int64)
    seen = set()
    for key, val in raw_table.items():
        w = alphabet.parse(key)
        if len(w) != D:
            raise ConfigError(f"table key {key!r} has length {len(w)}, window needs {D}")
        table[_code(w.symbols, n)] = alphabet.index(val)
        seen.add(w.symbols)
    domain = Sft.full(alphabet) if sft is None else sft
    missing = [w for w in np.ndindex(*(n,) * D) if is_admissible(domain, w) and tuple(w) not in seen]
    if missing:
        raise ConfigError(f"table is missing entries for {[alphabet.format(w) for w in missing[:5]]}")
    rule = LocalRule(alphabet, (a, b), table, sft=sft, name=name or obj.get("name", ""))
    if sft is not None:
        check_closure(rule)
    return rule


def rule_to_json(rule: LocalRule) -> dict:
    from .io import sft_to_json

    root, k = rule.root()
    if k != 1:
        rule = rule_power(root, k, materialize=True)
    n = len(rule.alphabet)
    domain = rule.ambient
    table = {
        rule.alphabet.format(w): rule.alphabet.symbols[rule.lookup(w)]
        for w in np.ndindex(*(n,) * rule.D)
        if is_admissible(domain, w)
    }
    out = {"alphabet": list(rule.alphabet.symbols), "window": list(rule.window), "table": table}
    out["sft"] = "full" if rule.sft is None else sft_to_json(rule.sft)
    if rule.name:
        out["name"] = rule.name
    return out


def check_closure(rule: LocalRule) -> None:
    """Raise unless the rule maps the ambient SFT into itself."""
    sft = rule.ambient
    if sft.is_full:
        return
    n = len(rule.alphabet)
    length = sft.q + rule.D - 1
    if n**length > limits.get().words:
        raise CapacityError(f"closure check needs {n}^{length} words")
    words = all_word_array(n, length)
    images = rule.apply_array(words)
    for w, img in zip(words, images):
        if is_admissible(sft, w) and not is_admissible(sft, img):
            raise ConfigError(
                f"rule maps admissible {rule.alphabet.format(w)} to forbidden {rule.alphabet.format(img)}"
            )


def parse_rule(spec) -> LocalRule:
    """Builtin name, path to a JSON rule file, or an already-decoded JSON object."""
    if isinstance(spec, LocalRule):
        return spec
    if isinstance(spec, dict):
        return rule_from_json(spec)
    spec = str(spec)
    if spec in BUILTINS:
        return builtin_rule(spec)
    path = Path(spec)
    if path.is_file():
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        return rule_from_json(obj, name=path.stem)
    raise ConfigError(f"{spec!r} is neither a builtin rule nor a readable file")


def apply_to_word(rule: LocalRule, w: Word) -> Word:
    if len(w) < rule.D:
        raise ValueError(f"word of length {len(w)} shorter than window {rule.D}")
    out = rule.apply_array(np.asarray(w.symbols, dtype=np.int64)[None, :])[0]
    return Word(tuple(int(s) for s in out), w.offset - rule.window[0])


@dataclass(frozen=True)
class PeriodicConfig:
    """Spatially periodic point x_i = cells[i mod P]."""

    alphabet: Alphabet
    cells: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if not self.cells:
            raise ConfigError("period must be >= 1")
        Word(self.cells).check(self.alphabet)

    @classmethod
    def parse(cls, alphabet: Alphabet, text: str) -> PeriodicConfig:
        return cls(alphabet, alphabet.parse(text).symbols)

    @property
    def P(self) -> int:
        return len(self.cells)

    def window(self, lo: int, hi: int) -> tuple[int, ...]:
        return tuple(self.cells[i % self.P] for i in range(lo, hi + 1))

    def is_admissible(self, sft: Sft) -> bool:
        return is_admissible(sft, self.window(0, self.P + sft.q - 2))

    def __str__(self) -> str:
        return f"({self.alphabet.format(self.cells)})^inf"


def apply_to_periodic(rule: LocalRule, x: PeriodicConfig) -> PeriodicConfig:
    a, b = rule.window
    row = np.asarray(x.window(a, x.P - 1 + b), dtype=np.int64)[None, :]
    return PeriodicConfig(x.alphabet, tuple(int(s) for s in rule.apply_array(row)[0]))


def rule_power(rule: LocalRule, k: int, *, materialize: bool | None = None) -> LocalRule:
    """Local rule of the k-fold composition, window ``[k a, k b]``.

    The composed table is built when it fits the table budget; otherwise the
    returned rule applies ``rule`` k times.  ``materialize=True`` forces the
    table and raises :class:`CapacityError` if it does not fit.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return rule
    root, j = rule.root()
    k *= j
    a, b = root.window
    n = len(root.alphabet)
    Dk = k * (root.D - 1) + 1
    fits = n**Dk <= limits.get().table
    name = f"{root.name}^{k}" if root.name else ""
    if materialize and not fits:
        raise CapacityError(f"composed table {n}^{Dk} exceeds cap {limits.get().table}")
    if materialize is False or not fits:
        return LocalRule(root.alphabet, (k * a, k * b), None, sft=root.sft, name=name, base=root, power=k)
    table = np.empty(n**Dk, dtype=np.int64)
    chunk = 1 << 16
    for start in range(0, n**Dk, chunk):
        codes = np.arange(start, min(start + chunk, n**Dk), dtype=np.int64)
        arr = _digits(codes, n, Dk)
        for _ in range(k):
            arr = root.apply_array(arr)
        table[start:start + len(codes)] = arr[:, 0]
    return LocalRule(root.alphabet, (k * a, k * b), table, sft=root.sft, name=name)


def preimages(rule: LocalRule, w: Word) -> list[Word]:
    """Admissible words u of length |w| + D - 1 with ``apply_to_word(rule, u) == w``."""
    if rule.table is None:
        rule = rule_power(*rule.root(), materialize=True)
    n = len(rule.alphabet)
    D = rule.D
    sft = rule.ambient
    target = w.symbols
    length = len(target) + D - 1
    table = rule.table.tolist()
    mod = n ** (D - 1)
    cap = limits.get().preimage_nodes
    nodes = 0
    out: list[tuple[int, ...]] = []

    # depth-first in symbol order gives lexicographic output
    stack: list[tuple[tuple[int, ...], int]] = [((), 0)]
    while stack:
        prefix, code = stack.pop()
        if len(prefix) == length:
            out.append(prefix)
            continue
        for s in range(n - 1, -1, -1):
            nodes += 1
            if nodes > cap:
                raise CapacityError(f"preimage search exceeded {cap} nodes")
            word = prefix + (s,)
            if sft.forbidden and not is_admissible(sft, word[-sft.q:]):
                continue
            window = code * n + s
            if len(word) >= D:
                if table[window] != target[len(word) - D]:
                    continue
            stack.append((word, window % mod if D > 1 else 0))
    return [Word(u, w.offset + rule.window[0]) for u in out]


def preimage_counts(rule: LocalRule, L: int) -> np.ndarray:
    """Number of full-shift preimages of each L-word, indexed by word code."""
    n = len(rule.alphabet)
    words = all_word_array(n, L + rule.D - 1)
    images = rule.apply_array(words)
    codes = np.zeros(len(images), dtype=np.int64)
    for t in range(L):
        codes = codes * n + images[:, t]
    return np.bincount(codes, minlength=n**L)


def is_surjective_fullshift(rule: LocalRule, L_chk: int = 3) -> bool:
    """Balance test: every L-word has exactly |A|^(D-1) preimages, for L <= L_chk."""
    if rule.sft is not None and not rule.sft.is_full:
        raise ConfigError("balance test applies to full shifts; use check_mme_preservation_L")
    if rule.table is None:
        rule = rule_power(*rule.root(), materialize=True)
    n = len(rule.alphabet)
    expected = n ** (rule.D - 1)
    return all(bool(np.all(preimage_counts(rule, L) == expected)) for L in range(1, L_chk + 1))


def detect_cycle(states: Iterable[Hashable], horizon: int | None = None) -> tuple[int, int] | None:
    """Minimal (preperiod, period) of a deterministic orbit, or None if it does not close.

    ``states`` yields the orbit x_0, x_1, ...; at most ``horizon + 1`` are consumed.
    Dict lookup compares full states, so hash collisions cannot cause false cycles.
    """
    seen: dict[Hashable, int] = {}
    for t, s in enumerate(states):
        if horizon is not None and t > horizon:
            return None
        if s in seen:
            return seen[s], t - seen[s]
        seen[s] = t
    return None


def orbit(rule: LocalRule, x: PeriodicConfig):
    while True:
        yield x
        x = apply_to_periodic(rule, x)


@dataclass(frozen=True)
class ColumnTrace:
    """Central windows (phi^i x)_{W_m} for i = 0..horizon, with their eventual period."""

    m: int
    entries: tuple[tuple[int, ...], ...]
    pp: int | None
    p: int | None
    config_pp: int | None = None
    config_p: int | None = None

    def words(self) -> list[Word]:
        return [Word(e, -self.m) for e in self.entries]

    @property
    def closed(self) -> bool:
        return self.p is not None


def column_trace(rule: LocalRule, x: PeriodicConfig, m: int, horizon: int) -> ColumnTrace:
    if m < 0 or horizon < 1:
        raise ValueError("need m >= 0 and horizon >= 1")
    configs: list[PeriodicConfig] = []
    seen: dict[tuple[int, ...], int] = {}
    cycle = None
    y = x
    for t in range(horizon + 1):
        if y.cells in seen:
            cycle = (seen[y.cells], t - seen[y.cells])
            break
        seen[y.cells] = t
        configs.append(y)
        y = apply_to_periodic(rule, y)

    def config_at(i: int) -> PeriodicConfig:
        if i < len(configs):
            return configs[i]
        pp, p = cycle
        return configs[pp + (i - pp) % p]

    if cycle is None:
        entries = tuple(c.window(-m, m) for c in configs[: horizon + 1])
        return ColumnTrace(m, entries, None, None)
    pp, p = cycle
    seq = [config_at(i).window(-m, m) for i in range(max(horizon + 1, pp + 2 * p))]
    p_m = next(d for d in _divisors(p) if all(seq[i] == seq[i + d] for i in range(pp, pp + p)))
    pp_m = pp
    while pp_m > 0 and seq[pp_m - 1] == seq[pp_m - 1 + p_m]:
        pp_m -= 1
    return ColumnTrace(m, tuple(seq[: horizon + 1]), pp_m, p_m, pp, p)


def _divisors(p: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(p) + 1) if p % d == 0]
    return sorted(set(small + [p // d for d in small]))


def periodic_points(alphabet: Alphabet, P: int, sft: Sft | None = None) -> list[PeriodicConfig]:
    """All configurations with (not necessarily least) period P that lie in ``sft``."""
    n = len(alphabet)
    out = []
    for cells in np.ndindex(*(n,) * P):
        x = PeriodicConfig(alphabet, cells)
        if sft is None or x.is_admissible(sft):
            out.append(x)
    return out
