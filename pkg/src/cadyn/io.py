"""JSON encodings for SFTs, measures and exact numbers.

Rationals travel as ``"num/den"`` strings so configs never contain floats.
"""
from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .symbolic import Alphabet, Sft


def parse_rational(value) -> Fraction:
    if isinstance(value, bool):
        raise ConfigError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"not a rational: {value!r}") from exc
    raise ConfigError(f"rationals must be 'num/den' strings, got {value!r}")


def format_number(x) -> str | float:
    """Exact values become 'num/den' strings; floats stay floats."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, int):
        return str(x)
    return float(x)


def sft_from_json(obj) -> Sft:
    if isinstance(obj, (str, os.PathLike)):
        obj = load_json(obj)
    try:
        alphabet = Alphabet(tuple(obj["alphabet"]))
        forbidden = list(obj.get("forbidden", []))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"SFT object needs 'alphabet' and 'forbidden': {exc}") from exc
    return Sft.from_strings(alphabet, forbidden)


def sft_to_json(sft: Sft) -> dict:
    return {
        "alphabet": list(sft.alphabet.symbols),
        "forbidden": sorted(sft.alphabet.format(w) for w in sft.forbidden),
    }


def measure_from_json(obj, alphabet: Alphabet | None = None):
    from .measures import MarkovMeasure, bernoulli

    if isinstance(obj, (str, os.PathLike)) and Path(obj).is_file():
        obj = load_json(obj)
    if not isinstance(obj, dict):
        raise ConfigError(f"measure must be a JSON object, got {obj!r}")
    kind = obj.get("kind")
    if "alphabet" in obj:
        alphabet = Alphabet(tuple(obj["alphabet"]))
    if kind == "bernoulli":
        probs = obj.get("probs")
        if not isinstance(probs, dict):
            raise ConfigError("bernoulli measure needs a 'probs' object")
        if alphabet is None:
            alphabet = Alphabet(tuple(probs))
        return bernoulli(alphabet, {k: parse_rational(v) for k, v in probs.items()})
    if kind == "markov":
        pi, P = obj.get("pi"), obj.get("P")
        if not isinstance(pi, dict) or not isinstance(P, dict):
            raise ConfigError("markov measure needs 'pi' and 'P' objects")
        if alphabet is None:
            labels = sorted({lab for row in P.values() for lab in row})
            alphabet = Alphabet(tuple(labels))
        n = len(alphabet)
        states = [alphabet.parse(s).symbols for s in pi]
        k = int(obj.get("memory", len(states[0]) if states else 1))
        pi_vec = [Fraction(0)] * n**k
        P_mat = [[Fraction(0)] * n for _ in range(n**k)]
        for key, val in pi.items():
            pi_vec[_code(alphabet.parse(key).symbols, n, k)] = parse_rational(val)
        for key, row in P.items():
            code = _code(alphabet.parse(key).symbols, n, k)
            for sym, val in row.items():
                P_mat[code][alphabet.index(sym)] = parse_rational(val)
        return MarkovMeasure(alphabet, k, tuple(pi_vec), tuple(tuple(r) for r in P_mat))
    raise ConfigError(f"unknown measure kind {kind!r}")


def _code(block, n: int, k: int) -> int:
    if len(block) != k:
        raise ConfigError(f"state {block} does not have memory length {k}")
    c = 0
    for s in block:
        c = c * n + s
    return c


def measure_to_json(mu) -> dict:
    alphabet = mu.alphabet
    if mu.memory == 0:
        return {
            "kind": "bernoulli",
            "alphabet": list(alphabet.symbols),
            "probs": {alphabet.symbols[a]: format_number(p) for a, p in enumerate(mu.P[0])},
        }
    pi, P = {}, {}
    for code, state in enumerate(mu.states()):
        if mu.pi[code] == 0:
            continue
        label = alphabet.format(state)
        pi[label] = format_number(mu.pi[code])
        P[label] = {alphabet.symbols[a]: format_number(p) for a, p in enumerate(mu.P[code]) if p != 0}
    return {"kind": "markov", "alphabet": list(alphabet.symbols), "memory": mu.memory, "pi": pi, "P": P}


def load_json(path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def _default(x):
    if isinstance(x, Fraction):
        return format_number(x)
    if hasattr(x, "to_dict"):
        return x.to_dict()
    if hasattr(x, "item"):
        return x.item()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
