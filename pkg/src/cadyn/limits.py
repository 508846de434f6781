"""Work budgets.

Every enumeration or dynamic program checks its size against these caps and
raises :class:`~cadyn.errors.CapacityError` instead of truncating.  Defaults
can be overridden with the ``CADYN_BUDGET`` environment variable, a JSON
object such as ``{"dp_states": 65536}``, or locally with :func:`override`.
"""
from __future__ import annotations

import contextlib
import contextvars
import dataclasses
import json
import os
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class Limits:
    words: int = 10**6          # |A|^L cap for word enumeration
    states: int = 10**6         # higher-block state space
    table: int = 2**24          # materialized composed rule tables
    dp_states: int = 2**22      # live states in the pushforward DP
    preimage_nodes: int = 10**7  # search nodes in preimage enumeration


def _from_env() -> Limits:
    raw = os.environ.get("CADYN_BUDGET")
    if not raw:
        return Limits()
    try:
        overrides = json.loads(raw)
        return dataclasses.replace(Limits(), **{k: int(v) for k, v in overrides.items()})
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad CADYN_BUDGET value {raw!r}: {exc}") from exc


_current: contextvars.ContextVar[Limits | None] = contextvars.ContextVar("cadyn_limits", default=None)


def get() -> Limits:
    lim = _current.get()
    if lim is None:
        lim = _from_env()
        _current.set(lim)
    return lim


@contextlib.contextmanager
def override(**kwargs: int):
    """Temporarily replace some budget values."""
    token = _current.set(dataclasses.replace(get(), **kwargs))
    try:
        yield get()
    finally:
        _current.reset(token)
