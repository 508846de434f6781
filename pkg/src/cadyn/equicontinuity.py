"""Monte Carlo evidence for mu-equicontinuity, and exact classification of periodic points.

Orbit balls are truncated at a finite horizon T and the limit over ball radii
is replaced by a finite list, so every estimate here is evidence, not a
decision.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import binomtest

from .ca import LocalRule, PeriodicConfig, column_trace
from .errors import ConfigError
from .measures import MarkovMeasure, sample_words
from .rng import stream
from .symbolic import Word

CHUNK_ROWS = 1 << 14


def wilson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


def light_cone(rule: LocalRule, m: int, T: int) -> tuple[int, int]:
    """Coordinates of the initial row that determine (phi^i y)_{W_m} for all i <= T."""
    a, b = rule.window
    return -m + T * min(a, 0), m + T * max(b, 0)


def center_trace(rule: LocalRule, rows: np.ndarray, lo: int, m: int, T: int, stop_on: np.ndarray | None = None):
    """Windows (phi^i y)_{W_m}, i = 0..T, for each row of ``rows`` (whose first column is coordinate lo).

    Returns an int array of shape (rows, T + 1, 2m + 1).  When ``stop_on`` (the
    same shape, one trace per row) is given, returns instead a boolean vector:
    whether each row reproduces its reference trace at every step.  Rows drop out
    as soon as they disagree.
    """
    a, _ = rule.window
    width = 2 * m + 1
    if stop_on is None:
        out = np.empty((rows.shape[0], T + 1, width), dtype=rows.dtype)
    alive = np.arange(rows.shape[0])
    cur = rows
    for t in range(T + 1):
        start = -m - (lo - t * a)
        win = cur[:, start:start + width]
        if stop_on is None:
            out[:, t] = win
        else:
            ok = np.all(win == stop_on[alive, t], axis=1)
            if not ok.all():
                alive, cur = alive[ok], cur[ok]
                if len(alive) == 0:
                    break
        if t < T:
            cur = rule.apply_array(cur)
    if stop_on is None:
        return out
    matched = np.zeros(rows.shape[0], dtype=bool)
    matched[alive] = True
    return matched


@dataclass(frozen=True)
class GilmanParams:
    m: int = 0
    n_list: tuple[int, ...] = (5, 10, 20)
    T: int = 100
    samples_x: int = 2000
    samples_y: int = 200
    margin: int | None = None

    def resolved_margin(self, rule: LocalRule) -> int:
        need = max(self.m + self.T * rule.radius, max(self.n_list))
        margin = need if self.margin is None else self.margin
        if margin < need:
            raise ConfigError(f"margin {margin} too small: need >= m + T*r = {self.m + self.T * rule.radius}"
                              f" and >= max n = {max(self.n_list)}")
        if self.samples_x < 1 or self.samples_y < 1 or min(self.n_list) < 0 or self.m < 0:
            raise ConfigError("sample counts must be >= 1, radii >= 0")
        return margin


@dataclass(frozen=True)
class RatioRow:
    n: int
    estimate: float
    ci_low: float
    ci_high: float
    T: int
    m: int
    seed: int

    def csv(self) -> str:
        return f"{self.n},{self.estimate!r},{self.ci_low!r},{self.ci_high!r},{self.T},{self.m},{self.seed}"


CSV_HEADER = "n,estimate,ci_low,ci_high,T,m,seed"


@dataclass(frozen=True)
class GilmanResult:
    rows: tuple[RatioRow, ...]
    per_x: np.ndarray = field(repr=False, compare=False)   # matches, shape (samples_x, len(n_list))
    params: GilmanParams = None
    truncation: str = ""

    def ratios(self) -> list[float]:
        return [r.estimate for r in self.rows]

    def csv(self) -> str:
        return "\n".join([CSV_HEADER] + [r.csv() for r in self.rows]) + "\n"

    def to_dict(self) -> dict:
        return {"rows": [asdict(r) for r in self.rows], "params": asdict(self.params),
                "truncation": self.truncation, "samples": self.params.samples_x * self.params.samples_y}


def gilman_ratio(rule: LocalRule, mu: MarkovMeasure, params: GilmanParams, seed: int) -> GilmanResult:
    """Estimate mu(B_n(x) & O_m(x)) / mu(B_n(x)), averaged over x ~ mu, for each n.

    For each sampled x, ``samples_y`` points y are drawn from mu conditioned to
    agree with x on W_n; the ratio is the fraction whose orbit stays in the
    orbit ball, i.e. (phi^i y)_{W_m} = (phi^i x)_{W_m} for i = 0..T.
    """
    M = params.resolved_margin(rule)
    m, T = params.m, params.T
    lo, hi = light_cone(rule, m, T)
    sl = slice(lo + M, hi + M + 1)
    counts = np.zeros((params.samples_x, len(params.n_list)), dtype=np.int64)
    per_chunk = max(1, CHUNK_ROWS // params.samples_y)
    for start in range(0, params.samples_x, per_chunk):
        idx = range(start, min(start + per_chunk, params.samples_x))
        xs = np.concatenate([sample_words(mu, -M, M, stream(seed, "gilman", "x", i), 1) for i in idx])
        xs = xs.astype(np.uint8)
        xtrace = center_trace(rule, xs[:, sl], lo, m, T)
        for j, n in enumerate(params.n_list):
            ys = np.concatenate([
                sample_words(mu, -M, M, stream(seed, "gilman", "y", i, n), params.samples_y,
                             pinned=Word(tuple(xs[r, M - n:M + n + 1]), -n))
                for r, i in enumerate(idx)
            ])
            ref = np.repeat(xtrace, params.samples_y, axis=0)
            ok = center_trace(rule, ys[:, sl].astype(np.uint8), lo, m, T, stop_on=ref)
            counts[start:start + len(idx), j] = ok.reshape(len(idx), params.samples_y).sum(axis=1)
    total = params.samples_x * params.samples_y
    rows = []
    for j, n in enumerate(params.n_list):
        k = int(counts[:, j].sum())
        rows.append(RatioRow(n, k / total, *wilson(k, total), T, m, seed))
    return GilmanResult(tuple(rows), counts, params, f"orbit ball truncated at T={T}; ball radii {list(params.n_list)}")


@dataclass(frozen=True)
class YParams:
    m: int = 0
    p_max: int = 1
    pp_max: int = 32
    T: int = 80
    samples: int = 2000

    def __post_init__(self):
        if self.T < self.pp_max + 2 * self.p_max:
            raise ConfigError(f"horizon T={self.T} must be >= pp_max + 2 p_max = {self.pp_max + 2 * self.p_max}")
        if self.p_max < 1 or self.pp_max < 0 or self.samples < 1:
            raise ConfigError("need p_max >= 1, pp_max >= 0, samples >= 1")


@dataclass(frozen=True)
class YEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    hits: int
    samples: int
    params: YParams
    seed: int
    label: str = "horizon-truncated"

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["half_width"] = self.half_width
        return d


def observed_period(codes: np.ndarray, p: int) -> np.ndarray:
    """Smallest preperiod after which each row repeats with period p over the observed horizon."""
    length = codes.shape[1]
    if p >= length:
        return np.full(codes.shape[0], length)
    eq = codes[:, p:] == codes[:, :-p]
    trailing = np.argmin(eq[:, ::-1], axis=1)
    trailing = np.where(eq.all(axis=1), eq.shape[1], trailing)
    return eq.shape[1] - trailing


def _window_codes(traces: np.ndarray, n: int) -> np.ndarray:
    codes = np.zeros(traces.shape[:2], dtype=np.int64)
    for c in range(traces.shape[2]):
        codes = codes * n + traces[:, :, c]
    return codes


def estimate_Y_measure(rule: LocalRule, mu: MarkovMeasure, params: YParams, seed: int) -> YEstimate:
    """Fraction of x whose W_m column has period <= p_max after preperiod <= pp_max, within T steps."""
    m, T = params.m, params.T
    lo, hi = light_cone(rule, m, T)
    hits = 0
    batch = max(1, CHUNK_ROWS // 4)
    for start in range(0, params.samples, batch):
        idx = range(start, min(start + batch, params.samples))
        xs = np.concatenate([sample_words(mu, lo, hi, stream(seed, "ymeasure", i), 1) for i in idx]).astype(np.uint8)
        codes = _window_codes(center_trace(rule, xs, lo, m, T), len(mu.alphabet))
        inside = np.zeros(len(idx), dtype=bool)
        for p in range(1, params.p_max + 1):
            inside |= observed_period(codes, p) <= params.pp_max
        hits += int(inside.sum())
    return YEstimate(hits / params.samples, *wilson(hits, params.samples), hits, params.samples, params, seed)


@dataclass(frozen=True)
class PointClass:
    label: str                 # "LP", "LEP-not-LP" or "unknown"
    pp_m: int | None
    p_m: int | None
    config_pp: int | None
    config_p: int | None
    recurrent: bool | None

    def to_dict(self) -> dict:
        return asdict(self)


def is_recurrent(rule: LocalRule, x: PeriodicConfig, horizon: int) -> bool | None:
    """Does the orbit of x come back to x within ``horizon`` steps?  None if undecided."""
    from .ca import apply_to_periodic

    y = x
    seen = {x.cells}
    for _ in range(horizon):
        y = apply_to_periodic(rule, y)
        if y.cells == x.cells:
            return True
        if y.cells in seen:
            return False
        seen.add(y.cells)
    return None


def default_horizon(alphabet_size: int, P: int) -> int:
    return 2 * alphabet_size**P + 2


def classify_point(rule: LocalRule, x: PeriodicConfig, m: int, horizon: int | None = None) -> PointClass:
    """Exact LP / LEP classification of a spatially periodic point at window m."""
    horizon = horizon or default_horizon(len(x.alphabet), x.P)
    tr = column_trace(rule, x, m, horizon)
    rec = is_recurrent(rule, x, horizon)
    if not tr.closed:
        return PointClass("unknown", None, None, None, None, rec)
    if rec is not None and rec != (tr.config_pp == 0):
        raise AssertionError(f"recurrence and zero preperiod disagree at {x}")
    label = "LP" if tr.pp == 0 else "LEP-not-LP"
    return PointClass(label, tr.pp, tr.p, tr.config_pp, tr.config_p, rec)


def is_locally_periodic(rule: LocalRule, x: PeriodicConfig, horizon: int | None = None) -> bool | None:
    """x in LP(phi): every window is purely periodic.

    Windows with 2m + 1 >= P already see the whole configuration and LP_m
    shrinks as m grows, so one window of that size decides.
    """
    c = classify_point(rule, x, x.P // 2, horizon)
    return None if c.label == "unknown" else c.label == "LP"


@dataclass
class Verdict:
    verdict: str
    evidence_only: bool
    gilman: GilmanResult
    y_measure: YEstimate
    thresholds: dict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "evidence_only": self.evidence_only, "gilman": self.gilman.to_dict(),
                "y_measure": self.y_measure.to_dict(), "thresholds": self.thresholds}


def mu_equicontinuity_verdict(rule: LocalRule, mu: MarkovMeasure, gparams: GilmanParams, yparams: YParams,
                              seed: int, high: float = 0.9, low: float = 0.5) -> Verdict:
    """Combine Gilman-ratio and Y-mass evidence.  Never a decision."""
    g = gilman_ratio(rule, mu, gparams, seed)
    y = estimate_Y_measure(rule, mu, yparams, seed)
    last = g.rows[-1].estimate
    ratios = g.ratios()
    nondecreasing = all(r2 >= r1 - (g.rows[0].ci_high - g.rows[0].ci_low) for r1, r2 in zip(ratios, ratios[1:]))
    if last >= high and y.estimate >= high and nondecreasing:
        verdict = "consistent with mu-equicontinuous"
    elif last <= low:
        verdict = "consistent with not mu-equicontinuous"
    else:
        verdict = "inconclusive"
    return Verdict(verdict, True, g, y, {"high": high, "low": low})
