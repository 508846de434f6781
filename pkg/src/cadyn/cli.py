"""Command-line runner: ``cadyn run <config.json>``, ``cadyn catalog``, ``cadyn verify``.

Exit codes: 0 success, 1 failed verification, 2 capacity exceeded, 3 bad config.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import catalog, io, limits
from .ca import PeriodicConfig, check_closure, is_surjective_fullshift, parse_rule, periodic_points, rule_to_json
from .convergence import (
    BirkhoffSpec,
    birkhoff_distribution,
    cyclic_factor_report,
    ergodicity_witness,
    limlep_report,
    orbit_ball,
    truncated_orbit_ball_prob,
)
from .equicontinuity import (
    GilmanParams,
    YParams,
    classify_point,
    estimate_Y_measure,
    gilman_ratio,
)
from .errors import CapacityError, ConfigError, ReducibleError
from .measures import (
    cesaro_prob,
    check_invariance_L,
    check_mme_preservation_L,
    cylinder_prob,
    pushforward_prob,
    uniform,
)
from .oracles import closed_form_step
from .symbolic import Sft, Word, enumerate_words, is_irreducible, parry_measure

SAMPLING_KINDS = {"gilman", "y-measure", "birkhoff", "ergodicity", "cyclic"}


@dataclass
class RunResult:
    summary: str
    report: dict
    csv: str | None = None


@dataclass
class Context:
    rule: object
    mu: object
    sft: Sft
    cfg: dict
    seed: int | None

    def word(self, key: str = "word") -> Word:
        if key not in self.cfg:
            raise ConfigError(f"missing '{key}'")
        return Word(self.rule.alphabet.parse(str(self.cfg[key])).symbols, int(self.cfg.get("offset", 0)))

    def base(self, key: str = "base") -> PeriodicConfig:
        if key not in self.cfg:
            raise ConfigError(f"missing '{key}'")
        x = PeriodicConfig.parse(self.rule.alphabet, str(self.cfg[key]))
        if not x.is_admissible(self.sft):
            raise ConfigError(f"periodic point {x} is not in the subshift")
        return x

    def int(self, key: str, default=None) -> int:
        val = self.cfg.get(key, default)
        if val is None:
            raise ConfigError(f"missing '{key}'")
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"'{key}' must be an integer")
        return val


def _n_values(spec) -> list[int]:
    if isinstance(spec, int) and not isinstance(spec, bool):
        return [spec]
    if isinstance(spec, str) and ".." in spec:
        lo, hi = spec.split("..")
        return list(range(int(lo), int(hi) + 1))
    if isinstance(spec, list) and all(isinstance(v, int) for v in spec):
        return spec
    raise ConfigError(f"'n' must be an integer, 'lo..hi' or a list of integers, got {spec!r}")


def rule_digest(rule) -> str:
    return hashlib.sha256(json.dumps(rule_to_json(rule), sort_keys=True).encode()).hexdigest()[:16]


def _fmt(x):
    return io.format_number(x)


# --- experiment kinds ------------------------------------------------------

def _pushforward(ctx: Context) -> RunResult:
    w = ctx.word()
    ns = _n_values(ctx.cfg.get("n", 1))
    vals = [pushforward_prob(ctx.rule, ctx.mu, w, n) for n in ns]
    csv = "n,value\n" + "".join(f"{n},{_fmt(v)}\n" for n, v in zip(ns, vals))
    rep = {"word": ctx.rule.alphabet.format(w), "offset": w.offset, "values": {str(n): _fmt(v) for n, v in zip(ns, vals)},
           "label": "exact"}
    return RunResult(f"pushforward of [{ctx.cfg['word']}] for {len(ns)} steps, last {_fmt(vals[-1])}", rep, csv)


def _cesaro(ctx: Context) -> RunResult:
    w = ctx.word()
    N = ctx.int("N")
    step = closed_form_step if ctx.cfg.get("fast_path", True) else None
    series = cesaro_prob(ctx.rule, ctx.mu, w, N, step=step)
    csv = "n,step,cesaro\n" + "".join(
        f"{i},{_fmt(s)},{_fmt(v)}\n" for i, (s, v) in enumerate(zip(series.steps, series.values), start=1))
    osc = series.tail_oscillation()
    rep = {"word": ctx.rule.alphabet.format(w), "N": N,
           "limit_estimate": {"last_value": _fmt(series.values[-1]), "tail_oscillation": _fmt(osc)}, "label": "exact"}
    return RunResult(f"Cesaro average at N={N}: {float(series.values[-1]):.6g} (tail oscillation {float(osc):.3g})",
                     rep, csv)


def _gilman(ctx: Context) -> RunResult:
    c = ctx.cfg
    params = GilmanParams(m=ctx.int("m", 0), n_list=tuple(c.get("n_list", (5, 10, 20))), T=ctx.int("T", 100),
                          samples_x=ctx.int("samples_x", 2000), samples_y=ctx.int("samples_y", 200),
                          margin=c.get("margin"))
    res = gilman_ratio(ctx.rule, ctx.mu, params, ctx.seed)
    ratios = ", ".join(f"n={r.n}: {r.estimate:.4f}" for r in res.rows)
    return RunResult(f"Gilman ratios {ratios}", res.to_dict(), res.csv())


def _y_measure(ctx: Context) -> RunResult:
    params = YParams(m=ctx.int("m", 0), p_max=ctx.int("p_max", 1), pp_max=ctx.int("pp_max", 32), T=ctx.int("T", 80),
                     samples=ctx.int("samples", 2000))
    est = estimate_Y_measure(ctx.rule, ctx.mu, params, ctx.seed)
    return RunResult(f"Y-mass {est.estimate:.4f} [{est.ci_low:.4f}, {est.ci_high:.4f}]", est.to_dict())


def _limlep(ctx: Context) -> RunResult:
    spec = orbit_ball(ctx.rule, ctx.base(), ctx.int("m", 0), ctx.int("T", 5))
    rep = limlep_report(ctx.rule, ctx.mu, spec, ctx.int("N", 20), n_max=ctx.int("n_max", 4),
                        threshold=float(io.parse_rational(ctx.cfg.get("threshold", "1/10"))))
    csv = "n,cesaro\n" + "".join(f"{i},{_fmt(v)}\n" for i, v in enumerate(rep.cesaro.values, start=1))
    return RunResult(f"{rep.verdicts['kind']} base: predicted limit {_fmt(rep.predicted)}, last value "
                     f"{rep.verdicts['last_value']}", rep.to_dict(), csv)


def _event(ctx: Context):
    ev = ctx.cfg.get("event")
    if isinstance(ev, dict):
        x = PeriodicConfig.parse(ctx.rule.alphabet, str(ev["base"]))
        return orbit_ball(ctx.rule, x, int(ev.get("m", 0)), int(ev.get("T", 3)))
    if isinstance(ev, str):
        return Word(ctx.rule.alphabet.parse(ev).symbols, int(ctx.cfg.get("offset", 0)))
    raise ConfigError("'event' must be a word or an orbit ball {base, m, T}")


def _birkhoff(ctx: Context) -> RunResult:
    steps = ctx.cfg.get("steps", 0)
    steps = tuple(steps) if isinstance(steps, list) else int(steps)
    spec = BirkhoffSpec(_event(ctx), W=ctx.int("W", 5000), steps=steps, samples=ctx.int("samples", 1000))
    res = birkhoff_distribution(ctx.rule, ctx.mu, spec, ctx.seed)
    counts, edges = res.histogram(int(ctx.cfg.get("bins", 50)))
    csv = "bin_low,bin_high,count\n" + "".join(
        f"{edges[i]:.4f},{edges[i + 1]:.4f},{int(c)}\n" for i, c in enumerate(counts))
    rep = res.to_dict()
    rep["label"] = "sampled"
    return RunResult(f"Birkhoff averages: mean {res.averages.mean():.4f} over {spec.samples} samples", rep, csv)


def _ergodicity(ctx: Context) -> RunResult:
    spec = orbit_ball(ctx.rule, ctx.base(), ctx.int("m", 0), ctx.int("T", 3))
    w = ergodicity_witness(ctx.rule, ctx.mu, spec, ctx.seed, W=ctx.int("W", 5000), samples=ctx.int("samples", 1000),
                           L=ctx.int("L", 3))
    return RunResult(w.verdict, w.to_dict())


def _mme(ctx: Context) -> RunResult:
    L = ctx.int("L", 4)
    rule = ctx.rule
    preserves = check_mme_preservation_L(rule, L)
    rep = {"L": L, "label": "exact"}
    if ctx.sft.is_full:
        rep["surjective"] = is_surjective_fullshift(rule, L)
        rep["preserves_uniform"] = preserves.holds
        summary = f"surjective={rep['surjective']} preserves_uniform={preserves.holds}"
    else:
        rep["preserves_mme"] = preserves.holds
        rep["mme_check"] = preserves.to_dict()
        summary = f"preserves_mme={preserves.holds} (L={L}, tolerance 1e-9)"
    return RunResult(summary, rep)


def _cyclic(ctx: Context) -> RunResult:
    rep = cyclic_factor_report(ctx.rule, ctx.mu, ctx.int("m", 0), ctx.int("horizon", 40), ctx.int("samples", 500),
                               ctx.seed, probe_period=ctx.int("probe_period", 6), L=ctx.int("L", 2))
    return RunResult(rep["verdict"], rep)


def _classify(ctx: Context) -> RunResult:
    m = ctx.int("m", 0)
    points = ctx.cfg.get("points")
    if not isinstance(points, list) or not points:
        raise ConfigError("'points' must be a non-empty list of periodic words")
    out = {}
    for p in points:
        x = PeriodicConfig.parse(ctx.rule.alphabet, str(p))
        out[str(p)] = classify_point(ctx.rule, x, m, ctx.cfg.get("horizon")).to_dict()
    labels = ", ".join(f"{p}: {v['label']}" for p, v in out.items())
    return RunResult(labels, {"m": m, "points": out, "label": "exact"})


def _theorem(ctx: Context) -> RunResult:
    name = ctx.cfg.get("name")
    rep = theorem_experiment(name, ctx)
    return RunResult(f"{name}: {rep['verdict']}", rep)


KINDS = {
    "pushforward": _pushforward,
    "cesaro": _cesaro,
    "gilman": _gilman,
    "y-measure": _y_measure,
    "limlep": _limlep,
    "birkhoff": _birkhoff,
    "ergodicity": _ergodicity,
    "mme": _mme,
    "cyclic": _cyclic,
    "classify": _classify,
    "theorem": _theorem,
}


# --- composed theorem experiments -----------------------------------------

def _cesaro_vs(ctx: Context, target, L: int, N: int, tol: float) -> dict:
    """Cesaro averages at N against a reference measure on all admissible words of length <= L."""
    rows, worst = {}, 0.0
    for length in range(1, L + 1):
        for w in enumerate_words(ctx.sft, length):
            series = cesaro_prob(ctx.rule, ctx.mu, w, N, step=closed_form_step)
            ref = cylinder_prob(target, w)
            diff = abs(float(series.values[-1]) - float(ref))
            worst = max(worst, diff)
            rows[ctx.sft.alphabet.format(w)] = {"cesaro": _fmt(series.values[-1]), "reference": _fmt(ref)}
    return {"label": "truncated", "N": N, "L": L, "max_difference": worst, "tolerance": tol,
            "agrees": worst <= tol, "values": rows}


def _find_witness_base(ctx: Context, max_period: int = 3):
    """First spatially periodic point, LP at m = 0, whose orbit ball is not phi-invariant."""
    for P in range(1, max_period + 1):
        for x in periodic_points(ctx.rule.alphabet, P, ctx.sft):
            spec = orbit_ball(ctx.rule, x, 0, 1)
            if not spec.is_lp:
                continue
            spec = orbit_ball(ctx.rule, x, 0, spec.p + 1)
            if truncated_orbit_ball_prob(ctx.rule, ctx.mu, spec, 0) != truncated_orbit_ball_prob(ctx.rule, ctx.mu, spec, 1):
                return spec
    return None


def theorem_experiment(name: str, ctx: Context) -> dict:
    """Run the constituent checks of a characterisation and combine them.

    "mmecor": the limit is the measure of maximal entropy iff mu is that
    measure and the map is onto.  "sigmaergodic": the limit is shift-ergodic
    iff mu is phi-invariant.  Each sub-result carries its label.
    """
    L = ctx.int("L", 2)
    N = ctx.int("N", 8)
    tol = float(ctx.cfg.get("tolerance", 0.05))
    if name == "mmecor":
        irreducible = is_irreducible(ctx.sft)
        if not irreducible:
            raise ReducibleError("mmecor needs an irreducible subshift")
        mme = uniform(ctx.sft.alphabet) if ctx.sft.is_full else parry_measure(ctx.sft)
        diffs = [abs(float(cylinder_prob(ctx.mu, w)) - float(cylinder_prob(mme, w)))
                 for length in range(1, L + 2) for w in enumerate_words(ctx.sft, length)]
        mu_is_mme = max(diffs) <= 1e-9
        if ctx.sft.is_full:
            onto = {"label": "exact", "surjective": is_surjective_fullshift(ctx.rule)}
        else:
            onto = {"label": "exact (finite level)", "surjective": check_mme_preservation_L(ctx.rule, L + 1).holds,
                    "via": "MME preservation"}
        limit = _cesaro_vs(ctx, mme, L, N, tol)
        predicted = mu_is_mme and onto["surjective"]
        consistent = predicted == limit["agrees"]
        verdict = ("limit is the MME" if predicted else "limit is not the MME") + (
            "" if consistent else " (Cesaro evidence disagrees at this truncation)")
        return {"name": name, "irreducible": {"label": "exact", "value": irreducible},
                "mu_is_mme": {"label": "exact" if ctx.sft.is_full else "float 1e-9", "value": mu_is_mme},
                "surjectivity": onto, "limit_vs_mme": limit, "predicted": predicted, "consistent": consistent,
                "verdict": verdict}
    if name == "sigmaergodic":
        checks = {f"L={l}": check_invariance_L(ctx.rule, ctx.mu, l).to_dict() for l in range(1, L + 2)}
        invariant = all(c["holds"] for c in checks.values())
        rep = {"name": name, "invariance": {"label": "exact", "levels": checks, "value": invariant}}
        if invariant:
            rep["verdict"] = "holds: mu is phi-invariant at all tested levels, limit equals mu"
            return rep
        spec = _find_witness_base(ctx)
        if spec is None:
            rep["verdict"] = "fails: not phi-invariant; no LP orbit ball witness among small periodic points"
            return rep
        if ctx.seed is None:
            raise ConfigError("sigmaergodic witness needs a 'seed'")
        w = ergodicity_witness(ctx.rule, ctx.mu, spec, ctx.seed, W=ctx.int("W", 5000),
                               samples=ctx.int("samples", 1000), L=L + 1)
        rep["witness"] = {"label": "sampled", **w.to_dict()}
        rep["verdict"] = "fails: not phi-invariant; witness attached" if w.found else \
            "fails: not phi-invariant; witness inconclusive"
        return rep
    raise ConfigError(f"unknown theorem experiment {name!r}; choose 'mmecor' or 'sigmaergodic'")


# --- config handling -------------------------------------------------------

def build_context(cfg: dict, base_dir: Path) -> Context:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    rule_spec = cfg.get("rule")
    if rule_spec is None:
        raise ConfigError("config needs a 'rule'")
    if isinstance(rule_spec, str) and rule_spec.endswith(".json"):
        rule_spec = str((base_dir / rule_spec).resolve())
    rule = parse_rule(rule_spec)
    sft_spec = cfg.get("sft")
    if isinstance(sft_spec, str) and sft_spec.endswith(".json"):
        sft_spec = str((base_dir / sft_spec).resolve())
    sft = catalog.resolve_sft(sft_spec, rule.alphabet)
    if sft is not None and not sft.is_full:
        rule = dataclasses.replace(rule, sft=sft)
        check_closure(rule)
    sft = rule.ambient
    measure = cfg.get("measure", "uniform")
    if isinstance(measure, str) and measure.endswith(".json"):
        measure = str((base_dir / measure).resolve())
    mu = catalog.resolve_measure(measure, rule.alphabet, sft)
    seed = cfg.get("seed")
    kind = cfg.get("kind")
    needs_seed = kind in SAMPLING_KINDS or (kind == "theorem" and cfg.get("name") == "sigmaergodic")
    if needs_seed and not isinstance(seed, int):
        raise ConfigError(f"experiment kind {kind!r} samples randomly and needs an integer 'seed'")
    return Context(rule, mu, sft, cfg, seed)


def run_config(cfg: dict, base_dir: Path = Path(".")) -> RunResult:
    kind = cfg.get("kind") if isinstance(cfg, dict) else None
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}; choose from {sorted(KINDS)}")
    budget = cfg.get("budget", {})
    if not isinstance(budget, dict) or any(not isinstance(v, int) or v <= 0 for v in budget.values()):
        raise ConfigError("'budget' must map limit names to positive integers")
    unknown = set(budget) - {f.name for f in dataclasses.fields(limits.Limits)}
    if unknown:
        raise ConfigError(f"unknown budget keys {sorted(unknown)}")
    with limits.override(**budget):
        ctx = build_context(cfg, base_dir)
        result = KINDS[kind](ctx)
    result.report = {
        "kind": kind,
        "rule": {"name": ctx.rule.name, "hash": rule_digest(ctx.rule), **rule_to_json(ctx.rule)},
        "measure": io.measure_to_json(ctx.mu),
        "seed": ctx.seed,
        "config": cfg,
        "result": result.report,
    }
    return result


def output_stem(cfg: dict, config_path: Path) -> Path:
    out = cfg.get("output")
    if out is None:
        return config_path.with_suffix("")
    out = Path(out)
    if not out.is_absolute():
        out = config_path.parent / out
    return out.with_suffix("") if out.suffix in (".json", ".csv") else out


def write_outputs(result: RunResult, stem: Path) -> list[Path]:
    paths = [stem.with_name(stem.name + ".json")]
    io.write_atomic(paths[0], io.dumps(result.report))
    if result.csv is not None:
        paths.append(stem.with_name(stem.name + ".csv"))
        io.write_atomic(paths[1], result.csv)
    return paths


def cmd_run(path: str) -> int:
    config_path = Path(path)
    cfg = io.load_json(config_path)
    result = run_config(cfg, config_path.parent)
    paths = write_outputs(result, output_stem(cfg, config_path))
    print(f"{cfg['kind']}: {result.summary} -> {', '.join(str(p) for p in paths)}")
    return 0


def cmd_catalog(as_json: bool) -> int:
    data = catalog.listing()
    if as_json:
        sys.stdout.write(io.dumps(data))
        return 0
    print("rules:")
    for name, r in data["rules"].items():
        print(f"  {name:10s} window {r['window']}  alphabet {r['alphabet']}  {r['formula']}")
    print("subshifts:")
    for name, s in data["sfts"].items():
        print(f"  {name:12s} alphabet {s['alphabet']} forbidden {s['forbidden']}")
    print("measures:")
    for name, d in data["measures"].items():
        print(f"  {name:14s} {d}")
    print("experiments (use with `cadyn run` after saving the config):")
    for name, cfg in data["experiments"].items():
        print(f"  {name:18s} {json.dumps(cfg, sort_keys=True)}")
    return 0


def _criterion(number: int):
    from .acceptance import run_criterion

    return run_criterion(number)


def verify(out_dir: Path, jobs: int = 1, criteria: list[int] | None = None) -> list:
    """Run the acceptance criteria and write one JSON file per criterion plus a summary."""
    from .acceptance import CRITERIA

    numbers = sorted(criteria or CRITERIA)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_criterion, numbers))
    else:
        outcomes = [_criterion(k) for k in numbers]
    for o in outcomes:
        io.write_atomic(out_dir / f"criterion_{o.number:02d}.json", io.dumps(o.to_dict()))
    summary = {str(o.number): {"title": o.title, "passed": o.passed} for o in outcomes}
    io.write_atomic(out_dir / "summary.json", io.dumps(summary))
    return outcomes


def cmd_verify(out: str, jobs: int, only: list[int] | None) -> int:
    outcomes = verify(Path(out), jobs, only)
    for o in outcomes:
        print(f"criterion {o.number:2d} {'PASS' if o.passed else 'FAIL'} ({o.seconds:.1f}s) {o.title}")
    return 0 if all(o.passed for o in outcomes) else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="cadyn", description="Limit measures of one-dimensional cellular automata.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("config")
    p_cat = sub.add_parser("catalog", help="list builtin rules, subshifts, measures and pinned experiments")
    p_cat.add_argument("--json", action="store_true")
    p_ver = sub.add_parser("verify", help="run the acceptance suite")
    p_ver.add_argument("--jobs", type=int, default=1)
    p_ver.add_argument("--out", default="verify-output")
    p_ver.add_argument("--only", type=int, nargs="*")
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config)
        if args.command == "catalog":
            return cmd_catalog(args.json)
        return cmd_verify(args.out, max(1, args.jobs), args.only)
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ReducibleError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
