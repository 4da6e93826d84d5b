"""Experiment driver.

Usage::

    graphcodes list
    graphcodes run toric-distance L=3
    graphcodes --experiment column-model --config params.txt --seed 7 --out col.csv

Parameters come from the config file (plain key=value lines) and then from
key=value arguments, which win. Output is CSV with a fixed header per
experiment; the same config and seed always give byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import chainmap, complex2, decode, effective, gf2, ising, matchcode

CHUNK = 10000


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Param:
    kind: str  # "int", "float" or "str"
    default: object
    help: str = ""

    def parse(self, name: str, text: str):
        try:
            if self.kind == "int":
                return int(text)
            if self.kind == "float":
                return float(text)
        except ValueError:
            raise ConfigError(f"parameter {name} expects {self.kind}, got {text!r}") from None
        return text


@dataclass(frozen=True)
class Experiment:
    name: str
    summary: str
    columns: tuple[str, ...]
    params: dict[str, Param]
    default_trials: int
    runner: Callable


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    seed: int = 0
    trials: int | None = None
    out: str | None = None


def np_stream(seed: int, counter: int) -> np.random.Generator:
    return np.random.default_rng([seed & (2 ** 64 - 1), counter])


def py_stream(seed: int, counter: int) -> random.Random:
    return random.Random(f"{seed}:{counter}")


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(round(x, 12))
    return str(x)


# runners: each returns a list of row tuples matching the experiment columns


def _isg_trace(p, seed, trials):
    g = matchcode.load_fixture(p["fixture"])
    sched = matchcode.color_matchings(g)
    if not sched:
        raise ConfigError(f"fixture {p['fixture']} has no color matchings")
    rep = matchcode.run_matching_schedule(g, sched, p["rounds"], py_stream(seed, 0))
    return [(s.round, s.index, len(s.matching), s.isg_rank, len(s.cycles), len(s.new_cycles),
             len(s.redundant_cycles)) for s in rep.steps]


def _matching_code(p, seed, trials):
    names = matchcode.FIXTURE_FILES if p["fixture"] == "all" else (p["fixture"],)
    rows = []
    for name in names:
        g = matchcode.load_fixture(name)
        rows.append((name, g.n_V, len(g.edges), matchcode.rank_of_Q(g), len(g.edges) - 1,
                     matchcode.stabilizer_rank(g), g.n_V // 2 + 1))
    return rows


def _toric_distance(p, seed, trials):
    c = complex2.torus(p["L"])
    if p["ell"] > 1:
        c = complex2.subdivide_edges(c, p["ell"])
    css = complex2.toric_code(c)
    dx, dz = complex2.distance_X(css), complex2.distance_Z(css)
    return [(p["L"], p["ell"], css.n, int(dx), int(dz))]


def _decode_graph(p) -> decode.CheckGraph:
    kind = p["graph"]
    if kind == "cycle":
        return decode.cycle_graph(p["length"], p["p"])
    if kind == "star":
        return decode.local_star_graph(p["d"], p["T"], p["p"])
    if kind == "grid":
        return decode.build_bulk_graph(decode.VacancySpec(p["Lx"], p["Ly"], T=p["T"]), p["p"])
    raise ConfigError(f"unknown graph {kind!r}")


def _decode_sim(p, seed, trials):
    g = _decode_graph(p)
    dec = p["decoder"]
    if dec not in ("ml", "mc", "mwpm", "two-step"):
        raise ConfigError(f"unknown decoder {dec!r}")
    if dec == "two-step" and p["graph"] != "star":
        raise ConfigError("the two-step decoder needs graph=star")
    solver = decode.ExactSolver(g) if dec in ("ml", "mc") else None
    two_step = decode.TwoStepHoleDecoder(g) if dec == "two-step" else None
    cache: dict[int, int] = {}
    failures = 0.0
    for chunk, start in enumerate(range(0, trials, CHUNK)):
        rng = np_stream(seed, chunk)
        batch = decode.sample_errors_batch(g, rng, min(CHUNK, trials - start))
        for row in batch:
            red = int(sum(1 << int(i) for i in np.flatnonzero(row)))
            if two_step is not None:
                res = two_step.decode(red, rng)
                failures += 0.5 if res.tie else res.failed
                continue
            s = decode.syndrome(g, red)
            if dec == "mc":
                blue = solver.mc_decode(s, rng)
            elif s in cache:
                blue = cache[s]
            else:
                blue = solver.ml_decode(s).blue if dec == "ml" else decode.mwpm_decode(g, s)
                cache[s] = blue
            failures += decode.decoder_failure(g, red, blue)
    rate = failures / trials if trials else float("nan")
    sigma = math.sqrt(rate * (1 - rate) / trials) if trials else float("nan")
    return [(p["graph"], dec, g.n_edges, trials, failures, rate, sigma)]


def _column_model(p, seed, trials):
    model = effective.ColumnModel(p["T"], effective._strands(p["p"], p["d"]), p["boundary"])
    closed = effective.column_failure_probability(model)
    if trials:
        fails = sum(effective.sample_column_failures(model, min(CHUNK, trials - start), np_stream(seed, k))
                    for k, start in enumerate(range(0, trials, CHUNK)))
        rate = fails / trials
    else:
        fails, rate = 0, float("nan")
    return [(p["T"], p["d"], p["p"], p["boundary"], closed, trials, fails, rate)]


def _ladder(p, seed, trials):
    rows = []
    for T in range(2, p["T"] + 1):
        m = effective.TransferMatrixModel(p["eps"], p["eps_p"], T)
        total = sum(m.exact(b) for b in m.configurations())
        rows.append((T, p["eps"], p["eps_p"], total, effective.ladder_independence_check(m)))
    return rows


def _vacancies(text: str, N: int) -> frozenset[int]:
    if text == "all":
        return frozenset(range(1, N))
    if text == "none":
        return frozenset()
    try:
        return frozenset(int(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"bad vacancy list {text!r}") from None


def _ising_toy(p, seed, trials):
    vac = _vacancies(p["vacancies"], p["N"])
    spec = ising.IsingSpec(p["N"], p["T"], p["p"], vac)
    label = ",".join(map(str, sorted(vac))) or "-"
    if not trials:
        return [(spec.N, spec.T, spec.p, label, "exact", 0, ising.effective_failure(spec), 0.0)]
    failures = 0.0
    for k in range(trials):
        rec = ising.simulate(spec, np_stream(seed, k))
        v = ising.ml_decode_record(rec)
        failures += 0.5 if v.tie else float(v.decoded != rec.initial)
    rate = failures / trials
    return [(spec.N, spec.T, spec.p, label, "sampled", trials, rate, math.sqrt(rate * (1 - rate) / trials))]


def _chainmap_code(p):
    name = p["code"]
    if name == "triangle":
        return chainmap.triangle_code()
    if name == "steane":
        return chainmap.steane_code()
    if name == "toric":
        return chainmap.toric_fixture(p["L"])
    raise ConfigError(f"unknown code {name!r}")


def _chainmap_demo(p, seed, trials):
    css = _chainmap_code(p)
    c = chainmap.css_to_complex(css)
    if p["w"] != "random":
        try:
            words = [sum(1 << int(i) for i in p["w"].split(","))]
        except ValueError:
            raise ConfigError(f"bad support {p['w']!r}") from None
    else:
        rng = py_stream(seed, 0)
        words = []
        while len(words) < trials:
            w = sum(1 << i for i in rng.sample(range(css.n), p["weight"]))
            if any(gf2.dot(r, w) for r in css.hz.rows) and not gf2.in_span(w, css.hx.rows):
                words.append(w)
    rows = []
    for k, w in enumerate(words):
        support = ",".join(map(str, gf2.support(w)))
        check = chainmap.stabsim_cross_check(css, w, py_stream(seed, k + 1))
        if check.kind != "anticommuting":
            rows.append((k, support, check.kind, -1, "", "", 0, 0, "", check.matches))
            continue
        target, f, data = chainmap.measure_x_product(c, w)
        r = chainmap.verify_chain_map(c, target, f, data)
        rows.append((k, support, check.kind, data.v_index, r.z_square, r.q_square,
                     r.z_rank_delta, r.x_rank_delta, r.kills_v, check.matches))
    return rows


EXPERIMENTS: dict[str, Experiment] = {e.name: e for e in [
    Experiment("isg-trace", "ISG rank along the color-matching schedule of a fixture graph",
               ("round", "index", "matching_size", "isg_rank", "cycles", "new_cycles", "redundant_cycles"),
               {"fixture": Param("str", "honeycomb_2x2", "fixture graph name"),
                "rounds": Param("int", 3, "schedule periods")}, 0, _isg_trace),
    Experiment("matching-code", "rank of the check group and the stabilizer group against the counting formulas",
               ("fixture", "n_V", "n_E", "rank_Q", "n_E_minus_1", "rank_S", "n_V_half_plus_1"),
               {"fixture": Param("str", "all", "fixture name or all")}, 0, _matching_code),
    Experiment("toric-distance", "brute-force X and Z distances of the toric code on a subdivided torus",
               ("L", "ell", "N", "d_X", "d_Z"),
               {"L": Param("int", 3, "torus size"), "ell": Param("int", 1, "edge subdivision factor")},
               0, _toric_distance),
    Experiment("decode-sim", "Monte Carlo decoder failure on a check graph",
               ("graph", "decoder", "n_edges", "trials", "failures", "rate", "sigma"),
               {"graph": Param("str", "cycle", "cycle, star or grid"),
                "decoder": Param("str", "ml", "ml, mc, mwpm or two-step"),
                "p": Param("float", 0.05, "edge error probability"),
                "length": Param("int", 4, "cycle length"),
                "d": Param("int", 3, "star degree"),
                "T": Param("int", 2, "rounds"),
                "Lx": Param("int", 3, "grid width"),
                "Ly": Param("int", 3, "grid height")}, 10000, _decode_sim),
    Experiment("column-model", "closed-form strand-column failure, with optional sampling",
               ("T", "d", "p", "boundary", "closed_form", "trials", "failures", "rate"),
               {"T": Param("int", 3, "column vertices"), "d": Param("int", 2, "strands per bundle"),
                "p": Param("float", 0.1, "strand probability"),
                "boundary": Param("str", "periodic", "periodic or dangling")}, 0, _column_model),
    Experiment("ladder", "ladder transfer-matrix normalization and independent-flip TV distance",
               ("T", "eps", "eps_p", "total_probability", "tv_distance"),
               {"T": Param("int", 6, "largest ladder length"), "eps": Param("float", 0.01, "spin bias"),
                "eps_p": Param("float", 0.01, "pair bias")}, 0, _ladder),
    Experiment("ising-toy", "repetition-code memory with vacancies; trials=0 gives the exact value",
               ("N", "T", "p", "vacancies", "method", "trials", "failure", "sigma"),
               {"N": Param("int", 3, "spins"), "T": Param("int", 2, "rounds"),
                "p": Param("float", 0.1, "flip probability"),
                "vacancies": Param("str", "all", "all, none or comma list in 1..N-1")}, 0, _ising_toy),
    Experiment("chainmap-demo", "X-product measurement: chain-map squares, rank changes, tableau cross-check",
               ("case", "w", "kind", "v_index", "z_square", "q_square", "z_rank_delta", "x_rank_delta",
                "kills_v", "stab_match"),
               {"code": Param("str", "triangle", "triangle, steane or toric"),
                "L": Param("int", 2, "toric size"),
                "w": Param("str", "0,1", "measured support, or random"),
                "weight": Param("int", 4, "support weight for random draws")}, 0, _chainmap_demo),
]}


def list_experiments() -> dict:
    return {e.name: {"summary": e.summary, "columns": list(e.columns), "default_trials": e.default_trials,
                     "params": {k: {"type": v.kind, "default": v.default, "help": v.help}
                                for k, v in e.params.items()}}
            for e in EXPERIMENTS.values()}


def parse_assignments(lines) -> dict[str, str]:
    out = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def schema_text(name: str) -> str:
    """Default parameters of an experiment as config-file text."""
    return "".join(f"{k}={v.default}\n" for k, v in EXPERIMENTS[name].params.items())


def build_config(name: str, raw: dict[str, str], seed: int = 0, trials: int | None = None,
                 out: str | None = None) -> ExperimentConfig:
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; try 'list'")
    exp = EXPERIMENTS[name]
    raw = dict(raw)
    if "trials" in raw:
        trials = Param("int", 0).parse("trials", raw.pop("trials"))
    if "seed" in raw:
        seed = Param("int", 0).parse("seed", raw.pop("seed"))
    unknown = set(raw) - set(exp.params)
    if unknown:
        raise ConfigError(f"unknown parameters for {name}: {', '.join(sorted(unknown))}")
    params = {k: (v.parse(k, raw[k]) if k in raw else v.default) for k, v in exp.params.items()}
    if trials is not None and trials < 0:
        raise ConfigError("trials must be nonnegative")
    return ExperimentConfig(name, params, seed, trials, out)


def run(config: ExperimentConfig) -> str:
    """Run one experiment and return its CSV text."""
    exp = EXPERIMENTS[config.experiment]
    trials = exp.default_trials if config.trials is None else config.trials
    try:
        rows = exp.runner(config.params, config.seed, trials)
    except (ConfigError, ValueError) as err:
        raise ConfigError(str(err)) from err
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(exp.columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _help_epilog() -> str:
    lines = ["experiments (CSV columns):"]
    for e in EXPERIMENTS.values():
        lines.append(f"  {e.name}: {e.summary}")
        lines.append(f"    columns: {','.join(e.columns)}")
        lines.append("    params: " + " ".join(f"{k}={v.default}" for k, v in e.params.items()))
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="graphcodes", description="Run graph-code experiments and emit CSV.",
                                 epilog=_help_epilog(), formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("words", nargs="*", help="'list', or 'run EXPERIMENT key=value ...'")
    ap.add_argument("--experiment")
    ap.add_argument("--config", help="file of key=value lines")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--out", help="CSV path; stdout when omitted")
    args = ap.parse_args(argv)
    words = list(args.words)
    if words[:1] == ["list"]:
        print(json.dumps(list_experiments(), indent=2, sort_keys=True))
        return 0
    if words[:1] == ["run"]:
        words = words[1:]
    name = args.experiment
    if name is None:
        if not words or "=" in words[0]:
            ap.print_usage(sys.stderr)
            print("graphcodes: error: no experiment given", file=sys.stderr)
            return 2
        name = words.pop(0)
    try:
        raw = {}
        if args.config:
            with open(args.config) as fh:
                raw.update(parse_assignments(fh))
        raw.update(parse_assignments(words))
        config = build_config(name, raw, args.seed, args.trials, args.out)
        text = run(config)
    except (ConfigError, OSError) as err:
        print(f"graphcodes: error: {err}", file=sys.stderr)
        return 2
    if config.out:
        with open(config.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
